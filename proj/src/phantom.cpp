#include "acudesk/phantom.hpp"

#include "acudesk/error.hpp"

#include <cmath>
#include <numbers>

namespace acudesk {

namespace {

void check_grid(int n, double spacing_mm) {
    if (n < 2) throw Error(ErrorCode::InvalidArgument, "phantom needs at least 2 voxels per axis");
    if (!(spacing_mm > 0.0)) throw Error(ErrorCode::InvalidArgument, "phantom spacing must be > 0");
}

} // namespace

Volume sphere_distance_phantom(int n, double spacing_mm, double radius_mm, const Vec3& origin) {
    check_grid(n, spacing_mm);
    const double c = 0.5 * (n - 1) * spacing_mm;
    const Vec3 center = origin + Vec3(c, c, c);
    std::vector<float> v(static_cast<std::size_t>(n) * n * n);
    std::size_t idx = 0;
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const Vec3 p = origin + spacing_mm * Vec3(i, j, k);
                v[idx++] = static_cast<float>(radius_mm - (p - center).norm());
            }
    return Volume({n, n, n}, Vec3::Constant(spacing_mm), origin, Mat3::Identity(), std::move(v), Modality::Other);
}

Volume shells_phantom(int n, double spacing_mm) {
    check_grid(n, spacing_mm);
    const double c = 0.5 * (n - 1);
    const double r_max = 0.5 * (n - 1);
    std::vector<float> v(static_cast<std::size_t>(n) * n * n);
    std::size_t idx = 0;
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const double r = Vec3(i - c, j - c, k - c).norm() / r_max;
                double hu = -1000.0;                // air
                if (r < 0.90) hu = 40.0;            // skin
                if (r < 0.86) hu = -100.0;          // fat
                if (r < 0.72) hu = 50.0;            // muscle
                if (r < 0.35) hu = 700.0;           // bone
                if (r < 0.90) hu += 15.0 * std::sin(0.35 * i) * std::cos(0.27 * j + 0.19 * k);
                v[idx++] = static_cast<float>(hu);
            }
    return Volume({n, n, n}, Vec3::Constant(spacing_mm), Vec3::Zero(), Mat3::Identity(), std::move(v), Modality::CT);
}

Volume ramp_phantom(Dims dims, const Vec3& spacing, const Vec3& coeff, double offset, const Vec3& origin,
                    const Mat3& orientation) {
    for (int a = 0; a < 3; ++a) check_grid(dims[a], spacing[a]);
    std::vector<float> v(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2]);
    std::size_t idx = 0;
    for (int k = 0; k < dims[2]; ++k)
        for (int j = 0; j < dims[1]; ++j)
            for (int i = 0; i < dims[0]; ++i) {
                const Vec3 p = origin + orientation * spacing.cwiseProduct(Vec3(i, j, k));
                v[idx++] = static_cast<float>(offset + coeff.dot(p));
            }
    return Volume(dims, spacing, origin, orientation, std::move(v), Modality::Other);
}

Mesh sphere_mesh(const Vec3& center, double radius, int stacks, int slices) {
    if (stacks < 2 || slices < 3 || !(radius > 0.0))
        throw Error(ErrorCode::InvalidArgument, "sphere mesh needs stacks >= 2, slices >= 3 and radius > 0");
    Mesh m;
    const double pi = std::numbers::pi;
    m.vertices.push_back(center + Vec3(0, 0, radius));
    m.normals.push_back(Vec3::UnitZ());
    for (int s = 1; s < stacks; ++s) {
        const double theta = pi * s / stacks;
        for (int l = 0; l < slices; ++l) {
            const double phi = 2.0 * pi * l / slices;
            const Vec3 n(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta));
            m.vertices.push_back(center + radius * n);
            m.normals.push_back(n);
        }
    }
    m.vertices.push_back(center - Vec3(0, 0, radius));
    m.normals.push_back(-Vec3::UnitZ());

    const auto ring = [&](int s, int l) { return static_cast<std::uint32_t>(1 + (s - 1) * slices + (l % slices)); };
    const auto south = static_cast<std::uint32_t>(m.vertices.size() - 1);
    for (int l = 0; l < slices; ++l) m.triangles.push_back({0, ring(1, l), ring(1, l + 1)});
    for (int s = 1; s + 1 < stacks; ++s) {
        for (int l = 0; l < slices; ++l) {
            m.triangles.push_back({ring(s, l), ring(s + 1, l), ring(s + 1, l + 1)});
            m.triangles.push_back({ring(s, l), ring(s + 1, l + 1), ring(s, l + 1)});
        }
    }
    for (int l = 0; l < slices; ++l) m.triangles.push_back({ring(stacks - 1, l), south, ring(stacks - 1, l + 1)});
    return m;
}

Mesh box_mesh(const Vec3& lo, const Vec3& hi) {
    Mesh m;
    for (int i = 0; i < 8; ++i)
        m.vertices.emplace_back(i & 1 ? hi.x() : lo.x(), i & 2 ? hi.y() : lo.y(), i & 4 ? hi.z() : lo.z());
    // Two triangles per face, counter-clockwise seen from outside.
    m.triangles = {{0, 2, 3}, {0, 3, 1}, {4, 5, 7}, {4, 7, 6}, {0, 1, 5}, {0, 5, 4},
                   {2, 6, 7}, {2, 7, 3}, {0, 4, 6}, {0, 6, 2}, {1, 3, 7}, {1, 7, 5}};
    return m;
}

} // namespace acudesk
