#include "acudesk/needling.hpp"

#include "acudesk/error.hpp"
#include "acudesk/render.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace acudesk {

void Needle::validate() const {
    if (std::find(kNeedleLengthsMm.begin(), kNeedleLengthsMm.end(), length_mm) == kNeedleLengthsMm.end())
        throw Error(ErrorCode::InvalidArgument, "needle length must be one of 15, 25, 40 or 75 mm");
    if (std::abs(direction.norm() - 1.0) > 1e-9) throw Error(ErrorCode::InvalidArgument, "needle direction must be unit");
    if (!base.allFinite()) throw Error(ErrorCode::InvalidArgument, "needle base must be finite");
    if (!(inserted_depth_mm >= 0.0 && inserted_depth_mm <= length_mm))
        throw Error(ErrorCode::InvalidDepth, "inserted depth must lie in [0, length]");
}

Needle make_needle(std::string id, double length_mm) {
    Needle n;
    n.id = std::move(id);
    n.length_mm = length_mm;
    n.base = Vec3(0.0, 0.0, length_mm);
    n.direction = -Vec3::UnitZ();
    n.validate();
    return n;
}

Needle insert_needle(const Needle& needle, const Vec3& skin_entry, const Vec3& direction, double depth_mm) {
    if (!(depth_mm >= 0.0 && depth_mm <= needle.length_mm))
        throw Error(ErrorCode::InvalidDepth, "depth " + std::to_string(depth_mm) + " mm outside [0, " +
                                                 std::to_string(needle.length_mm) + "]");
    const double n = direction.norm();
    if (!(n > 0.0)) throw Error(ErrorCode::InvalidArgument, "insertion direction must be non-zero");
    if (std::abs(n - 1.0) > 1e-9) throw Error(ErrorCode::InvalidArgument, "insertion direction must be unit");
    Needle out = needle;
    out.direction = direction;
    out.inserted_depth_mm = depth_mm;
    out.base = skin_entry - (needle.length_mm - depth_mm) * direction;
    return out;
}

Vec3 project_point_to_plane(const Vec3& v, const SlicingPlane& plane) {
    return v - (v - plane.position).dot(plane.normal) * plane.normal;
}

ProjectedNeedle project_needle(const Needle& needle, const SlicingPlane& plane, double step_mm) {
    auto to_local = [&](const Vec3& p) {
        const Vec3 rel = project_point_to_plane(p, plane) - plane.position;
        return Eigen::Vector2d(rel.dot(plane.axis_u), rel.dot(plane.axis_v));
    };
    ProjectedNeedle out;
    out.plane_id = plane.id;
    out.tip_2d = to_local(needle.tip());
    out.base_2d = to_local(needle.base);
    out.highlight = std::abs(plane.signed_distance(needle.tip())) <= 2.0 * step_mm;
    return out;
}

std::vector<double> segment_mesh_hits(const Vec3& origin, const Vec3& direction, double length, const Mesh& mesh,
                                      const Affine& pose) {
    std::vector<Vec3> world;
    world.reserve(mesh.vertices.size());
    for (const auto& v : mesh.vertices) world.push_back(pose * v);

    std::vector<double> hits;
    constexpr double eps = 1e-12;
    for (const auto& tri : mesh.triangles) {
        // Möller–Trumbore
        const Vec3& a = world[tri[0]];
        const Vec3 e1 = world[tri[1]] - a;
        const Vec3 e2 = world[tri[2]] - a;
        const Vec3 p = direction.cross(e2);
        const double det = e1.dot(p);
        if (std::abs(det) < eps) continue;
        const double inv = 1.0 / det;
        const Vec3 s = origin - a;
        const double u = s.dot(p) * inv;
        if (u < 0.0 || u > 1.0) continue;
        const Vec3 q = s.cross(e1);
        const double v = direction.dot(q) * inv;
        if (v < 0.0 || u + v > 1.0) continue;
        const double t = e2.dot(q) * inv;
        if (t < -1e-9 || t > length + 1e-9) continue;
        hits.push_back(std::clamp(t, 0.0, length));
    }
    std::sort(hits.begin(), hits.end());
    // A segment through a shared edge or vertex reports the same crossing more than once.
    hits.erase(std::unique(hits.begin(), hits.end(), [](double x, double y) { return std::abs(x - y) < 1e-9; }),
               hits.end());
    return hits;
}

namespace {

void volume_crossings(const Vec3& origin, const Vec3& direction, double length, const TraversalVolume& tv,
                      std::vector<LayerCrossing>& out) {
    const Volume& vol = *tv.volume;
    const double h = tv.step_mm / 4.0;
    auto inside = [&](double t) { return sample(vol, origin + t * direction) > tv.threshold; };
    auto refine = [&](double lo, double hi) {
        // Invariant: inside(lo) != inside(hi).
        const bool lo_state = inside(lo);
        for (int i = 0; i < 30; ++i) {
            const double mid = 0.5 * (lo + hi);
            (inside(mid) == lo_state ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };

    const long n = std::max(1L, static_cast<long>(std::ceil(length / h)));
    bool state = inside(0.0);
    bool open = state;
    double entry = 0.0;
    double prev = 0.0;
    for (long k = 1; k <= n; ++k) {
        const double t = k == n ? length : static_cast<double>(k) * h;
        const bool now = inside(t);
        if (now != state) {
            const double cross = refine(prev, t);
            if (now) {
                entry = cross;
                open = true;
            } else if (open) {
                out.push_back({tv.label, entry, cross});
                open = false;
            }
            state = now;
        }
        prev = t;
    }
    if (open) out.push_back({tv.label, entry, std::nullopt});
}

} // namespace

std::vector<LayerCrossing> traverse(const Needle& needle, const TraversalScene& scene) {
    std::vector<LayerCrossing> out;
    const double length = needle.inserted_depth_mm;
    if (!(length > 0.0)) return out;
    const Vec3 origin = needle.skin_entry();
    const Vec3& dir = needle.direction;

    for (const auto& layer : scene.layers) {
        if (!layer.visible || !layer.mesh) continue;
        const auto hits = segment_mesh_hits(origin, dir, length, *layer.mesh, layer.pose);
        std::size_t i = 0;
        for (; i + 1 < hits.size(); i += 2) {
            if (hits[i + 1] > hits[i]) out.push_back({layer.name, hits[i], hits[i + 1]});
        }
        // Odd parity: the tip ends inside, or the mesh is open.
        if (i < hits.size()) out.push_back({layer.name, hits[i], std::nullopt});
    }
    if (scene.volume && scene.volume->volume) volume_crossings(origin, dir, length, *scene.volume, out);

    std::stable_sort(out.begin(), out.end(), [](const LayerCrossing& a, const LayerCrossing& b) {
        return a.entry_depth_mm < b.entry_depth_mm;
    });
    return out;
}

ScoreReport score(const Needle& needle, const Vec3& acupoint_world, double tolerance_radius,
                  const std::vector<LayerCrossing>& crossings, const ScoreOptions& options) {
    ScoreReport r;
    r.tip_distance_mm = (needle.tip() - acupoint_world).norm();
    r.hit = r.tip_distance_mm <= tolerance_radius;
    r.depth_violation = options.max_safe_depth && needle.inserted_depth_mm > *options.max_safe_depth;
    for (const auto& c : crossings) {
        const bool avoid = std::find(options.avoid_layers.begin(), options.avoid_layers.end(), c.layer) !=
                           options.avoid_layers.end();
        const bool seen = std::find(r.forbidden_contacts.begin(), r.forbidden_contacts.end(), c.layer) !=
                          r.forbidden_contacts.end();
        if (avoid && !seen) r.forbidden_contacts.push_back(c.layer);
    }
    if (options.skin_normal && options.skin_normal->norm() > 0.0) {
        const double s = std::abs(needle.direction.dot(options.skin_normal->normalized()));
        r.skin_angle_deg = std::asin(std::min(1.0, s)) * 180.0 / std::numbers::pi;
        r.threading_ok = *r.skin_angle_deg < options.threading_max_angle_deg;
    }
    return r;
}

} // namespace acudesk
