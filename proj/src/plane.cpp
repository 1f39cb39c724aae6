#include "acudesk/plane.hpp"

#include "acudesk/error.hpp"

#include <cmath>

namespace acudesk {

SlicingPlane SlicingPlane::from_normal(std::string id, PlaneKind kind, const Vec3& position, const Vec3& normal,
                                       double extent_u, double extent_v, int resolution_u, int resolution_v) {
    if (!(normal.norm() > 0.0)) throw Error(ErrorCode::InvalidArgument, "plane normal must be non-zero");
    SlicingPlane p;
    p.id = std::move(id);
    p.kind = kind;
    p.position = position;
    p.normal = normal.normalized();
    // Seed with the world axis least aligned with the normal.
    Vec3 seed = Vec3::UnitX();
    if (std::abs(p.normal.x()) > 0.9) seed = Vec3::UnitY();
    p.axis_u = (seed - seed.dot(p.normal) * p.normal).normalized();
    p.axis_v = p.normal.cross(p.axis_u);
    p.extent_u = extent_u;
    p.extent_v = extent_v;
    p.resolution_u = resolution_u;
    p.resolution_v = resolution_v;
    p.validate();
    return p;
}

void SlicingPlane::validate() const {
    constexpr double tol = 1e-6;
    if (std::abs(normal.norm() - 1.0) > tol) throw Error(ErrorCode::InvalidArgument, "plane normal must be unit");
    if (std::abs(axis_u.norm() - 1.0) > tol || std::abs(axis_v.norm() - 1.0) > tol ||
        std::abs(axis_u.dot(axis_v)) > tol || std::abs(axis_u.dot(normal)) > tol || std::abs(axis_v.dot(normal)) > tol)
        throw Error(ErrorCode::InvalidArgument, "plane axes must be orthonormal and orthogonal to the normal");
    if (!(extent_u > 0.0 && extent_v > 0.0)) throw Error(ErrorCode::InvalidArgument, "plane extent must be positive");
    if (kind == PlaneKind::View && (resolution_u < 1 || resolution_v < 1))
        throw Error(ErrorCode::InvalidArgument, "view plane resolution must be positive");
}

bool clip(const Vec3& p, const std::vector<SlicingPlane>& cutout_planes) {
    for (const auto& plane : cutout_planes) {
        if (plane.kind == PlaneKind::CutOut && plane.signed_distance(p) > 0.0) return false;
    }
    return true;
}

} // namespace acudesk
