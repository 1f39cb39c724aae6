#pragma once

#include "acudesk/math.hpp"

#include <string>
#include <vector>

namespace acudesk {

enum class PlaneKind { CutOut, View };

/// Cut-out or view plane. axis_u, axis_v and normal form a right-handed
/// orthonormal frame; the plane spans extent around `position`.
struct SlicingPlane {
    std::string id;
    PlaneKind kind = PlaneKind::View;
    Vec3 position = Vec3::Zero();
    Vec3 normal = Vec3::UnitZ();
    Vec3 axis_u = Vec3::UnitX();
    Vec3 axis_v = Vec3::UnitY();
    double extent_u = 100.0;
    double extent_v = 100.0;
    int resolution_u = 256;
    int resolution_v = 256;

    /// Builds in-plane axes deterministically from the normal alone.
    static SlicingPlane from_normal(std::string id, PlaneKind kind, const Vec3& position, const Vec3& normal,
                                    double extent_u = 100.0, double extent_v = 100.0, int resolution_u = 256,
                                    int resolution_v = 256);

    /// Throws InvalidArgument when the frame or extents are invalid.
    void validate() const;

    /// Signed distance of p from the plane along the normal.
    double signed_distance(const Vec3& p) const { return (p - position).dot(normal); }

    bool operator==(const SlicingPlane&) const = default;
};

/// True when p survives every cut-out plane; each plane removes the half-space
/// its normal points into.
bool clip(const Vec3& p, const std::vector<SlicingPlane>& cutout_planes);

} // namespace acudesk
