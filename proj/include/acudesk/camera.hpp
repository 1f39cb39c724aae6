#pragma once

#include "acudesk/math.hpp"

namespace acudesk {

struct Ray {
    Vec3 origin;
    Vec3 direction; // unit
};

struct Camera {
    Vec3 position{0.0, 0.0, -300.0};
    Vec3 target = Vec3::Zero();
    Vec3 up = Vec3::UnitY();
    double vertical_fov = 40.0; // degrees
    int width = 256;
    int height = 256;

    void validate() const;

    /// Ray through the centre of pixel (x, y); y = 0 is the top row.
    Ray ray_for_pixel(int x, int y) const;

    /// Orthonormal camera frame: right, true up, forward.
    void basis(Vec3& right, Vec3& true_up, Vec3& forward) const;

    bool operator==(const Camera&) const = default;
};

/// Camera on the -z side of `center`, far enough back that a sphere of
/// `radius` mm fits the vertical field of view.
Camera framing_camera(const Vec3& center, double radius, int width, int height);

} // namespace acudesk
