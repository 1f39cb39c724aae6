#include "acudesk/camera.hpp"

#include "acudesk/error.hpp"

#include <cmath>
#include <numbers>

namespace acudesk {

void Camera::validate() const {
    const Vec3 forward = target - position;
    if (!(forward.norm() > 0.0)) throw Error(ErrorCode::InvalidArgument, "camera position equals target");
    if (!(up.norm() > 0.0) || forward.normalized().cross(up.normalized()).norm() < 1e-9)
        throw Error(ErrorCode::InvalidArgument, "camera up vector is parallel to the view direction");
    if (!(vertical_fov > 0.0 && vertical_fov < 180.0))
        throw Error(ErrorCode::InvalidArgument, "field of view must lie in (0, 180) degrees");
    if (width < 1 || height < 1) throw Error(ErrorCode::InvalidArgument, "image size must be at least 1x1");
}

void Camera::basis(Vec3& right, Vec3& true_up, Vec3& forward) const {
    forward = (target - position).normalized();
    right = forward.cross(up).normalized();
    true_up = right.cross(forward);
}

Ray Camera::ray_for_pixel(int x, int y) const {
    Vec3 right, true_up, forward;
    basis(right, true_up, forward);
    const double tan_half = std::tan(vertical_fov * std::numbers::pi / 360.0);
    const double aspect = static_cast<double>(width) / height;
    const double sx = (2.0 * (x + 0.5) / width - 1.0) * tan_half * aspect;
    const double sy = (1.0 - 2.0 * (y + 0.5) / height) * tan_half;
    return {position, (forward + sx * right + sy * true_up).normalized()};
}

Camera framing_camera(const Vec3& center, double radius, int width, int height) {
    Camera c;
    c.vertical_fov = 40.0;
    const double distance = radius / std::sin(c.vertical_fov * std::numbers::pi / 360.0) * 1.05;
    c.target = center;
    c.position = center - Vec3::UnitZ() * distance;
    c.up = Vec3::UnitY();
    c.width = width;
    c.height = height;
    return c;
}

} // namespace acudesk
