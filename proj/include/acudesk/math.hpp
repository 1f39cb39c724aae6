#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>

namespace acudesk {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;
using Affine = Eigen::Affine3d;

using Rgb = std::array<float, 3>;
using Rgba = std::array<float, 4>;

/// True when the columns of m are unit length and mutually orthogonal within tol.
inline bool is_orthonormal(const Mat3& m, double tol) {
    return (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol;
}

} // namespace acudesk
