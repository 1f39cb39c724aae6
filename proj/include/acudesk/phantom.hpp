#pragma once

#include "acudesk/mesh.hpp"
#include "acudesk/volume.hpp"

namespace acudesk {

/// Cubic volume of n³ voxels whose value is the signed distance to a sphere
/// surface, positive inside: radius_mm − |p − centre|. The iso-surface at 0 is
/// the sphere; trilinear interpolation only blurs it near the centre.
Volume sphere_distance_phantom(int n, double spacing_mm, double radius_mm, const Vec3& origin = Vec3::Zero());

/// Nested spherical shells with CT-like values (air, skin, fat, muscle, bone
/// core) plus a faint sinusoidal texture, centred in an n³ grid.
Volume shells_phantom(int n, double spacing_mm);

/// Linear field value = offset + coeff · world position. Trilinear
/// interpolation reproduces it exactly, which makes it a resampling oracle.
Volume ramp_phantom(Dims dims, const Vec3& spacing, const Vec3& coeff, double offset,
                    const Vec3& origin = Vec3::Zero(), const Mat3& orientation = Mat3::Identity());

/// Closed UV sphere with outward normals and consistent winding.
Mesh sphere_mesh(const Vec3& center, double radius, int stacks = 24, int slices = 48);

/// Closed axis-aligned box with outward-facing triangles.
Mesh box_mesh(const Vec3& min_corner, const Vec3& max_corner);

} // namespace acudesk
