#pragma once

#include "acudesk/camera.hpp"
#include "acudesk/image.hpp"
#include "acudesk/mesh.hpp"
#include "acudesk/plane.hpp"
#include "acudesk/transfer.hpp"
#include "acudesk/volume.hpp"

#include <optional>
#include <span>
#include <vector>

namespace acudesk {

enum class RenderMethod { DVR, MIP, IsoSurface };

struct RenderSettings {
    RenderMethod method = RenderMethod::DVR;
    double iso_threshold = 0.5;
    double step_mm = 0.5;
    bool lighting_enabled = true;
    double early_termination_alpha = 0.99;
    Rgba background{0.0f, 0.0f, 0.0f, 1.0f};

    /// Throws InvalidArgument; the iso threshold is checked against `volume`
    /// when one is given.
    void validate(const Volume* volume = nullptr) const;

    bool operator==(const RenderSettings&) const = default;
};

/// Settings with step_mm at half the smallest voxel spacing.
RenderSettings default_render_settings(const Volume& volume);

/// Trilinear interpolation at world point p; 0 outside the voxel-centre box.
float sample(const Volume& volume, const Vec3& p);

/// Central-difference gradient in world units at world point p.
Vec3 gradient(const Volume& volume, const Vec3& p);

struct DvrSample {
    Rgba rgba;            // straight colour, step-corrected opacity
    float lighting = 1.0f;
};

/// Front-to-back accumulation. Result colour is premultiplied; alpha is the
/// accumulated opacity. Stops once alpha reaches `early_termination_alpha`.
Rgba composite_dvr(std::span<const DvrSample> samples, double early_termination_alpha = 1.0);

/// Places premultiplied `front` over an opaque or translucent background.
Rgba over_background(const Rgba& front, const Rgba& background);

/// Largest sample, or nullopt for an empty ray.
std::optional<float> mip(std::span<const float> samples);

struct IsoHit {
    Vec3 point;
    Vec3 normal;
    double distance = 0.0; // along the ray
};

/// Entry and exit parameters of a ray against the volume's voxel-centre box.
std::optional<std::pair<double, double>> intersect_volume_box(const Volume& volume, const Ray& ray);

/// First crossing of `threshold` from <= to > along the ray, refined by
/// 8 bisection steps; normal is the normalized gradient (pointing towards
/// lower values). Samples rejected by `cutout_planes` count as background.
std::optional<IsoHit> iso_hit(const Ray& ray, const Volume& volume, double threshold, double step_mm,
                              const std::vector<SlicingPlane>& cutout_planes = {});

struct MeshOverlay {
    const Mesh* mesh = nullptr;
    Affine pose = Affine::Identity();
    Rgb color{0.9f, 0.8f, 0.7f};
};

struct SegmentOverlay {
    Vec3 a;
    Vec3 b;
    Rgb color{0.8f, 0.8f, 0.85f};
    int thickness_px = 1;
};

struct PointOverlay {
    Vec3 position;
    Rgb color{1.0f, 0.2f, 0.2f};
    int radius_px = 2;
};

struct Overlays {
    std::vector<MeshOverlay> meshes;
    std::vector<SegmentOverlay> segments;
    std::vector<PointOverlay> points;
};

struct RenderOptions {
    int tile_size = 32;
    int threads = 0; // 0 → hardware concurrency
};

inline constexpr int kMaxImageSide = 16384;

/// Ray-casts `volume` (DVR, MIP or first-hit iso-surface) through every pixel
/// centre, then rasterises overlays with a depth test against the volume
/// depth. Tiles are evaluated concurrently; each pixel depends only on its
/// own ray, so the output is bitwise independent of the tiling.
Image render(const Volume& volume, const TransferFunction1D& tf, const RenderSettings& settings,
             const Camera& camera, const std::vector<SlicingPlane>& planes = {}, const Overlays& overlays = {},
             const RenderOptions& options = {});

/// Per-pixel view depth (distance along the camera forward axis) written by the
/// volume pass; +inf where the ray found nothing. Exposed for overlay tests.
struct DepthImage {
    int width = 0;
    int height = 0;
    std::vector<float> depth;
};

Image render_with_depth(const Volume& volume, const TransferFunction1D& tf, const RenderSettings& settings,
                        const Camera& camera, const std::vector<SlicingPlane>& planes, const Overlays& overlays,
                        const RenderOptions& options, DepthImage* depth_out);

/// Raw scalars of a view plane: pixel (i, j) samples
/// position + u * axis_u + v * axis_v with u, v at pixel centres spanning the
/// extent symmetrically. Row j = 0 is the +v edge (top of the image).
std::vector<float> resample_plane_scalars(const Volume& volume, const SlicingPlane& plane);

/// World position of the centre of view-plane pixel (i, j).
Vec3 plane_pixel_world(const SlicingPlane& plane, int i, int j);

/// Plane-local (u, v) in mm → fractional pixel coordinates.
Eigen::Vector2d plane_local_to_pixel(const SlicingPlane& plane, const Eigen::Vector2d& uv);

/// View-plane image. Scalars go through the contrast stage; `colorize` picks
/// the colour ramp, otherwise the normalized intensity is shown as gray.
Image resample_view_plane(const Volume& volume, const SlicingPlane& plane, const TransferFunction1D& tf,
                          bool colorize = false);

} // namespace acudesk
