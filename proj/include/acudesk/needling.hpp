#pragma once

#include "acudesk/mesh.hpp"
#include "acudesk/plane.hpp"
#include "acudesk/volume.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace acudesk {

inline constexpr std::array<double, 4> kNeedleLengthsMm = {15.0, 25.0, 40.0, 75.0};

/// Straight zero-width needle. `base` is the handle end (V1); the tip (V2)
/// lies length_mm further along `direction`. The skin entry point sits
/// inserted_depth_mm back from the tip.
struct Needle {
    std::string id;
    double length_mm = 40.0;
    Vec3 base = Vec3::Zero();
    Vec3 direction = -Vec3::UnitZ();
    double inserted_depth_mm = 0.0;

    Vec3 tip() const { return base + length_mm * direction; }
    Vec3 skin_entry() const { return base + (length_mm - inserted_depth_mm) * direction; }

    /// Throws InvalidArgument / InvalidDepth.
    void validate() const;

    bool operator==(const Needle&) const = default;
};

Needle make_needle(std::string id, double length_mm);

/// Places the needle so that depth_mm of it lies beyond skin_entry along
/// direction; the rest of the shaft stays outside.
Needle insert_needle(const Needle& needle, const Vec3& skin_entry, const Vec3& direction, double depth_mm);

/// Closest point on the plane: v − ((v − p)·n) n.
Vec3 project_point_to_plane(const Vec3& v, const SlicingPlane& plane);

struct ProjectedNeedle {
    std::string plane_id;
    Eigen::Vector2d tip_2d = Eigen::Vector2d::Zero();
    Eigen::Vector2d base_2d = Eigen::Vector2d::Zero();
    bool highlight = false;
};

/// Projects tip and base onto the plane and expresses them in plane-local
/// (u, v) millimetres. Highlighted when the tip is within 2·step_mm of the plane.
ProjectedNeedle project_needle(const Needle& needle, const SlicingPlane& plane, double step_mm);

struct LayerCrossing {
    std::string layer;
    double entry_depth_mm = 0.0;
    std::optional<double> exit_depth_mm;

    bool operator==(const LayerCrossing&) const = default;
};

struct TraversalLayer {
    std::string name;
    const Mesh* mesh = nullptr;
    Affine pose = Affine::Identity();
    bool visible = true;
};

struct TraversalVolume {
    const Volume* volume = nullptr;
    double threshold = 0.0;
    double step_mm = 0.5;
    std::string label = "volume";
};

struct TraversalScene {
    std::vector<TraversalLayer> layers;
    std::optional<TraversalVolume> volume;
};

/// Crossings of the inserted segment (skin entry → tip) with every visible
/// layer and with the volume iso-threshold, sorted by entry depth. Depths are
/// measured from the skin entry.
std::vector<LayerCrossing> traverse(const Needle& needle, const TraversalScene& scene);

/// Segment–mesh hit parameters in [0, length] (deduplicated, ascending).
std::vector<double> segment_mesh_hits(const Vec3& origin, const Vec3& direction, double length, const Mesh& mesh,
                                      const Affine& pose);

inline constexpr double kThreadingMaxAngleDeg = 30.0;

struct ScoreOptions {
    std::optional<double> max_safe_depth;
    std::vector<std::string> avoid_layers;
    /// Outward skin normal at the entry point; enables the needle-threading check.
    std::optional<Vec3> skin_normal;
    double threading_max_angle_deg = kThreadingMaxAngleDeg;
};

struct ScoreReport {
    double tip_distance_mm = 0.0;
    bool hit = false;
    bool depth_violation = false;
    std::vector<std::string> forbidden_contacts;
    /// Angle between the needle and the skin tangent plane, when a skin normal was supplied.
    std::optional<double> skin_angle_deg;
    std::optional<bool> threading_ok;
};

ScoreReport score(const Needle& needle, const Vec3& acupoint_world, double tolerance_radius,
                  const std::vector<LayerCrossing>& crossings, const ScoreOptions& options = {});

} // namespace acudesk
