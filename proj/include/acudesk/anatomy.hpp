#pragma once

#include "acudesk/mesh.hpp"
#include "acudesk/registration.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace acudesk {

struct AnatomyLayer {
    std::string name;
    std::shared_ptr<const Mesh> mesh;
    bool visible = true;
    Rgb color{0.9f, 0.8f, 0.7f};
    bool avoid = false; // needle contact counts as a forbidden contact
};

inline constexpr double kDefaultToleranceRadiusMm = 5.0;

struct Acupoint {
    std::string name;
    Vec3 position = Vec3::Zero(); // model space
    double tolerance_radius = kDefaultToleranceRadiusMm;
    std::optional<std::string> target_layer;
    std::optional<double> max_safe_depth;
};

/// Layered surface model (skin → bone → organs ...), outermost layer first.
struct AnatomyModel {
    std::string name;
    std::vector<AnatomyLayer> layers;
    std::map<std::string, LandmarkSet> landmarks;
    std::vector<Acupoint> acupoints;

    /// Throws InvalidArgument on duplicate layer names, an empty layer list or
    /// acupoints that reference unknown layers.
    void validate() const;

    const AnatomyLayer* find_layer(const std::string& name) const;
    const Acupoint* find_acupoint(const std::string& name) const;
};

/// Copy of `model` with one layer's visibility flag changed. Meshes are shared,
/// never copied. Throws UnknownLayer.
AnatomyModel set_layer_visibility(const AnatomyModel& model, const std::string& layer_name, bool visible);

Vec3 acupoint_world_position(const Acupoint& ap, const SimilarityTransform& model_pose);
Vec3 acupoint_world_position(const Acupoint& ap, const Affine& model_pose);

/// Reads {name, layers:[{name, mesh_path, color, avoid?, visible?}], landmarks, acupoints_path}.
/// Paths resolve relative to the manifest directory.
AnatomyModel load_model_manifest(const std::filesystem::path& manifest);

/// Reads a JSON array of {name, position, tolerance_radius?, target_layer?, max_safe_depth?}.
std::vector<Acupoint> load_acupoints(const std::filesystem::path& path);

} // namespace acudesk
