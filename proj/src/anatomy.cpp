#include "acudesk/anatomy.hpp"

#include "acudesk/error.hpp"
#include "acudesk/json.hpp"

#include <set>

namespace acudesk {

void AnatomyModel::validate() const {
    if (layers.empty()) throw Error(ErrorCode::InvalidArgument, "anatomy model needs at least one layer");
    std::set<std::string> names;
    for (const auto& l : layers) {
        if (!names.insert(l.name).second) throw Error(ErrorCode::InvalidArgument, "duplicate layer name '" + l.name + "'");
    }
    for (const auto& a : acupoints) {
        if (!(a.tolerance_radius > 0.0))
            throw Error(ErrorCode::InvalidArgument, "acupoint '" + a.name + "' needs a positive tolerance radius");
        if (a.target_layer && !names.contains(*a.target_layer))
            throw Error(ErrorCode::UnknownLayer, "acupoint '" + a.name + "' targets unknown layer '" + *a.target_layer + "'");
    }
}

const AnatomyLayer* AnatomyModel::find_layer(const std::string& layer_name) const {
    for (const auto& l : layers) {
        if (l.name == layer_name) return &l;
    }
    return nullptr;
}

const Acupoint* AnatomyModel::find_acupoint(const std::string& ap_name) const {
    for (const auto& a : acupoints) {
        if (a.name == ap_name) return &a;
    }
    return nullptr;
}

AnatomyModel set_layer_visibility(const AnatomyModel& model, const std::string& layer_name, bool visible) {
    AnatomyModel out = model;
    for (auto& l : out.layers) {
        if (l.name == layer_name) {
            l.visible = visible;
            return out;
        }
    }
    throw Error(ErrorCode::UnknownLayer, "no layer named '" + layer_name + "'");
}

Vec3 acupoint_world_position(const Acupoint& ap, const SimilarityTransform& model_pose) {
    return model_pose.apply(ap.position);
}

Vec3 acupoint_world_position(const Acupoint& ap, const Affine& model_pose) { return model_pose * ap.position; }

std::vector<Acupoint> load_acupoints(const std::filesystem::path& path) {
    const Json j = read_json_file(path);
    if (!j.is_array()) throw Error(ErrorCode::ParseError, path.string() + ": acupoint catalog must be an array");
    std::vector<Acupoint> out;
    for (const auto& e : j) out.push_back(e.get<Acupoint>());
    return out;
}

AnatomyModel load_model_manifest(const std::filesystem::path& manifest) {
    const Json j = read_json_file(manifest);
    const auto dir = manifest.parent_path();
    AnatomyModel m;
    try {
        m.name = j.at("name").get<std::string>();
        for (const auto& l : j.at("layers")) {
            AnatomyLayer layer;
            layer.name = l.at("name").get<std::string>();
            layer.mesh = std::make_shared<const Mesh>(load_mesh(dir / l.at("mesh_path").get<std::string>()));
            if (l.contains("color")) {
                const auto c = l.at("color").get<std::vector<float>>();
                if (c.size() != 3) throw Error(ErrorCode::ParseError, "layer colour must have 3 components");
                layer.color = {c[0], c[1], c[2]};
            }
            layer.visible = l.value("visible", true);
            layer.avoid = l.value("avoid", false);
            m.layers.push_back(std::move(layer));
        }
        if (j.contains("landmarks")) {
            const Json& lm = j.at("landmarks");
            // Either one set keyed by label, or several named sets.
            if (lm.contains("left")) {
                m.landmarks.emplace("default", lm.get<LandmarkSet>());
            } else {
                for (const auto& [set_name, set] : lm.items()) m.landmarks.emplace(set_name, set.get<LandmarkSet>());
            }
        }
        if (j.contains("acupoints_path")) m.acupoints = load_acupoints(dir / j.at("acupoints_path").get<std::string>());
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::ParseError, manifest.string() + ": " + e.what());
    }
    m.validate();
    return m;
}

} // namespace acudesk
