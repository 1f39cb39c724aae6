#include "acudesk/json.hpp"

#include "acudesk/error.hpp"

#include <fstream>
#include <sstream>

namespace acudesk {
namespace {

template <typename T>
std::vector<T> array_of(const Json& j, std::size_t n, const char* what) {
    if (!j.is_array() || j.size() != n)
        throw Error(ErrorCode::ParseError, std::string(what) + " must be an array of " + std::to_string(n) + " numbers");
    std::vector<T> out;
    for (const auto& e : j) {
        if (!e.is_number()) throw Error(ErrorCode::ParseError, std::string(what) + " must contain numbers");
        out.push_back(e.get<T>());
    }
    return out;
}

Json quat_to_json(const Quat& q) { return Json::array({q.w(), q.x(), q.y(), q.z()}); }

Quat quat_from_json(const Json& j, const char* what) {
    const auto v = array_of<double>(j, 4, what);
    return Quat(v[0], v[1], v[2], v[3]);
}

Json vec2_to_json(const Eigen::Vector2d& v) { return Json::array({v.x(), v.y()}); }

std::string method_name(RenderMethod m) {
    switch (m) {
    case RenderMethod::DVR: return "dvr";
    case RenderMethod::MIP: return "mip";
    case RenderMethod::IsoSurface: return "iso";
    }
    return "dvr";
}

RenderMethod method_from_name(const std::string& s) {
    if (s == "dvr") return RenderMethod::DVR;
    if (s == "mip") return RenderMethod::MIP;
    if (s == "iso") return RenderMethod::IsoSurface;
    throw Error(ErrorCode::ParseError, "unknown render method '" + s + "'");
}

} // namespace

Json vec_to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from_json(const Json& j, const char* what) {
    const auto v = array_of<double>(j, 3, what);
    return {v[0], v[1], v[2]};
}

void to_json(Json& j, const TransferFunction1D& tf) {
    Json opacity = Json::array();
    for (const auto& p : tf.opacity_points) opacity.push_back({p.x, p.alpha});
    Json color = Json::array();
    for (const auto& p : tf.color_points) color.push_back({p.x, p.rgb[0], p.rgb[1], p.rgb[2]});
    j = Json{{"contrast",
              {{"min", tf.c_min},
               {"max", tf.c_max},
               {"brightness", tf.c_b},
               {"mode", tf.contrast_mode == ContrastMode::Cutoff ? "cutoff" : "redistribute"}}},
             {"opacity", opacity},
             {"color", color},
             {"preset", tf.preset ? Json(*tf.preset) : Json(nullptr)}};
}

void from_json(const Json& j, TransferFunction1D& tf) {
    TransferFunction1D out;
    const Json& c = j.at("contrast");
    out.c_min = c.at("min").get<double>();
    out.c_max = c.at("max").get<double>();
    out.c_b = c.value("brightness", 0.0);
    const auto mode = c.value("mode", std::string("redistribute"));
    if (mode == "cutoff")
        out.contrast_mode = ContrastMode::Cutoff;
    else if (mode == "redistribute")
        out.contrast_mode = ContrastMode::Redistribute;
    else
        throw Error(ErrorCode::ParseError, "unknown contrast mode '" + mode + "'");
    out.opacity_points.clear();
    for (const auto& p : j.at("opacity")) {
        const auto v = array_of<double>(p, 2, "opacity point");
        out.opacity_points.push_back({v[0], v[1]});
    }
    out.color_points.clear();
    for (const auto& p : j.at("color")) {
        const auto v = array_of<float>(p, 4, "colour point");
        // The abscissa keeps double precision.
        out.color_points.push_back({p[0].get<double>(), {v[1], v[2], v[3]}});
    }
    if (j.contains("preset") && !j.at("preset").is_null()) out.preset = j.at("preset").get<std::string>();
    out.validate();
    tf = std::move(out);
}

void to_json(Json& j, const Camera& c) {
    j = Json{{"position", vec_to_json(c.position)},
             {"target", vec_to_json(c.target)},
             {"up", vec_to_json(c.up)},
             {"fov", c.vertical_fov},
             {"width", c.width},
             {"height", c.height}};
}

void from_json(const Json& j, Camera& c) {
    Camera out;
    out.position = vec_from_json(j.at("position"), "camera position");
    out.target = vec_from_json(j.at("target"), "camera target");
    out.up = vec_from_json(j.at("up"), "camera up");
    out.vertical_fov = j.value("fov", out.vertical_fov);
    out.width = j.value("width", out.width);
    out.height = j.value("height", out.height);
    c = out;
}

void to_json(Json& j, const RenderSettings& s) {
    j = Json{{"method", method_name(s.method)},
             {"iso_threshold", s.iso_threshold},
             {"step_mm", s.step_mm},
             {"lighting", s.lighting_enabled},
             {"early_termination_alpha", s.early_termination_alpha},
             {"background", {s.background[0], s.background[1], s.background[2], s.background[3]}}};
}

void from_json(const Json& j, RenderSettings& s) {
    RenderSettings out;
    out.method = method_from_name(j.value("method", std::string("dvr")));
    out.iso_threshold = j.value("iso_threshold", out.iso_threshold);
    out.step_mm = j.value("step_mm", out.step_mm);
    out.lighting_enabled = j.value("lighting", out.lighting_enabled);
    out.early_termination_alpha = j.value("early_termination_alpha", out.early_termination_alpha);
    if (j.contains("background")) {
        const auto b = array_of<float>(j.at("background"), 4, "background");
        out.background = {b[0], b[1], b[2], b[3]};
    }
    out.validate();
    s = out;
}

void to_json(Json& j, const SlicingPlane& p) {
    j = Json{{"id", p.id},
             {"kind", p.kind == PlaneKind::CutOut ? "cutout" : "view"},
             {"position", vec_to_json(p.position)},
             {"normal", vec_to_json(p.normal)},
             {"axis_u", vec_to_json(p.axis_u)},
             {"axis_v", vec_to_json(p.axis_v)},
             {"extent", {p.extent_u, p.extent_v}},
             {"resolution", {p.resolution_u, p.resolution_v}}};
}

void from_json(const Json& j, SlicingPlane& p) {
    const auto kind = j.at("kind").get<std::string>();
    PlaneKind k;
    if (kind == "cutout")
        k = PlaneKind::CutOut;
    else if (kind == "view")
        k = PlaneKind::View;
    else
        throw Error(ErrorCode::ParseError, "unknown plane kind '" + kind + "'");
    const auto extent = j.contains("extent") ? array_of<double>(j.at("extent"), 2, "extent") : std::vector<double>{100.0, 100.0};
    const auto res = j.contains("resolution") ? array_of<int>(j.at("resolution"), 2, "resolution") : std::vector<int>{256, 256};
    SlicingPlane out;
    if (j.contains("axis_u") && j.contains("axis_v")) {
        out.id = j.at("id").get<std::string>();
        out.kind = k;
        out.position = vec_from_json(j.at("position"), "plane position");
        out.normal = vec_from_json(j.at("normal"), "plane normal");
        out.axis_u = vec_from_json(j.at("axis_u"), "plane axis_u");
        out.axis_v = vec_from_json(j.at("axis_v"), "plane axis_v");
        out.extent_u = extent[0];
        out.extent_v = extent[1];
        out.resolution_u = res[0];
        out.resolution_v = res[1];
        out.validate();
    } else {
        out = SlicingPlane::from_normal(j.at("id").get<std::string>(), k, vec_from_json(j.at("position"), "plane position"),
                                        vec_from_json(j.at("normal"), "plane normal"), extent[0], extent[1], res[0], res[1]);
    }
    p = std::move(out);
}

void to_json(Json& j, const LandmarkSet& l) {
    j = Json::object();
    for (Landmark lm : kAllLandmarks) j[std::string(to_string(lm))] = vec_to_json(l[lm]);
}

void from_json(const Json& j, LandmarkSet& l) {
    LandmarkSet out;
    for (Landmark lm : kAllLandmarks) {
        const std::string key(to_string(lm));
        if (!j.contains(key)) throw Error(ErrorCode::ParseError, "landmark set is missing '" + key + "'");
        out[lm] = vec_from_json(j.at(key), "landmark");
    }
    l = out;
}

void to_json(Json& j, const SimilarityTransform& t) {
    j = Json{{"t", vec_to_json(t.translation)},
             {"q", quat_to_json(t.rotation)},
             {"s", vec_to_json(t.scale)},
             {"f", quat_to_json(t.scale_frame)}};
}

void from_json(const Json& j, SimilarityTransform& t) {
    SimilarityTransform out;
    out.translation = vec_from_json(j.at("t"), "translation");
    out.rotation = quat_from_json(j.at("q"), "rotation");
    out.scale = vec_from_json(j.at("s"), "scale");
    if (j.contains("f")) out.scale_frame = quat_from_json(j.at("f"), "scale frame");
    out.validate();
    t = out;
}

void to_json(Json& j, const Needle& n) {
    j = Json{{"id", n.id},
             {"length_mm", n.length_mm},
             {"base", vec_to_json(n.base)},
             {"dir", vec_to_json(n.direction)},
             {"depth_mm", n.inserted_depth_mm}};
}

void from_json(const Json& j, Needle& n) {
    Needle out;
    out.id = j.at("id").get<std::string>();
    out.length_mm = j.at("length_mm").get<double>();
    out.base = vec_from_json(j.at("base"), "needle base");
    out.direction = vec_from_json(j.at("dir"), "needle direction");
    out.inserted_depth_mm = j.value("depth_mm", 0.0);
    out.validate();
    n = std::move(out);
}

void to_json(Json& j, const Acupoint& a) {
    j = Json{{"name", a.name}, {"position", vec_to_json(a.position)}, {"tolerance_radius", a.tolerance_radius}};
    if (a.target_layer) j["target_layer"] = *a.target_layer;
    if (a.max_safe_depth) j["max_safe_depth"] = *a.max_safe_depth;
}

void from_json(const Json& j, Acupoint& a) {
    Acupoint out;
    out.name = j.at("name").get<std::string>();
    out.position = vec_from_json(j.at("position"), "acupoint position");
    out.tolerance_radius = j.value("tolerance_radius", kDefaultToleranceRadiusMm);
    if (j.contains("target_layer") && !j.at("target_layer").is_null())
        out.target_layer = j.at("target_layer").get<std::string>();
    if (j.contains("max_safe_depth") && !j.at("max_safe_depth").is_null())
        out.max_safe_depth = j.at("max_safe_depth").get<double>();
    if (!(out.tolerance_radius > 0.0))
        throw Error(ErrorCode::ParseError, "acupoint '" + out.name + "' needs a positive tolerance radius");
    a = std::move(out);
}

void to_json(Json& j, const LayerCrossing& c) {
    j = Json{{"layer", c.layer},
             {"entry_depth_mm", c.entry_depth_mm},
             {"exit_depth_mm", c.exit_depth_mm ? Json(*c.exit_depth_mm) : Json(nullptr)}};
}

void to_json(Json& j, const ScoreReport& r) {
    j = Json{{"tip_distance_mm", r.tip_distance_mm},
             {"hit", r.hit},
             {"depth_violation", r.depth_violation},
             {"forbidden_contacts", r.forbidden_contacts}};
    if (r.skin_angle_deg) j["skin_angle_deg"] = *r.skin_angle_deg;
    if (r.threading_ok) j["threading_ok"] = *r.threading_ok;
}

void to_json(Json& j, const ProjectedNeedle& p) {
    j = Json{{"plane_id", p.plane_id},
             {"tip_2d", vec2_to_json(p.tip_2d)},
             {"base_2d", vec2_to_json(p.base_2d)},
             {"highlight", p.highlight}};
}

void to_json(Json& j, const Histogram& h) {
    j = Json{{"bin_count", h.bin_count}, {"range", {h.range.first, h.range.second}}, {"counts", h.counts}};
}

Json parse_json(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return Json::parse(ss.str());
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
}

} // namespace acudesk
