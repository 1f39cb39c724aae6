#include "acudesk/session.hpp"

#include "acudesk/error.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

namespace acudesk {

const SlicingPlane* Session::find_plane(const std::string& plane_id) const {
    for (const auto& p : planes) {
        if (p.id == plane_id) return &p;
    }
    return nullptr;
}

const Needle* Session::find_needle(const std::string& needle_id) const {
    for (const auto& n : needles) {
        if (n.id == needle_id) return &n;
    }
    return nullptr;
}

bool operator==(const Session& a, const Session& b) { return session_to_json(a) == session_to_json(b); }

// ---- commands ---------------------------------------------------------------

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

template <typename T>
auto find_by_id(std::vector<T>& items, const std::string& id) {
    return std::find_if(items.begin(), items.end(), [&](const T& x) { return x.id == id; });
}

[[noreturn]] void unknown_id(const std::string& what, const std::string& id) {
    throw Error(ErrorCode::UnknownId, "no " + what + " with id '" + id + "'");
}

void apply_command(Session& s, const Command& command) {
    std::visit(overloaded{
                   [&](const SetTF& c) {
                       c.tf.validate();
                       s.tf = c.tf;
                   },
                   [&](const AddPlane& c) {
                       c.plane.validate();
                       if (c.plane.id.empty()) throw Error(ErrorCode::InvalidArgument, "plane id must not be empty");
                       if (s.find_plane(c.plane.id))
                           throw Error(ErrorCode::InvalidArgument, "plane id '" + c.plane.id + "' already exists");
                       s.planes.push_back(c.plane);
                   },
                   [&](const MovePlane& c) {
                       auto it = find_by_id(s.planes, c.id);
                       if (it == s.planes.end()) unknown_id("plane", c.id);
                       if (c.normal) {
                           *it = SlicingPlane::from_normal(it->id, it->kind, c.position, *c.normal, it->extent_u,
                                                           it->extent_v, it->resolution_u, it->resolution_v);
                       } else {
                           if (!c.position.allFinite()) throw Error(ErrorCode::InvalidArgument, "plane position must be finite");
                           it->position = c.position;
                       }
                   },
                   [&](const RemovePlane& c) {
                       auto it = find_by_id(s.planes, c.id);
                       if (it == s.planes.end()) unknown_id("plane", c.id);
                       s.planes.erase(it);
                   },
                   [&](const AddNeedle& c) {
                       c.needle.validate();
                       if (c.needle.id.empty()) throw Error(ErrorCode::InvalidArgument, "needle id must not be empty");
                       if (s.find_needle(c.needle.id))
                           throw Error(ErrorCode::InvalidArgument, "needle id '" + c.needle.id + "' already exists");
                       s.needles.push_back(c.needle);
                   },
                   [&](const InsertNeedle& c) {
                       auto it = find_by_id(s.needles, c.id);
                       if (it == s.needles.end()) unknown_id("needle", c.id);
                       *it = insert_needle(*it, c.skin_entry, c.direction, c.depth_mm);
                   },
                   [&](const RemoveNeedle& c) {
                       auto it = find_by_id(s.needles, c.id);
                       if (it == s.needles.end()) unknown_id("needle", c.id);
                       s.needles.erase(it);
                   },
                   [&](const SetLayerVisibility& c) {
                       auto it = s.layer_visibility.find(c.layer);
                       if (it == s.layer_visibility.end())
                           throw Error(ErrorCode::UnknownLayer, "no layer named '" + c.layer + "'");
                       it->second = c.visible;
                   },
                   [&](const SetRegistration& c) {
                       RegistrationState r;
                       if (c.source_landmarks && c.target_landmarks) {
                           r.transform = align(*c.source_landmarks, *c.target_landmarks);
                           r.source_landmarks = c.source_landmarks;
                           r.target_landmarks = c.target_landmarks;
                       } else if (c.transform) {
                           c.transform->validate();
                           r.transform = *c.transform;
                       } else {
                           throw Error(ErrorCode::InvalidArgument,
                                       "SetRegistration needs a transform or source and target landmarks");
                       }
                       s.registration = r;
                   },
                   [&](const SetLayout& c) {
                       if (!(c.gap_mm >= 0.0)) throw Error(ErrorCode::InvalidArgument, "layout gap must be >= 0");
                       s.layout = {c.mode, c.gap_mm};
                   },
                   [&](const SetCamera& c) {
                       c.camera.validate();
                       s.camera = c.camera;
                   },
                   [&](const SetRenderSettings& c) {
                       c.settings.validate();
                       s.render = c.settings;
                   },
               },
               command);
}

} // namespace

std::string command_name(const Command& c) {
    static constexpr const char* names[] = {"SetTF",        "AddPlane",           "MovePlane",       "RemovePlane",
                                            "AddNeedle",    "InsertNeedle",       "RemoveNeedle",    "SetLayerVisibility",
                                            "SetRegistration", "SetLayout",       "SetCamera",       "SetRenderSettings"};
    return names[c.index()];
}

Session mutate(const Session& session, const Command& command, std::optional<std::uint64_t> expected_revision) {
    if (expected_revision && *expected_revision != session.revision)
        throw Error(ErrorCode::Conflict, "expected revision " + std::to_string(*expected_revision) + ", session is at " +
                                             std::to_string(session.revision));
    Session next = session;
    apply_command(next, command);
    next.revision = session.revision + 1;
    return next;
}

Json command_to_json(const Command& command) {
    Json j = std::visit(
        overloaded{
            [](const SetTF& c) { return Json{{"tf", c.tf}}; },
            [](const AddPlane& c) { return Json{{"plane", c.plane}}; },
            [](const MovePlane& c) {
                Json j{{"id", c.id}, {"position", vec_to_json(c.position)}};
                if (c.normal) j["normal"] = vec_to_json(*c.normal);
                return j;
            },
            [](const RemovePlane& c) { return Json{{"id", c.id}}; },
            [](const AddNeedle& c) { return Json{{"needle", c.needle}}; },
            [](const InsertNeedle& c) {
                return Json{{"id", c.id},
                            {"skin_entry", vec_to_json(c.skin_entry)},
                            {"direction", vec_to_json(c.direction)},
                            {"depth_mm", c.depth_mm}};
            },
            [](const RemoveNeedle& c) { return Json{{"id", c.id}}; },
            [](const SetLayerVisibility& c) { return Json{{"layer", c.layer}, {"visible", c.visible}}; },
            [](const SetRegistration& c) {
                Json j = Json::object();
                if (c.transform) j["transform"] = *c.transform;
                if (c.source_landmarks) j["source_landmarks"] = *c.source_landmarks;
                if (c.target_landmarks) j["target_landmarks"] = *c.target_landmarks;
                return j;
            },
            [](const SetLayout& c) { return Json{{"mode", std::string(to_string(c.mode))}, {"gap_mm", c.gap_mm}}; },
            [](const SetCamera& c) { return Json{{"camera", c.camera}}; },
            [](const SetRenderSettings& c) { return Json{{"settings", c.settings}}; },
        },
        command);
    j["type"] = command_name(command);
    return j;
}

Command command_from_json(const Json& j) {
    try {
        const auto type = j.at("type").get<std::string>();
        if (type == "SetTF") return SetTF{j.at("tf").get<TransferFunction1D>()};
        if (type == "AddPlane") return AddPlane{j.at("plane").get<SlicingPlane>()};
        if (type == "MovePlane") {
            MovePlane c{j.at("id").get<std::string>(), vec_from_json(j.at("position"), "position"), std::nullopt};
            if (j.contains("normal")) c.normal = vec_from_json(j.at("normal"), "normal");
            return c;
        }
        if (type == "RemovePlane") return RemovePlane{j.at("id").get<std::string>()};
        if (type == "AddNeedle") return AddNeedle{j.at("needle").get<Needle>()};
        if (type == "InsertNeedle")
            return InsertNeedle{j.at("id").get<std::string>(), vec_from_json(j.at("skin_entry"), "skin_entry"),
                                vec_from_json(j.at("direction"), "direction"), j.at("depth_mm").get<double>()};
        if (type == "RemoveNeedle") return RemoveNeedle{j.at("id").get<std::string>()};
        if (type == "SetLayerVisibility")
            return SetLayerVisibility{j.at("layer").get<std::string>(), j.at("visible").get<bool>()};
        if (type == "SetRegistration") {
            SetRegistration c;
            if (j.contains("transform")) c.transform = j.at("transform").get<SimilarityTransform>();
            if (j.contains("source_landmarks")) c.source_landmarks = j.at("source_landmarks").get<LandmarkSet>();
            if (j.contains("target_landmarks")) c.target_landmarks = j.at("target_landmarks").get<LandmarkSet>();
            return c;
        }
        if (type == "SetLayout")
            return SetLayout{layout_from_string(j.at("mode").get<std::string>()),
                             j.value("gap_mm", kDefaultSideBySideGapMm)};
        if (type == "SetCamera") return SetCamera{j.at("camera").get<Camera>()};
        if (type == "SetRenderSettings") return SetRenderSettings{j.at("settings").get<RenderSettings>()};
        throw Error(ErrorCode::InvalidArgument, "unknown command type '" + type + "'");
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("malformed command: ") + e.what());
    }
}

// ---- persistence ------------------------------------------------------------

namespace {

Json ref_to_json(const std::optional<ContentRef>& r) {
    if (!r) return nullptr;
    return Json{{"path", r->path}, {"sha256", r->sha256}};
}

std::optional<ContentRef> ref_from_json(const Json& j) {
    if (j.is_null()) return std::nullopt;
    return ContentRef{j.at("path").get<std::string>(), j.at("sha256").get<std::string>()};
}

} // namespace

Json session_to_json(const Session& s) {
    Json reg = nullptr;
    if (s.registration) {
        reg = Json{{"transform", s.registration->transform}};
        if (s.registration->source_landmarks) reg["source_landmarks"] = *s.registration->source_landmarks;
        if (s.registration->target_landmarks) reg["target_landmarks"] = *s.registration->target_landmarks;
    }
    return Json{{"schema_version", kSessionSchemaVersion},
                {"id", s.id},
                {"revision", s.revision},
                {"volume", ref_to_json(s.volume)},
                {"model", ref_to_json(s.model)},
                {"registration", reg},
                {"layout", {{"mode", std::string(to_string(s.layout.mode))}, {"gap_mm", s.layout.gap_mm}}},
                {"planes", s.planes},
                {"needles", s.needles},
                {"layers", s.layer_visibility},
                {"tf", s.tf},
                {"render", s.render},
                {"camera", s.camera}};
}

Session session_from_json(const Json& j) {
    if (!j.is_object()) throw Error(ErrorCode::ParseError, "session must be a JSON object");
    if (!j.contains("schema_version") || !j.at("schema_version").is_number_integer())
        throw Error(ErrorCode::ParseError, "session is missing schema_version");
    const auto version = j.at("schema_version").get<int>();
    if (version != kSessionSchemaVersion)
        throw Error(ErrorCode::UnsupportedVersion, "session schema_version " + std::to_string(version) +
                                                       " (supported: " + std::to_string(kSessionSchemaVersion) + ")");
    try {
        Session s;
        s.id = j.at("id").get<std::string>();
        s.revision = j.at("revision").get<std::uint64_t>();
        s.volume = ref_from_json(j.at("volume"));
        s.model = ref_from_json(j.at("model"));
        if (const Json& reg = j.at("registration"); !reg.is_null()) {
            RegistrationState r;
            r.transform = reg.at("transform").get<SimilarityTransform>();
            if (reg.contains("source_landmarks")) r.source_landmarks = reg.at("source_landmarks").get<LandmarkSet>();
            if (reg.contains("target_landmarks")) r.target_landmarks = reg.at("target_landmarks").get<LandmarkSet>();
            s.registration = r;
        }
        s.layout.mode = layout_from_string(j.at("layout").at("mode").get<std::string>());
        s.layout.gap_mm = j.at("layout").at("gap_mm").get<double>();
        s.planes = j.at("planes").get<std::vector<SlicingPlane>>();
        s.needles = j.at("needles").get<std::vector<Needle>>();
        s.layer_visibility = j.at("layers").get<std::map<std::string, bool>>();
        s.tf = j.at("tf").get<TransferFunction1D>();
        s.render = j.at("render").get<RenderSettings>();
        s.camera = j.at("camera").get<Camera>();
        std::vector<std::string> ids;
        for (const auto& p : s.planes) ids.push_back("plane:" + p.id);
        for (const auto& n : s.needles) ids.push_back("needle:" + n.id);
        std::sort(ids.begin(), ids.end());
        if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
            throw Error(ErrorCode::ParseError, "duplicate plane or needle id");
        return s;
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("malformed session: ") + e.what());
    }
}

void save_session(const Session& s, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << session_to_json(s).dump(2) << '\n';
    if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

Session load_session(const std::filesystem::path& path) { return session_from_json(read_json_file(path)); }

} // namespace acudesk

// ---- construction and derived views ---------------------------------------

namespace acudesk {

Session create_session(std::string id, const Volume& volume, const ContentRef& volume_ref, const AnatomyModel* model,
                       std::optional<ContentRef> model_ref) {
    Session s;
    s.id = std::move(id);
    s.volume = volume_ref;
    s.model = std::move(model_ref);
    const auto [lo, hi] = volume.value_range();
    s.tf = preset_transfer_function("grayscale", lo, hi);
    s.render = default_render_settings(volume);
    const Vec3 extent = volume.spacing().cwiseProduct(
        Vec3(volume.dims()[0] - 1, volume.dims()[1] - 1, volume.dims()[2] - 1));
    s.camera = framing_camera(volume.center(), 0.5 * extent.norm(), 256, 256);
    if (model) {
        for (const auto& layer : model->layers) s.layer_visibility[layer.name] = layer.visible;
    }
    return s;
}

namespace {

OrientedBox volume_box(const Volume& volume) {
    OrientedBox b;
    b.center = volume.center();
    b.axes = volume.orientation();
    for (int a = 0; a < 3; ++a) b.half_extents[a] = 0.5 * volume.spacing()[a] * (volume.dims()[a] - 1);
    return b;
}

Affine pose_for(const Session& s, const Volume* volume) {
    const SimilarityTransform t = s.registration ? s.registration->transform : SimilarityTransform::identity();
    if (s.layout.mode == LayoutMode::Overlapping) return t.affine();
    OrientedBox box;
    if (s.registration && s.registration->target_landmarks) {
        box = box_from_landmarks(*s.registration->target_landmarks);
    } else if (volume) {
        box = volume_box(*volume);
    } else {
        throw Error(ErrorCode::InvalidArgument, "side-by-side layout needs target landmarks or a volume");
    }
    return layout(s.layout.mode, t, box, s.layout.gap_mm);
}

bool layer_visible(const Session& s, const AnatomyLayer& layer) {
    const auto it = s.layer_visibility.find(layer.name);
    return it == s.layer_visibility.end() ? layer.visible : it->second;
}

// Outward face normal of the first triangle of `mesh` that the full needle
// shaft crosses, if any.
std::optional<Vec3> first_face_normal(const Needle& needle, const Mesh& mesh, const Affine& pose) {
    double best = std::numeric_limits<double>::infinity();
    std::optional<Vec3> normal;
    for (const auto& tri : mesh.triangles) {
        const Vec3 a = pose * mesh.vertices[tri[0]];
        const Vec3 b = pose * mesh.vertices[tri[1]];
        const Vec3 c = pose * mesh.vertices[tri[2]];
        Mesh one;
        one.vertices = {a, b, c};
        one.triangles = {{0, 1, 2}};
        const auto hits = segment_mesh_hits(needle.base, needle.direction, needle.length_mm, one, Affine::Identity());
        if (hits.empty() || hits.front() >= best) continue;
        const Vec3 n = (b - a).cross(c - a);
        if (n.norm() == 0.0) continue;
        best = hits.front();
        normal = n.normalized();
    }
    return normal;
}

} // namespace

OrientedBox layout_reference_box(const Session& s, const Volume& volume) {
    if (s.registration && s.registration->target_landmarks) return box_from_landmarks(*s.registration->target_landmarks);
    return volume_box(volume);
}

Affine model_pose(const Session& s, const Volume& volume) { return pose_for(s, &volume); }

Image render_session(const Session& s, const Volume& volume, const AnatomyModel* model, int width, int height,
                     const RenderOptions& options) {
    Camera camera = s.camera;
    camera.width = width;
    camera.height = height;
    Overlays overlays;
    if (model) {
        const Affine pose = model_pose(s, volume);
        for (const auto& layer : model->layers) {
            if (layer.mesh && layer_visible(s, layer)) overlays.meshes.push_back({layer.mesh.get(), pose, layer.color});
        }
        for (const auto& ap : model->acupoints) {
            overlays.points.push_back({acupoint_world_position(ap, pose), {1.0f, 0.2f, 0.2f}, 2});
        }
    }
    for (const auto& n : s.needles) overlays.segments.push_back({n.base, n.tip(), {0.8f, 0.8f, 0.85f}, 1});
    return render(volume, s.tf, s.render, camera, s.planes, overlays, options);
}

Image render_session_slice(const Session& s, const Volume& volume, const std::string& plane_id, int width, int height,
                           bool needles) {
    const SlicingPlane* found = s.find_plane(plane_id);
    if (!found) throw Error(ErrorCode::UnknownId, "no plane with id '" + plane_id + "'");
    SlicingPlane plane = *found;
    if (width > 0) plane.resolution_u = width;
    if (height > 0) plane.resolution_v = height;
    plane.validate();
    Image img = resample_view_plane(volume, plane, s.tf, false);
    if (needles) {
        for (const auto& n : s.needles) {
            const ProjectedNeedle p = project_needle(n, plane, s.render.step_mm);
            const auto a = plane_local_to_pixel(plane, p.base_2d);
            const auto b = plane_local_to_pixel(plane, p.tip_2d);
            const Rgba color = p.highlight ? Rgba{1.0f, 1.0f, 0.0f, 1.0f} : Rgba{0.0f, 1.0f, 1.0f, 1.0f};
            draw_line(img, a.x(), a.y(), b.x(), b.y(), color, p.highlight ? 2 : 1);
        }
    }
    return img;
}

ScoreReport score_session(const Session& s, const Volume* volume, const AnatomyModel& model,
                          const std::string& needle_id, const std::string& acupoint_name) {
    const Needle* needle = s.find_needle(needle_id);
    if (!needle) throw Error(ErrorCode::UnknownId, "no needle with id '" + needle_id + "'");
    const Acupoint* ap = model.find_acupoint(acupoint_name);
    if (!ap) throw Error(ErrorCode::UnknownId, "no acupoint named '" + acupoint_name + "'");

    const Affine pose = pose_for(s, volume);
    TraversalScene scene;
    ScoreOptions options;
    options.max_safe_depth = ap->max_safe_depth;
    for (const auto& layer : model.layers) {
        scene.layers.push_back({layer.name, layer.mesh.get(), pose, layer_visible(s, layer)});
        if (layer.avoid) options.avoid_layers.push_back(layer.name);
    }
    if (!model.layers.empty() && model.layers.front().mesh)
        options.skin_normal = first_face_normal(*needle, *model.layers.front().mesh, pose);
    if (volume) scene.volume = TraversalVolume{volume, s.render.iso_threshold, s.render.step_mm, "volume"};

    const auto crossings = traverse(*needle, scene);
    return score(*needle, acupoint_world_position(*ap, pose), ap->tolerance_radius, crossings, options);
}

} // namespace acudesk
