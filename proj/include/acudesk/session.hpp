#pragma once

#include "acudesk/anatomy.hpp"
#include "acudesk/camera.hpp"
#include "acudesk/json.hpp"
#include "acudesk/needling.hpp"
#include "acudesk/plane.hpp"
#include "acudesk/registration.hpp"
#include "acudesk/render.hpp"
#include "acudesk/transfer.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace acudesk {

inline constexpr int kSessionSchemaVersion = 1;

/// Volume or model referenced by path plus content hash; never embedded.
struct ContentRef {
    std::string path;
    std::string sha256;

    bool operator==(const ContentRef&) const = default;
};

struct RegistrationState {
    SimilarityTransform transform;
    std::optional<LandmarkSet> source_landmarks;
    std::optional<LandmarkSet> target_landmarks;
};

struct LayoutState {
    LayoutMode mode = LayoutMode::Overlapping;
    double gap_mm = kDefaultSideBySideGapMm;
};

/// Complete state of one training scene. Mutated only through mutate(), which
/// bumps `revision` on every successful command.
struct Session {
    std::string id;
    std::optional<ContentRef> volume;
    std::optional<ContentRef> model;
    std::optional<RegistrationState> registration;
    LayoutState layout;
    std::vector<SlicingPlane> planes;
    std::vector<Needle> needles;
    std::map<std::string, bool> layer_visibility;
    TransferFunction1D tf;
    RenderSettings render;
    Camera camera;
    std::uint64_t revision = 0;

    const SlicingPlane* find_plane(const std::string& plane_id) const;
    const Needle* find_needle(const std::string& needle_id) const;
};

/// Field-for-field equality, floats compared exactly.
bool operator==(const Session& a, const Session& b);

// ---- commands ---------------------------------------------------------------

struct SetTF {
    TransferFunction1D tf;
};
struct AddPlane {
    SlicingPlane plane;
};
struct MovePlane {
    std::string id;
    Vec3 position;
    std::optional<Vec3> normal;
};
struct RemovePlane {
    std::string id;
};
struct AddNeedle {
    Needle needle;
};
struct InsertNeedle {
    std::string id;
    Vec3 skin_entry;
    Vec3 direction;
    double depth_mm = 0.0;
};
struct RemoveNeedle {
    std::string id;
};
struct SetLayerVisibility {
    std::string layer;
    bool visible = true;
};
/// Either an explicit transform or two landmark sets to align.
struct SetRegistration {
    std::optional<SimilarityTransform> transform;
    std::optional<LandmarkSet> source_landmarks;
    std::optional<LandmarkSet> target_landmarks;
};
struct SetLayout {
    LayoutMode mode = LayoutMode::Overlapping;
    double gap_mm = kDefaultSideBySideGapMm;
};
struct SetCamera {
    Camera camera;
};
struct SetRenderSettings {
    RenderSettings settings;
};

using Command = std::variant<SetTF, AddPlane, MovePlane, RemovePlane, AddNeedle, InsertNeedle, RemoveNeedle,
                             SetLayerVisibility, SetRegistration, SetLayout, SetCamera, SetRenderSettings>;

std::string command_name(const Command& c);

/// Applies one command to a copy of `session`. On any error the input is
/// untouched and the error propagates (UnknownId, UnknownLayer, InvalidDepth,
/// DegenerateLandmarks, InvalidArgument, ...). When `expected_revision` is
/// given and differs from the session revision, throws Conflict.
Session mutate(const Session& session, const Command& command,
               std::optional<std::uint64_t> expected_revision = std::nullopt);

Json command_to_json(const Command& c);
Command command_from_json(const Json& j);

// ---- persistence ------------------------------------------------------------

Json session_to_json(const Session& s);
/// Throws UnsupportedVersion for schema versions other than 1, ParseError for
/// structural problems.
Session session_from_json(const Json& j);

void save_session(const Session& s, const std::filesystem::path& path);
Session load_session(const std::filesystem::path& path);

// ---- construction and derived views ---------------------------------------

/// Fresh session (revision 0) for a volume and optional model: grayscale
/// preset over the value range, default render settings, a framing camera and
/// every model layer at its manifest visibility.
Session create_session(std::string id, const Volume& volume, const ContentRef& volume_ref,
                       const AnatomyModel* model = nullptr, std::optional<ContentRef> model_ref = std::nullopt);

/// Box used as the side-by-side reference: the target landmark box if one was
/// recorded, otherwise the volume's voxel-centre box.
OrientedBox layout_reference_box(const Session& s, const Volume& volume);

/// World pose of the anatomy model under the session's registration and layout.
Affine model_pose(const Session& s, const Volume& volume);

/// Frame of the session at its current revision with anatomy, needles and
/// acupoints drawn over the volume.
Image render_session(const Session& s, const Volume& volume, const AnatomyModel* model, int width, int height,
                     const RenderOptions& options = {});

/// View-plane image of `plane_id`, optionally with projected needles drawn on it.
/// A zero width or height keeps the plane's own resolution.
Image render_session_slice(const Session& s, const Volume& volume, const std::string& plane_id, int width,
                           int height, bool needles);

/// Scores one needle against a named acupoint of the session's model.
ScoreReport score_session(const Session& s, const Volume* volume, const AnatomyModel& model,
                          const std::string& needle_id, const std::string& acupoint_name);

} // namespace acudesk
