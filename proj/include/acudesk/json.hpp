#pragma once

// nlohmann adapters for the library's value types. Layouts follow the
// session schema in docs/SCHEMA.md.

#include "acudesk/anatomy.hpp"
#include "acudesk/camera.hpp"
#include "acudesk/needling.hpp"
#include "acudesk/plane.hpp"
#include "acudesk/registration.hpp"
#include "acudesk/render.hpp"
#include "acudesk/transfer.hpp"
#include "acudesk/volume.hpp"

#include <json.hpp>

namespace acudesk {

using Json = nlohmann::json;

Json vec_to_json(const Vec3& v);
/// Throws ParseError unless j is a 3-element numeric array.
Vec3 vec_from_json(const Json& j, const char* what = "vector");

void to_json(Json& j, const TransferFunction1D& tf);
void from_json(const Json& j, TransferFunction1D& tf);

void to_json(Json& j, const Camera& c);
void from_json(const Json& j, Camera& c);

void to_json(Json& j, const RenderSettings& s);
void from_json(const Json& j, RenderSettings& s);

void to_json(Json& j, const SlicingPlane& p);
void from_json(const Json& j, SlicingPlane& p);

void to_json(Json& j, const LandmarkSet& l);
void from_json(const Json& j, LandmarkSet& l);

void to_json(Json& j, const SimilarityTransform& t);
void from_json(const Json& j, SimilarityTransform& t);

void to_json(Json& j, const Needle& n);
void from_json(const Json& j, Needle& n);

void to_json(Json& j, const Acupoint& a);
void from_json(const Json& j, Acupoint& a);

void to_json(Json& j, const LayerCrossing& c);
void to_json(Json& j, const ScoreReport& r);
void to_json(Json& j, const ProjectedNeedle& p);
void to_json(Json& j, const Histogram& h);

/// Parses text, mapping syntax errors to ParseError.
Json parse_json(const std::string& text);
Json read_json_file(const std::filesystem::path& path);

} // namespace acudesk
