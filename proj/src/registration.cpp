#include "acudesk/registration.hpp"

#include "acudesk/error.hpp"

#include <cmath>

namespace acudesk {

std::string_view to_string(Landmark l) noexcept {
    switch (l) {
    case Landmark::Left: return "left";
    case Landmark::Right: return "right";
    case Landmark::Top: return "top";
    case Landmark::Bottom: return "bottom";
    case Landmark::Front: return "front";
    case Landmark::Back: return "back";
    }
    return "left";
}

Landmark landmark_from_string(std::string_view s) {
    for (Landmark l : kAllLandmarks) {
        if (to_string(l) == s) return l;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown landmark label '" + std::string(s) + "'");
}

void LandmarkSet::validate() const {
    for (const auto& p : points) {
        if (!p.allFinite()) throw Error(ErrorCode::DegenerateLandmarks, "landmark coordinates must be finite");
    }
    if ((*this)[Landmark::Left] == (*this)[Landmark::Right] || (*this)[Landmark::Top] == (*this)[Landmark::Bottom] ||
        (*this)[Landmark::Front] == (*this)[Landmark::Back])
        throw Error(ErrorCode::DegenerateLandmarks, "opposing landmarks coincide");
}

Vec3 OrientedBox::corner(int i) const {
    Vec3 offset = Vec3::Zero();
    for (int a = 0; a < 3; ++a) {
        const double sign = (i >> a) & 1 ? 1.0 : -1.0;
        offset += sign * half_extents[a] * axes.col(a);
    }
    return center + offset;
}

OrientedBox box_from_landmarks(const LandmarkSet& lms) {
    lms.validate();
    const Vec3 raw[3] = {lms[Landmark::Right] - lms[Landmark::Left], lms[Landmark::Top] - lms[Landmark::Bottom],
                         lms[Landmark::Front] - lms[Landmark::Back]};
    static constexpr const char* names[3] = {"left/right", "top/bottom", "front/back"};
    OrientedBox box;
    for (int a = 0; a < 3; ++a) {
        const double len = raw[a].norm();
        if (len < 1e-6) throw Error(ErrorCode::DegenerateLandmarks, std::string(names[a]) + " axis is shorter than 1e-6 mm");
        Vec3 v = raw[a];
        for (int b = 0; b < a; ++b) v -= v.dot(box.axes.col(b)) * box.axes.col(b);
        // Relative residual: the axis must keep some component off the earlier axes.
        if (v.norm() < 1e-6 * len)
            throw Error(ErrorCode::DegenerateLandmarks, std::string(names[a]) + " axis is parallel to an earlier axis");
        box.axes.col(a) = v.normalized();
        box.half_extents[a] = 0.5 * len;
    }
    Vec3 sum = Vec3::Zero();
    for (const auto& p : lms.points) sum += p;
    box.center = sum / 6.0;
    return box;
}

void SimilarityTransform::validate() const {
    if (std::abs(rotation.norm() - 1.0) > 1e-9 || std::abs(scale_frame.norm() - 1.0) > 1e-9)
        throw Error(ErrorCode::InvalidArgument, "rotation quaternions must be unit length");
    if (!(scale.minCoeff() > 0.0)) throw Error(ErrorCode::InvalidArgument, "scales must be positive");
    if (!translation.allFinite()) throw Error(ErrorCode::InvalidArgument, "translation must be finite");
}

Affine SimilarityTransform::affine() const {
    const Mat3 frame = scale_frame.toRotationMatrix();
    Affine a = Affine::Identity();
    a.linear() = rotation.toRotationMatrix() * frame * scale.asDiagonal() * frame.transpose();
    a.translation() = translation;
    return a;
}

SimilarityTransform align(const LandmarkSet& source, const LandmarkSet& target) {
    const OrientedBox src = box_from_landmarks(source);
    const OrientedBox dst = box_from_landmarks(target);
    const Mat3 rotation = dst.axes * src.axes.transpose();
    if (rotation.determinant() < 0.0)
        throw Error(ErrorCode::DegenerateLandmarks, "landmark sets have opposite handedness (mirror image)");

    SimilarityTransform t;
    t.rotation = Quat(rotation).normalized();
    // A left-handed source frame is stored with its third column flipped;
    // F * diag(s) * Fᵀ does not change under a column sign flip.
    t.scale_frame = Quat(src.axes.determinant() > 0.0 ? src.axes : Mat3(src.axes * Vec3(1, 1, -1).asDiagonal()));
    t.scale_frame.normalize();
    t.scale = dst.half_extents.cwiseQuotient(src.half_extents);
    t.translation = dst.center - t.affine().linear() * src.center;
    if (t.rotation.w() < 0.0) t.rotation.coeffs() *= -1.0;
    return t;
}

Vec3 apply(const SimilarityTransform& t, const Vec3& p) { return t.apply(p); }

Mesh apply(const SimilarityTransform& t, const Mesh& mesh) {
    const Affine a = t.affine();
    Mesh out = mesh;
    for (auto& v : out.vertices) v = a * v;
    if (!out.normals.empty()) {
        const Mat3 normal_matrix = a.linear().inverse().transpose();
        for (auto& n : out.normals) n = (normal_matrix * n).normalized();
    }
    return out;
}

LandmarkSet apply(const SimilarityTransform& t, const LandmarkSet& landmarks) {
    const Affine a = t.affine();
    LandmarkSet out;
    for (std::size_t i = 0; i < 6; ++i) out.points[i] = a * landmarks.points[i];
    return out;
}

Affine apply(const SimilarityTransform& t, const Affine& pose) { return t.affine() * pose; }

std::string_view to_string(LayoutMode m) noexcept {
    return m == LayoutMode::Overlapping ? "overlapping" : "side_by_side";
}

LayoutMode layout_from_string(std::string_view s) {
    if (s == "overlapping") return LayoutMode::Overlapping;
    if (s == "side_by_side") return LayoutMode::SideBySide;
    throw Error(ErrorCode::InvalidArgument, "unknown layout '" + std::string(s) + "'");
}

Affine layout(LayoutMode mode, const SimilarityTransform& t, const OrientedBox& target_box, double gap_mm) {
    if (mode == LayoutMode::Overlapping) return t.affine();
    if (!(gap_mm >= 0.0)) throw Error(ErrorCode::InvalidArgument, "side-by-side gap must be >= 0");
    Affine shift = Affine::Identity();
    shift.translation() = (2.0 * target_box.half_extents[0] + gap_mm) * target_box.axes.col(0);
    return shift * t.affine();
}

} // namespace acudesk
