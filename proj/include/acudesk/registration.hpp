#pragma once

#include "acudesk/math.hpp"
#include "acudesk/mesh.hpp"

#include <array>
#include <string>
#include <string_view>

namespace acudesk {

enum class Landmark { Left = 0, Right, Top, Bottom, Front, Back };

inline constexpr std::array<Landmark, 6> kAllLandmarks = {Landmark::Left, Landmark::Right, Landmark::Top,
                                                          Landmark::Bottom, Landmark::Front, Landmark::Back};

std::string_view to_string(Landmark l) noexcept;
/// Lower-case label ("left", ...); throws InvalidArgument for anything else.
Landmark landmark_from_string(std::string_view s);

/// Six labelled anatomical landmarks in millimetres.
struct LandmarkSet {
    std::array<Vec3, 6> points{};

    Vec3& operator[](Landmark l) { return points[static_cast<std::size_t>(l)]; }
    const Vec3& operator[](Landmark l) const { return points[static_cast<std::size_t>(l)]; }

    /// Throws DegenerateLandmarks when an opposing pair coincides.
    void validate() const;

    bool operator==(const LandmarkSet&) const = default;
};

struct OrientedBox {
    Vec3 center = Vec3::Zero();
    Mat3 axes = Mat3::Identity(); // columns: left→right, bottom→top, back→front (orthonormalized)
    Vec3 half_extents = Vec3::Ones();

    /// Corner i (0..7): bit 0 selects +axis0, bit 1 +axis1, bit 2 +axis2.
    Vec3 corner(int i) const;
};

/// Raw axes Right−Left, Top−Bottom, Front−Back, Gram–Schmidt in that order;
/// half extents keep the pre-orthonormalization lengths.
OrientedBox box_from_landmarks(const LandmarkSet& landmarks);

/// Maps a source box onto a target box.
///
/// A point p goes to  rotation * F * diag(scale) * Fᵀ * p + translation,
/// where F (`scale_frame`) is the source box frame. `translation` is the
/// total offset, so a pure shift of the landmarks shows up directly there.
struct SimilarityTransform {
    Vec3 translation = Vec3::Zero();
    Quat rotation = Quat::Identity();
    Vec3 scale = Vec3::Ones();
    Quat scale_frame = Quat::Identity();

    static SimilarityTransform identity() { return {}; }

    /// Throws InvalidArgument for non-unit quaternions or non-positive scales.
    void validate() const;

    Affine affine() const;
    Vec3 apply(const Vec3& p) const { return affine() * p; }
};

SimilarityTransform align(const LandmarkSet& source, const LandmarkSet& target);

Vec3 apply(const SimilarityTransform& t, const Vec3& p);
Mesh apply(const SimilarityTransform& t, const Mesh& mesh);
LandmarkSet apply(const SimilarityTransform& t, const LandmarkSet& landmarks);
/// Volumes are never resampled: the transform is composed onto their pose.
Affine apply(const SimilarityTransform& t, const Affine& pose);

enum class LayoutMode { Overlapping, SideBySide };

inline constexpr double kDefaultSideBySideGapMm = 50.0;

std::string_view to_string(LayoutMode m) noexcept;
LayoutMode layout_from_string(std::string_view s);

/// Model pose for the chosen layout. SideBySide appends a shift of one target
/// box width plus `gap_mm` along the target box's first axis.
Affine layout(LayoutMode mode, const SimilarityTransform& t, const OrientedBox& target_box,
              double gap_mm = kDefaultSideBySideGapMm);

} // namespace acudesk
