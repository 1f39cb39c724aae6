#pragma once

#include "acudesk/math.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace acudesk {

enum class ContrastMode { Cutoff, Redistribute };

struct OpacityPoint {
    double x = 0.0; // normalized intensity
    double alpha = 0.0;

    bool operator==(const OpacityPoint&) const = default;
};

struct ColorPoint {
    double x = 0.0;
    Rgb rgb{0.0f, 0.0f, 0.0f};

    bool operator==(const ColorPoint&) const = default;
};

/// Contrast window plus piecewise-linear opacity and colour ramps.
///
/// Raw scalars go through apply_contrast() to a normalized intensity and then
/// through classify(). Control points must start at 0, end at 1 and have
/// strictly increasing abscissae.
struct TransferFunction1D {
    double c_min = 0.0;
    double c_max = 1.0;
    double c_b = 0.0; // brightness offset, accepted in [-1, 1]
    ContrastMode contrast_mode = ContrastMode::Redistribute;
    std::vector<OpacityPoint> opacity_points{{0.0, 0.0}, {1.0, 1.0}};
    std::vector<ColorPoint> color_points{{0.0, {0.0f, 0.0f, 0.0f}}, {1.0, {1.0f, 1.0f, 1.0f}}};
    std::optional<std::string> preset;

    /// Throws InvalidArgument describing the first violated invariant.
    void validate() const;

    bool operator==(const TransferFunction1D&) const = default;
};

/// Cutoff: c_x inside [c_min, c_max], else 0.
/// Redistribute: (clamp(c_x) - c_min) / (c_max - c_min) + c_b, clamped to [0, 1].
double apply_contrast(const TransferFunction1D& tf, double c_x);

/// Value of the contrast stage mapped into [0,1] for the renderer. In Cutoff
/// mode the pass-through value is normalized against `value_range`.
double normalized_intensity(const TransferFunction1D& tf, double c_x, std::pair<double, double> value_range);

Rgba classify(const TransferFunction1D& tf, double intensity_normalized);

struct Lut {
    int resolution = 0;
    std::vector<Rgba> entries;
};

inline constexpr int kDefaultLutResolution = 1024;

Lut build_lut(const TransferFunction1D& tf, int resolution = kDefaultLutResolution);

enum class Preset { Grayscale, Warm, Cool };

/// Throws UnknownPreset for names other than grayscale / warm / cool.
Preset preset_from_name(const std::string& name);
std::string preset_name(Preset p);

/// `steps` sRGB colours whose CIELAB lightness runs evenly from L*=5 to
/// L*=95 at a fixed hue. Out-of-gamut colours lose chroma, not lightness.
std::vector<Rgb> preset_scheme(const std::string& name, int steps);

/// Transfer function whose colour ramp is a preset scheme and whose opacity
/// is a linear ramp.
TransferFunction1D preset_transfer_function(const std::string& name, double c_min, double c_max,
                                            int steps = 16);

} // namespace acudesk
