#include "acudesk/transfer.hpp"

#include "acudesk/color.hpp"
#include "acudesk/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace acudesk {
namespace {

template <typename Point>
void validate_points(const std::vector<Point>& points, const char* what) {
    const std::string name(what);
    if (points.size() < 2) throw Error(ErrorCode::InvalidArgument, name + " needs at least two control points");
    if (points.front().x != 0.0 || points.back().x != 1.0)
        throw Error(ErrorCode::InvalidArgument, name + " must start at 0 and end at 1");
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (!(points[i].x > points[i - 1].x))
            throw Error(ErrorCode::InvalidArgument, name + " abscissae must be strictly increasing");
    }
}

bool unit(double v) { return v >= 0.0 && v <= 1.0; }

/// Index i of the segment [x_i, x_{i+1}] containing q, with q in [0,1].
template <typename Point>
std::size_t segment_of(const std::vector<Point>& points, double q) {
    auto it = std::upper_bound(points.begin(), points.end(), q,
                               [](double value, const Point& p) { return value < p.x; });
    const auto idx = static_cast<std::size_t>(std::distance(points.begin(), it));
    return std::clamp<std::size_t>(idx, 1, points.size() - 1) - 1;
}

double lerp_exact(double a, double b, double x0, double x1, double q) {
    if (q == x0) return a;
    if (q == x1) return b;
    const double t = (q - x0) / (x1 - x0);
    return a + (b - a) * t;
}

} // namespace

void TransferFunction1D::validate() const {
    if (!(std::isfinite(c_min) && std::isfinite(c_max) && c_min < c_max))
        throw Error(ErrorCode::InvalidArgument, "contrast limits require c_min < c_max");
    if (!(c_b >= -1.0 && c_b <= 1.0)) throw Error(ErrorCode::InvalidArgument, "brightness must lie in [-1, 1]");
    validate_points(opacity_points, "opacity ramp");
    validate_points(color_points, "colour ramp");
    for (const auto& p : opacity_points) {
        if (!unit(p.alpha)) throw Error(ErrorCode::InvalidArgument, "opacity values must lie in [0, 1]");
    }
    for (const auto& p : color_points) {
        for (float c : p.rgb) {
            if (!unit(c)) throw Error(ErrorCode::InvalidArgument, "colour components must lie in [0, 1]");
        }
    }
}

double apply_contrast(const TransferFunction1D& tf, double c_x) {
    if (tf.contrast_mode == ContrastMode::Cutoff) {
        return (c_x >= tf.c_min && c_x <= tf.c_max) ? c_x : 0.0;
    }
    const double clamped = std::clamp(c_x, tf.c_min, tf.c_max);
    const double v = (clamped - tf.c_min) / (tf.c_max - tf.c_min) + tf.c_b;
    return std::clamp(v, 0.0, 1.0);
}

double normalized_intensity(const TransferFunction1D& tf, double c_x, std::pair<double, double> value_range) {
    if (tf.contrast_mode == ContrastMode::Redistribute) return apply_contrast(tf, c_x);
    if (c_x < tf.c_min || c_x > tf.c_max) return 0.0;
    const double width = value_range.second - value_range.first;
    if (width <= 0.0) return 0.0;
    return std::clamp((c_x - value_range.first) / width, 0.0, 1.0);
}

Rgba classify(const TransferFunction1D& tf, double intensity_normalized) {
    const double q = std::clamp(intensity_normalized, 0.0, 1.0);

    const auto& op = tf.opacity_points;
    const std::size_t oi = segment_of(op, q);
    const double alpha = lerp_exact(op[oi].alpha, op[oi + 1].alpha, op[oi].x, op[oi + 1].x, q);

    const auto& cp = tf.color_points;
    const std::size_t ci = segment_of(cp, q);
    Rgba out{};
    for (int c = 0; c < 3; ++c) {
        out[c] = static_cast<float>(lerp_exact(cp[ci].rgb[c], cp[ci + 1].rgb[c], cp[ci].x, cp[ci + 1].x, q));
    }
    out[3] = static_cast<float>(alpha);
    return out;
}

Lut build_lut(const TransferFunction1D& tf, int resolution) {
    if (resolution < 2) throw Error(ErrorCode::InvalidArgument, "LUT resolution must be at least 2");
    Lut lut;
    lut.resolution = resolution;
    lut.entries.resize(static_cast<std::size_t>(resolution));
    for (int i = 0; i < resolution; ++i) {
        lut.entries[static_cast<std::size_t>(i)] = classify(tf, static_cast<double>(i) / (resolution - 1));
    }
    return lut;
}

Preset preset_from_name(const std::string& name) {
    if (name == "grayscale") return Preset::Grayscale;
    if (name == "warm") return Preset::Warm;
    if (name == "cool") return Preset::Cool;
    throw Error(ErrorCode::UnknownPreset, "unknown preset '" + name + "'");
}

std::string preset_name(Preset p) {
    switch (p) {
    case Preset::Grayscale: return "grayscale";
    case Preset::Warm: return "warm";
    case Preset::Cool: return "cool";
    }
    return "grayscale";
}

namespace {

constexpr double kLightnessMin = 5.0;
constexpr double kLightnessMax = 95.0;
constexpr double kPresetChroma = 40.0;
constexpr double kWarmHueDeg = 60.0;
constexpr double kCoolHueDeg = 250.0;

bool in_gamut(const Vec3& linear) {
    constexpr double tol = 1e-9;
    return linear.minCoeff() >= -tol && linear.maxCoeff() <= 1.0 + tol;
}

/// Largest chroma <= kPresetChroma at (L*, hue) that stays inside sRGB.
Vec3 gamut_mapped(double lightness, double hue_rad, double chroma) {
    auto at = [&](double c) {
        return color::lab_to_linear_srgb({lightness, c * std::cos(hue_rad), c * std::sin(hue_rad)});
    };
    if (in_gamut(at(chroma))) return at(chroma);
    double lo = 0.0;
    double hi = chroma;
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (in_gamut(at(mid)) ? lo : hi) = mid;
    }
    return at(lo);
}

} // namespace

std::vector<Rgb> preset_scheme(const std::string& name, int steps) {
    const Preset preset = preset_from_name(name);
    if (steps < 2) throw Error(ErrorCode::InvalidArgument, "preset scheme needs at least 2 steps");

    double chroma = 0.0;
    double hue = 0.0;
    if (preset == Preset::Warm) {
        chroma = kPresetChroma;
        hue = kWarmHueDeg * std::numbers::pi / 180.0;
    } else if (preset == Preset::Cool) {
        chroma = kPresetChroma;
        hue = kCoolHueDeg * std::numbers::pi / 180.0;
    }

    std::vector<Rgb> out;
    out.reserve(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) {
        const double lightness = kLightnessMin + (kLightnessMax - kLightnessMin) * i / (steps - 1);
        const Vec3 linear = gamut_mapped(lightness, hue, chroma);
        Rgb rgb{};
        for (int c = 0; c < 3; ++c) {
            rgb[c] = static_cast<float>(std::clamp(color::srgb_encode(std::clamp(linear[c], 0.0, 1.0)), 0.0, 1.0));
        }
        out.push_back(rgb);
    }
    return out;
}

TransferFunction1D preset_transfer_function(const std::string& name, double c_min, double c_max, int steps) {
    TransferFunction1D tf;
    tf.c_min = c_min;
    tf.c_max = c_max;
    tf.preset = preset_name(preset_from_name(name));
    const auto colors = preset_scheme(name, steps);
    tf.color_points.clear();
    for (int i = 0; i < steps; ++i) {
        const double x = i == steps - 1 ? 1.0 : static_cast<double>(i) / (steps - 1);
        tf.color_points.push_back({x, colors[static_cast<std::size_t>(i)]});
    }
    tf.opacity_points = {{0.0, 0.0}, {1.0, 1.0}};
    tf.validate();
    return tf;
}

} // namespace acudesk
