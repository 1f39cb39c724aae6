#pragma once

// Reference computations that share no code with the library. Each one is
// written from the textbook definition so a bug in src/ cannot hide in both.

#include "acudesk/math.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace oracle {

/// sRGB (8-bit or float, gamma encoded) → CIELAB L*, via IEC 61966-2-1
/// decoding, the sRGB→XYZ matrix derived from the primaries, and CIE 1976
/// lightness. Only Y is needed for L*.
inline double srgb_to_lightness(double r, double g, double b) {
    auto decode = [](double c) { return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4); };
    // Luminance row of the sRGB→XYZ matrix (Rec. 709 primaries, D65).
    const double y = 0.21263900587151027 * decode(r) + 0.715168678767756 * decode(g) + 0.07219231536073371 * decode(b);
    // CIE: L* = 116 f(Y/Yn) - 16 with the exact rational constants.
    const double eps = 216.0 / 24389.0;
    const double kappa = 24389.0 / 27.0;
    return y > eps ? 116.0 * std::cbrt(y) - 16.0 : kappa * y;
}

inline std::array<double, 3> srgb_to_lab(double r, double g, double b) {
    auto decode = [](double c) { return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4); };
    const double R = decode(r), G = decode(g), B = decode(b);
    const double X = 0.41239079926595934 * R + 0.357584339383878 * G + 0.1804807884018343 * B;
    const double Y = 0.21263900587151027 * R + 0.715168678767756 * G + 0.07219231536073371 * B;
    const double Z = 0.01933081871559182 * R + 0.11919477979462598 * G + 0.9505321522496607 * B;
    const double xn = 0.9504559270516716, zn = 1.0890577507598784; // white = matrix · (1,1,1)
    auto f = [](double t) {
        const double d = 6.0 / 29.0;
        return t > d * d * d ? std::cbrt(t) : t / (3 * d * d) + 4.0 / 29.0;
    };
    return {116.0 * f(Y) - 16.0, 500.0 * (f(X / xn) - f(Y)), 200.0 * (f(Y) - f(Z / zn))};
}

/// Population standard deviation.
inline double stddev(const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(v.size()));
}

/// Entry and exit parameters of the segment o + t d, t ∈ [0, len], against an
/// axis-aligned box (slab method, written independently of the library).
inline std::optional<std::pair<double, double>> segment_box(const acudesk::Vec3& o, const acudesk::Vec3& d, double len,
                                                             const acudesk::Vec3& lo, const acudesk::Vec3& hi) {
    double t0 = -1e300, t1 = 1e300;
    for (int a = 0; a < 3; ++a) {
        if (d[a] == 0.0) {
            if (o[a] < lo[a] || o[a] > hi[a]) return std::nullopt;
            continue;
        }
        double ta = (lo[a] - o[a]) / d[a], tb = (hi[a] - o[a]) / d[a];
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
    }
    if (t0 > t1 || t1 < 0.0 || t0 > len) return std::nullopt;
    return std::make_pair(t0, t1);
}

/// Segment against a sphere: roots of |o + t d - c|² = r².
inline std::optional<std::pair<double, double>> ray_sphere(const acudesk::Vec3& o, const acudesk::Vec3& d,
                                                            const acudesk::Vec3& c, double r) {
    const acudesk::Vec3 oc = o - c;
    const double b = oc.dot(d);
    const double disc = b * b - (oc.squaredNorm() - r * r);
    if (disc < 0.0) return std::nullopt;
    const double s = std::sqrt(disc);
    return std::make_pair(-b - s, -b + s);
}

/// Minimal writer for single-frame explicit-VR little-endian images; enough
/// for property tests that need many series with varied geometry.
struct DicomSliceSpec {
    std::string series_uid = "1.2.3";
    int rows = 2;
    int columns = 2;
    double row_spacing = 1.0;
    double column_spacing = 1.0;
    acudesk::Vec3 position = acudesk::Vec3::Zero();
    acudesk::Vec3 row_dir = acudesk::Vec3::UnitX();
    acudesk::Vec3 col_dir = acudesk::Vec3::UnitY();
    std::vector<std::int16_t> pixels; // rows * columns, signed
    double slope = 1.0;
    double intercept = 0.0;
    std::string transfer_syntax = "1.2.840.10008.1.2.1";
};

void write_dicom(const std::filesystem::path& path, const DicomSliceSpec& spec);

/// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& tag);

} // namespace oracle
