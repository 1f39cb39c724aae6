#pragma once

#include "acudesk/math.hpp"

namespace acudesk::color {

/// CIE D65 reference white, Y normalised to 1.
inline constexpr double kWhiteX = 0.95047;
inline constexpr double kWhiteY = 1.0;
inline constexpr double kWhiteZ = 1.08883;

struct Lab {
    double l = 0.0;
    double a = 0.0;
    double b = 0.0;
};

/// Linear-light sRGB (may fall outside [0,1] for out-of-gamut input).
Vec3 lab_to_linear_srgb(const Lab& lab);
Lab linear_srgb_to_lab(const Vec3& rgb);

double srgb_encode(double linear);
double srgb_decode(double encoded);

} // namespace acudesk::color
