#include "acudesk/color.hpp"

#include <cmath>

namespace acudesk::color {
namespace {

constexpr double kEpsilon = 216.0 / 24389.0;
constexpr double kKappa = 24389.0 / 27.0;

double f_inv(double t) {
    const double t3 = t * t * t;
    return t3 > kEpsilon ? t3 : (116.0 * t - 16.0) / kKappa;
}

double f(double t) {
    return t > kEpsilon ? std::cbrt(t) : (kKappa * t + 16.0) / 116.0;
}

} // namespace

Vec3 lab_to_linear_srgb(const Lab& lab) {
    const double fy = (lab.l + 16.0) / 116.0;
    const double fx = fy + lab.a / 500.0;
    const double fz = fy - lab.b / 200.0;
    const double x = kWhiteX * f_inv(fx);
    const double y = kWhiteY * (lab.l > kKappa * kEpsilon ? fy * fy * fy : lab.l / kKappa);
    const double z = kWhiteZ * f_inv(fz);
    return {3.2404542 * x - 1.5371385 * y - 0.4985314 * z,
            -0.9692660 * x + 1.8760108 * y + 0.0415560 * z,
            0.0556434 * x - 0.2040259 * y + 1.0572252 * z};
}

Lab linear_srgb_to_lab(const Vec3& rgb) {
    const double x = 0.4124564 * rgb.x() + 0.3575761 * rgb.y() + 0.1804375 * rgb.z();
    const double y = 0.2126729 * rgb.x() + 0.7151522 * rgb.y() + 0.0721750 * rgb.z();
    const double z = 0.0193339 * rgb.x() + 0.1191920 * rgb.y() + 0.9503041 * rgb.z();
    const double fx = f(x / kWhiteX);
    const double fy = f(y / kWhiteY);
    const double fz = f(z / kWhiteZ);
    return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

double srgb_encode(double linear) {
    return linear <= 0.0031308 ? 12.92 * linear : 1.055 * std::pow(linear, 1.0 / 2.4) - 0.055;
}

double srgb_decode(double encoded) {
    return encoded <= 0.04045 ? encoded / 12.92 : std::pow((encoded + 0.055) / 1.055, 2.4);
}

} // namespace acudesk::color
