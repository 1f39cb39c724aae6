#pragma once

#include "acudesk/math.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace acudesk {

/// Row-major RGBA image, top row first, float channels in [0,1].
struct Image {
    int width = 0;
    int height = 0;
    std::vector<Rgba> pixels;

    Image() = default;
    Image(int w, int h, Rgba fill = {0.0f, 0.0f, 0.0f, 0.0f})
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

    Rgba& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    const Rgba& at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }

    bool operator==(const Image&) const = default;
};

/// Draws a line between continuous pixel coordinates (pixel centres at +0.5).
void draw_line(Image& image, double x0, double y0, double x1, double y1, const Rgba& color, int thickness = 1);

/// 8-bit RGBA quantisation (round to nearest).
std::vector<std::uint8_t> to_rgba8(const Image& image);

/// Deterministic PNG (8-bit RGBA, fixed zlib settings, no ancillary chunks).
std::vector<std::uint8_t> encode_png(const Image& image);
std::vector<std::uint8_t> encode_ppm(const Image& image);

void write_png(const Image& image, const std::filesystem::path& path);
void write_ppm(const Image& image, const std::filesystem::path& path);

/// Picks PNG or PPM from the file extension (.ppm → P6, otherwise PNG).
void write_image(const Image& image, const std::filesystem::path& path);

} // namespace acudesk
