#include "acudesk/image.hpp"

#include "acudesk/error.hpp"
#include "detail/zlib_util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

namespace acudesk {
namespace {

std::uint8_t quantize(float v) {
    const float c = std::clamp(v, 0.0f, 1.0f);
    return static_cast<std::uint8_t>(std::lround(c * 255.0f));
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void put_chunk(std::vector<std::uint8_t>& out, const char (&type)[5], const std::vector<std::uint8_t>& data) {
    put_be32(out, static_cast<std::uint32_t>(data.size()));
    const std::size_t start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    const auto crc = detail::crc32_of(std::span<const std::uint8_t>(out).subspan(start));
    put_be32(out, crc);
}

void write_bytes(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

} // namespace

void draw_line(Image& image, double x0, double y0, double x1, double y1, const Rgba& color, int thickness) {
    const double dx = x1 - x0, dy = y1 - y0;
    const double span = std::max(std::abs(dx), std::abs(dy));
    if (!std::isfinite(span)) return;
    // Far off-screen endpoints would otherwise mean billions of steps.
    const int steps = std::clamp(static_cast<int>(std::ceil(std::min(span, 1e6))), 1, 1 << 20);
    const int r = std::max(0, (thickness - 1) / 2);
    for (int s = 0; s <= steps; ++s) {
        const double f = static_cast<double>(s) / steps;
        const int cx = static_cast<int>(std::floor(x0 + f * dx));
        const int cy = static_cast<int>(std::floor(y0 + f * dy));
        for (int oy = -r; oy <= r; ++oy) {
            for (int ox = -r; ox <= r; ++ox) {
                const int x = cx + ox, y = cy + oy;
                if (x >= 0 && y >= 0 && x < image.width && y < image.height) image.at(x, y) = color;
            }
        }
    }
}

std::vector<std::uint8_t> to_rgba8(const Image& image) {
    std::vector<std::uint8_t> out;
    out.reserve(image.pixels.size() * 4);
    for (const auto& p : image.pixels) {
        for (float c : p) out.push_back(quantize(c));
    }
    return out;
}

std::vector<std::uint8_t> encode_png(const Image& image) {
    if (image.width < 1 || image.height < 1) throw Error(ErrorCode::InvalidArgument, "empty image");
    const auto rgba = to_rgba8(image);
    const std::size_t row = static_cast<std::size_t>(image.width) * 4;
    std::vector<std::uint8_t> raw;
    raw.reserve((row + 1) * image.height);
    for (int y = 0; y < image.height; ++y) {
        raw.push_back(0); // filter: none
        raw.insert(raw.end(), rgba.begin() + static_cast<long>(y * row), rgba.begin() + static_cast<long>((y + 1) * row));
    }

    std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
    std::vector<std::uint8_t> ihdr;
    put_be32(ihdr, static_cast<std::uint32_t>(image.width));
    put_be32(ihdr, static_cast<std::uint32_t>(image.height));
    ihdr.insert(ihdr.end(), {8, 6, 0, 0, 0}); // 8-bit RGBA, deflate, adaptive filter, no interlace
    put_chunk(out, "IHDR", ihdr);
    put_chunk(out, "IDAT", detail::deflate_bytes(raw, false, 6));
    put_chunk(out, "IEND", {});
    return out;
}

std::vector<std::uint8_t> encode_ppm(const Image& image) {
    const std::string header =
        "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + image.pixels.size() * 3);
    for (const auto& p : image.pixels) {
        for (int c = 0; c < 3; ++c) out.push_back(quantize(p[c]));
    }
    return out;
}

void write_png(const Image& image, const std::filesystem::path& path) { write_bytes(encode_png(image), path); }

void write_ppm(const Image& image, const std::filesystem::path& path) { write_bytes(encode_ppm(image), path); }

void write_image(const Image& image, const std::filesystem::path& path) {
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".ppm")
        write_ppm(image, path);
    else
        write_png(image, path);
}

} // namespace acudesk
