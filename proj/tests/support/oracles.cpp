#include "oracles.hpp"

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace oracle {
namespace {

struct Writer {
    std::string out;

    void u16(std::uint16_t v) {
        out.push_back(static_cast<char>(v & 0xFF));
        out.push_back(static_cast<char>(v >> 8));
    }
    void u32(std::uint32_t v) {
        u16(static_cast<std::uint16_t>(v & 0xFFFF));
        u16(static_cast<std::uint16_t>(v >> 16));
    }
    void element(std::uint16_t g, std::uint16_t e, const char* vr, std::string value) {
        const std::string v(vr);
        const bool long_form = v == "OB" || v == "OW" || v == "SQ" || v == "UN" || v == "UT";
        if (value.size() % 2) value.push_back(v == "UI" || v == "OB" ? '\0' : ' ');
        u16(g);
        u16(e);
        out += v;
        if (long_form) {
            u16(0);
            u32(static_cast<std::uint32_t>(value.size()));
        } else {
            u16(static_cast<std::uint16_t>(value.size()));
        }
        out += value;
    }
    void us(std::uint16_t g, std::uint16_t e, std::uint16_t v) {
        std::string s(2, '\0');
        s[0] = static_cast<char>(v & 0xFF);
        s[1] = static_cast<char>(v >> 8);
        element(g, e, "US", s);
    }
};

std::string ds(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string triple(const acudesk::Vec3& v) { return ds(v.x()) + "\\" + ds(v.y()) + "\\" + ds(v.z()); }

} // namespace

void write_dicom(const std::filesystem::path& path, const DicomSliceSpec& s) {
    Writer meta;
    meta.element(0x0002, 0x0001, "OB", std::string("\0\1", 2));
    meta.element(0x0002, 0x0002, "UI", "1.2.840.10008.5.1.4.1.1.2");
    meta.element(0x0002, 0x0003, "UI", s.series_uid + ".9");
    meta.element(0x0002, 0x0010, "UI", s.transfer_syntax);

    Writer body;
    body.element(0x0008, 0x0060, "CS", "CT");
    body.element(0x0020, 0x000E, "UI", s.series_uid);
    body.element(0x0020, 0x0032, "DS", triple(s.position));
    body.element(0x0020, 0x0037, "DS", triple(s.row_dir) + "\\" + triple(s.col_dir));
    body.us(0x0028, 0x0002, 1);
    body.us(0x0028, 0x0010, static_cast<std::uint16_t>(s.rows));
    body.us(0x0028, 0x0011, static_cast<std::uint16_t>(s.columns));
    body.element(0x0028, 0x0030, "DS", ds(s.row_spacing) + "\\" + ds(s.column_spacing));
    body.us(0x0028, 0x0100, 16);
    body.us(0x0028, 0x0101, 16);
    body.us(0x0028, 0x0102, 15);
    body.us(0x0028, 0x0103, 1);
    body.element(0x0028, 0x1052, "DS", ds(s.intercept));
    body.element(0x0028, 0x1053, "DS", ds(s.slope));
    std::string px;
    for (std::int16_t v : s.pixels) {
        const auto u = static_cast<std::uint16_t>(v);
        px.push_back(static_cast<char>(u & 0xFF));
        px.push_back(static_cast<char>(u >> 8));
    }
    body.element(0x7FE0, 0x0010, "OW", px);

    Writer group_length;
    std::string gl(4, '\0');
    const auto n = static_cast<std::uint32_t>(meta.out.size());
    for (int i = 0; i < 4; ++i) gl[i] = static_cast<char>((n >> (8 * i)) & 0xFF);
    group_length.element(0x0002, 0x0000, "UL", gl);

    std::ofstream f(path, std::ios::binary);
    f << std::string(128, '\0') << "DICM" << group_length.out << meta.out << body.out;
}

std::filesystem::path temp_dir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    auto dir = std::filesystem::temp_directory_path() / ("acudesk_" + tag + "_" + std::to_string(rng()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace oracle
