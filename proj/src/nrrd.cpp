#include "acudesk/nrrd.hpp"

#include "acudesk/error.hpp"
#include "detail/zlib_util.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

namespace acudesk {
namespace {

enum class ScalarType { U8, I16, U16, F32 };

std::size_t type_size(ScalarType t) {
    switch (t) {
    case ScalarType::U8: return 1;
    case ScalarType::I16:
    case ScalarType::U16: return 2;
    case ScalarType::F32: return 4;
    }
    return 1;
}

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

[[noreturn]] void parse_fail(int line, const std::string& what) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
}

std::optional<ScalarType> parse_type(const std::string& raw) {
    static const std::map<std::string, ScalarType> names = {
        {"uchar", ScalarType::U8},           {"unsigned char", ScalarType::U8},
        {"uint8", ScalarType::U8},           {"uint8_t", ScalarType::U8},
        {"short", ScalarType::I16},          {"short int", ScalarType::I16},
        {"signed short", ScalarType::I16},   {"signed short int", ScalarType::I16},
        {"int16", ScalarType::I16},          {"int16_t", ScalarType::I16},
        {"ushort", ScalarType::U16},         {"unsigned short", ScalarType::U16},
        {"unsigned short int", ScalarType::U16}, {"uint16", ScalarType::U16},
        {"uint16_t", ScalarType::U16},       {"float", ScalarType::F32},
    };
    auto it = names.find(lower(raw));
    if (it == names.end()) return std::nullopt;
    return it->second;
}

double parse_double(const std::string& tok, int line) {
    // strtod accepts the inf/nan spellings some writers emit.
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (tok.empty() || end != tok.c_str() + tok.size()) parse_fail(line, "bad number '" + tok + "'");
    return v;
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    for (std::string t; is >> t;) out.push_back(t);
    return out;
}

/// Parses "(a,b,c)" vectors, "none" entries rejected.
std::vector<Vec3> parse_vectors(const std::string& s, int line) {
    std::vector<Vec3> out;
    std::size_t pos = 0;
    while (true) {
        pos = s.find_first_not_of(" \t", pos);
        if (pos == std::string::npos) break;
        if (s.compare(pos, 4, "none") == 0)
            throw Error(ErrorCode::UnsupportedFormat, "line " + std::to_string(line) + ": non-spatial axis");
        if (s[pos] != '(') parse_fail(line, "expected '(' in vector list");
        const auto close = s.find(')', pos);
        if (close == std::string::npos) parse_fail(line, "unterminated vector");
        std::string body = s.substr(pos + 1, close - pos - 1);
        std::replace(body.begin(), body.end(), ',', ' ');
        const auto toks = split_ws(body);
        if (toks.size() != 3) parse_fail(line, "vector must have 3 components");
        out.emplace_back(parse_double(toks[0], line), parse_double(toks[1], line), parse_double(toks[2], line));
        pos = close + 1;
    }
    return out;
}

struct Header {
    std::optional<ScalarType> type;
    int dimension = 0;
    std::vector<long> sizes;
    std::vector<Vec3> directions;
    std::vector<double> spacings;
    Vec3 origin = Vec3::Zero();
    bool big_endian = false;
    bool gzip = false;
    bool encoding_seen = false;
    std::string data_file;
    long byte_skip = 0;
    long line_skip = 0;
    Modality modality = Modality::Other;
    int last_line = 0;
};

Header parse_header(std::istream& in, std::size_t& header_bytes) {
    Header h;
    std::string line;
    int lineno = 0;
    header_bytes = 0;
    bool magic = false;
    while (std::getline(in, line)) {
        ++lineno;
        header_bytes += line.size() + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!magic) {
            if (line.rfind("NRRD000", 0) != 0) parse_fail(lineno, "missing NRRD magic");
            magic = true;
            continue;
        }
        if (line.empty()) break;
        if (line[0] == '#') continue;

        const auto kv = line.find(":=");
        if (kv != std::string::npos) {
            if (lower(trim(line.substr(0, kv))) == "modality")
                h.modality = modality_from_string(trim(line.substr(kv + 2)));
            continue;
        }
        const auto colon = line.find(": ");
        if (colon == std::string::npos) parse_fail(lineno, "expected 'field: value'");
        const std::string key = lower(trim(line.substr(0, colon)));
        const std::string value = trim(line.substr(colon + 2));

        if (key == "type") {
            h.type = parse_type(value);
            if (!h.type)
                throw Error(ErrorCode::UnsupportedFormat,
                            "line " + std::to_string(lineno) + ": scalar type '" + value + "'");
        } else if (key == "dimension") {
            h.dimension = static_cast<int>(parse_double(value, lineno));
        } else if (key == "sizes") {
            for (const auto& t : split_ws(value)) {
                const double d = parse_double(t, lineno);
                if (d < 1 || d != std::floor(d)) parse_fail(lineno, "sizes must be positive integers");
                h.sizes.push_back(static_cast<long>(d));
            }
        } else if (key == "space directions") {
            h.directions = parse_vectors(value, lineno);
        } else if (key == "spacings") {
            for (const auto& t : split_ws(value)) h.spacings.push_back(parse_double(t, lineno));
        } else if (key == "space origin") {
            const auto v = parse_vectors(value, lineno);
            if (v.size() != 1) parse_fail(lineno, "space origin must be one vector");
            h.origin = v[0];
        } else if (key == "endian") {
            const auto e = lower(value);
            if (e != "little" && e != "big") parse_fail(lineno, "endian must be little or big");
            h.big_endian = e == "big";
        } else if (key == "encoding") {
            const auto e = lower(value);
            h.encoding_seen = true;
            if (e == "raw") {
                h.gzip = false;
            } else if (e == "gzip" || e == "gz") {
                h.gzip = true;
            } else {
                throw Error(ErrorCode::UnsupportedFormat,
                            "line " + std::to_string(lineno) + ": encoding '" + value + "'");
            }
        } else if (key == "data file" || key == "datafile") {
            h.data_file = value;
        } else if (key == "byte skip" || key == "byteskip") {
            h.byte_skip = static_cast<long>(parse_double(value, lineno));
            if (h.byte_skip < 0) throw Error(ErrorCode::UnsupportedFormat, "byte skip -1 is not supported");
        } else if (key == "line skip" || key == "lineskip") {
            h.line_skip = static_cast<long>(parse_double(value, lineno));
        }
        // Remaining fields (kinds, space, centerings, units, ...) carry no
        // information the volume needs.
    }
    if (!magic) parse_fail(1, "empty file");
    h.last_line = lineno;
    if (!h.type) parse_fail(lineno, "missing 'type'");
    if (h.dimension == 0) parse_fail(lineno, "missing 'dimension'");
    if (h.dimension != 3)
        throw Error(ErrorCode::UnsupportedFormat, "only 3D volumes are supported");
    if (h.sizes.size() != 3) parse_fail(lineno, "'sizes' must list 3 values");
    if (!h.encoding_seen) parse_fail(lineno, "missing 'encoding'");
    if (!h.directions.empty() && h.directions.size() != 3)
        parse_fail(lineno, "'space directions' must list 3 vectors");
    if (h.directions.empty() && !h.spacings.empty() && h.spacings.size() != 3) parse_fail(lineno, "'spacings' must list 3 values");
    return h;
}

template <typename T>
T load_scalar(const std::uint8_t* p, bool swap) {
    T v;
    if (!swap) {
        std::memcpy(&v, p, sizeof(T));
        return v;
    }
    std::uint8_t tmp[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) tmp[i] = p[sizeof(T) - 1 - i];
    std::memcpy(&v, tmp, sizeof(T));
    return v;
}

std::vector<float> decode(const std::vector<std::uint8_t>& bytes, ScalarType type, bool big_endian,
                          std::size_t count) {
    const bool swap = big_endian != (std::endian::native == std::endian::big);
    std::vector<float> out(count);
    const std::size_t sz = type_size(type);
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint8_t* p = bytes.data() + i * sz;
        switch (type) {
        case ScalarType::U8: out[i] = static_cast<float>(*p); break;
        case ScalarType::I16: out[i] = static_cast<float>(load_scalar<std::int16_t>(p, swap)); break;
        case ScalarType::U16: out[i] = static_cast<float>(load_scalar<std::uint16_t>(p, swap)); break;
        case ScalarType::F32: out[i] = load_scalar<float>(p, swap); break;
        }
    }
    return out;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

Volume load_nrrd(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::size_t header_bytes = 0;
    const Header h = parse_header(in, header_bytes);

    std::vector<std::uint8_t> payload;
    if (h.data_file.empty()) {
        payload.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    } else {
        std::filesystem::path data = h.data_file;
        if (data.is_relative()) data = path.parent_path() / data;
        payload = detail::read_file_bytes(data.string());
    }
    // line skip applies to the (decompressed-or-raw) stream start in detached files.
    std::size_t skip_at = 0;
    for (long l = 0; l < h.line_skip; ++l) {
        const auto it = std::find(payload.begin() + static_cast<long>(skip_at), payload.end(), '\n');
        if (it == payload.end()) throw Error(ErrorCode::TruncatedData, "line skip past end of data");
        skip_at = static_cast<std::size_t>(it - payload.begin()) + 1;
    }
    payload.erase(payload.begin(), payload.begin() + static_cast<long>(skip_at));

    if (h.gzip) payload = detail::inflate_any(payload);
    if (h.byte_skip > 0) {
        if (static_cast<std::size_t>(h.byte_skip) > payload.size())
            throw Error(ErrorCode::TruncatedData, "byte skip past end of data");
        payload.erase(payload.begin(), payload.begin() + h.byte_skip);
    }

    const std::size_t count = static_cast<std::size_t>(h.sizes[0]) * h.sizes[1] * h.sizes[2];
    const std::size_t need = count * type_size(*h.type);
    if (payload.size() != need)
        throw Error(ErrorCode::TruncatedData, path.string() + ": header implies " + std::to_string(need) +
                                                  " bytes, payload has " + std::to_string(payload.size()));

    Vec3 spacing = Vec3::Ones();
    Mat3 orientation = Mat3::Identity();
    if (!h.directions.empty()) {
        for (int a = 0; a < 3; ++a) {
            spacing[a] = h.directions[a].norm();
            if (!(spacing[a] > 0.0)) parse_fail(h.last_line, "zero-length space direction");
            orientation.col(a) = h.directions[a] / spacing[a];
        }
        if (!is_orthonormal(orientation, 1e-6)) {
            if (!is_orthonormal(orientation, 1e-3))
                throw Error(ErrorCode::UnsupportedFormat, "sheared space directions are not supported");
            Eigen::JacobiSVD<Mat3> svd(orientation, Eigen::ComputeFullU | Eigen::ComputeFullV);
            orientation = svd.matrixU() * svd.matrixV().transpose();
        }
    } else if (!h.spacings.empty()) {
        spacing = Vec3(h.spacings[0], h.spacings[1], h.spacings[2]);
    }

    return Volume({static_cast<int>(h.sizes[0]), static_cast<int>(h.sizes[1]), static_cast<int>(h.sizes[2])},
                  spacing, h.origin, orientation, decode(payload, *h.type, h.big_endian, count), h.modality);
}

void write_nrrd(const Volume& volume, const std::filesystem::path& path, NrrdEncoding encoding) {
    std::ostringstream hdr;
    const auto& d = volume.dims();
    hdr << "NRRD0004\n"
        << "type: float\n"
        << "dimension: 3\n"
        << "space dimension: 3\n"
        << "sizes: " << d[0] << ' ' << d[1] << ' ' << d[2] << '\n'
        << "space directions:";
    for (int a = 0; a < 3; ++a) {
        const Vec3 dir = volume.orientation().col(a) * volume.spacing()[a];
        hdr << " (" << fmt_double(dir.x()) << ',' << fmt_double(dir.y()) << ',' << fmt_double(dir.z()) << ')';
    }
    const Vec3& o = volume.origin();
    hdr << "\nkinds: domain domain domain\n"
        << "endian: little\n"
        << "encoding: " << (encoding == NrrdEncoding::Gzip ? "gzip" : "raw") << '\n'
        << "space origin: (" << fmt_double(o.x()) << ',' << fmt_double(o.y()) << ',' << fmt_double(o.z()) << ")\n"
        << "modality:=" << to_string(volume.modality()) << "\n\n";

    const auto scalars = volume.scalars();
    std::vector<std::uint8_t> bytes(scalars.size() * sizeof(float));
    std::memcpy(bytes.data(), scalars.data(), bytes.size());
    if constexpr (std::endian::native == std::endian::big) {
        for (std::size_t i = 0; i < bytes.size(); i += 4) std::reverse(bytes.begin() + i, bytes.begin() + i + 4);
    }
    if (encoding == NrrdEncoding::Gzip) bytes = detail::deflate_bytes(bytes, true);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    const std::string header = hdr.str();
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

} // namespace acudesk
