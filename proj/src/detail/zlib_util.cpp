#include "detail/zlib_util.hpp"

#include "acudesk/error.hpp"

#include <zlib.h>

#include <fstream>
#include <iterator>

namespace acudesk::detail {

std::vector<std::uint8_t> inflate_any(std::span<const std::uint8_t> in) {
    z_stream zs{};
    if (inflateInit2(&zs, 15 + 32) != Z_OK)
        throw Error(ErrorCode::IoError, "inflateInit failed");
    zs.next_in = const_cast<Bytef*>(in.data());
    zs.avail_in = static_cast<uInt>(in.size());
    std::vector<std::uint8_t> out;
    std::vector<std::uint8_t> chunk(1 << 16);
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        zs.next_out = chunk.data();
        zs.avail_out = static_cast<uInt>(chunk.size());
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw Error(ErrorCode::TruncatedData, "compressed payload is damaged or truncated");
        }
        out.insert(out.end(), chunk.data(), chunk.data() + (chunk.size() - zs.avail_out));
        if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
            inflateEnd(&zs);
            throw Error(ErrorCode::TruncatedData, "compressed payload ends early");
        }
    }
    inflateEnd(&zs);
    return out;
}

std::vector<std::uint8_t> deflate_bytes(std::span<const std::uint8_t> in, bool gzip, int level) {
    z_stream zs{};
    if (deflateInit2(&zs, level, Z_DEFLATED, gzip ? 15 + 16 : 15, 8, Z_DEFAULT_STRATEGY) != Z_OK)
        throw Error(ErrorCode::IoError, "deflateInit failed");
    std::vector<std::uint8_t> out(deflateBound(&zs, static_cast<uLong>(in.size())) + 32);
    zs.next_in = const_cast<Bytef*>(in.data());
    zs.avail_in = static_cast<uInt>(in.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = deflate(&zs, Z_FINISH);
    deflateEnd(&zs);
    if (rc != Z_STREAM_END) throw Error(ErrorCode::IoError, "deflate failed");
    out.resize(zs.total_out);
    return out;
}

std::uint32_t crc32_of(std::span<const std::uint8_t> in, std::uint32_t seed) {
    return static_cast<std::uint32_t>(crc32(seed, in.data(), static_cast<uInt>(in.size())));
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::IoError, "cannot open " + path);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

} // namespace acudesk::detail
