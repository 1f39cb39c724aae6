#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace acudesk::detail {

/// Inflates zlib or gzip streams (auto-detected). Throws TruncatedData on a
/// damaged or short stream.
std::vector<std::uint8_t> inflate_any(std::span<const std::uint8_t> in);

/// Deterministic deflate: gzip wrapper when `gzip` is set, zlib otherwise.
std::vector<std::uint8_t> deflate_bytes(std::span<const std::uint8_t> in, bool gzip, int level = 6);

std::uint32_t crc32_of(std::span<const std::uint8_t> in, std::uint32_t seed = 0);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);

} // namespace acudesk::detail
