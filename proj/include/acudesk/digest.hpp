#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>

namespace acudesk {

/// Lower-case hex SHA-256.
std::string sha256_hex(std::span<const std::byte> data);
std::string sha256_hex(const std::string& data);
std::string sha256_file(const std::filesystem::path& path);
/// Files hash their bytes. Directories (DICOM series) hash the sorted list of
/// "name hash" lines of their regular files, so renames count as changes.
std::string sha256_path(const std::filesystem::path& path);

} // namespace acudesk
