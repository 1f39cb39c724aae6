#pragma once

#include "acudesk/volume.hpp"

#include <filesystem>

namespace acudesk {

enum class NrrdEncoding { Raw, Gzip };

/// Reads 3D NRRD with an attached header or a detached .nhdr pointing at a
/// data file. Supported types: uint8, int16, uint16, float; raw or gzip.
/// Scalars are converted to float without rescaling.
Volume load_nrrd(const std::filesystem::path& path);

/// Writes an attached-header NRRD holding float scalars. Metadata is printed
/// with round-trip precision, so load_nrrd(write_nrrd(v)) reproduces v.
void write_nrrd(const Volume& volume, const std::filesystem::path& path,
                NrrdEncoding encoding = NrrdEncoding::Raw);

} // namespace acudesk
