#pragma once

#include "acudesk/volume.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace acudesk {

struct LoadedVolume {
    Volume volume;
    std::vector<std::string> warnings;
};

/// Directories load as DICOM series, .nrrd/.nhdr files as NRRD. Anything else
/// is UnsupportedFormat; a missing path is IoError naming the path.
LoadedVolume load_volume(const std::filesystem::path& path);

} // namespace acudesk
