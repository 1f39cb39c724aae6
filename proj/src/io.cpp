#include "acudesk/io.hpp"

#include "acudesk/dicom.hpp"
#include "acudesk/error.hpp"
#include "acudesk/nrrd.hpp"

#include <algorithm>
#include <cctype>

namespace acudesk {

LoadedVolume load_volume(const std::filesystem::path& path) {
    namespace fs = std::filesystem;
    if (!fs::exists(path)) throw Error(ErrorCode::IoError, "no such file or directory: " + path.string());
    if (fs::is_directory(path)) {
        auto series = load_dicom_series(path);
        return {std::move(series.volume), std::move(series.warnings)};
    }
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".nrrd" || ext == ".nhdr") return {load_nrrd(path), {}};
    throw Error(ErrorCode::UnsupportedFormat, "unrecognised volume file " + path.string());
}

} // namespace acudesk
