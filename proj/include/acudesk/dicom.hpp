#pragma once

#include "acudesk/volume.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace acudesk {

/// Result of a series load. A series whose slice gaps deviate from the
/// median by more than 1% still loads; the deviation is reported here.
struct DicomSeries {
    Volume volume;
    std::vector<std::string> warnings;
    bool non_uniform_spacing = false;
};

/// Loads every DICOM Part-10 file in `dir` as one series. Only uncompressed
/// explicit-VR little-endian single-frame images are accepted.
DicomSeries load_dicom_series(const std::filesystem::path& dir);

/// Decoded subset of one image file; exposed for diagnostics and tests.
struct DicomSlice {
    std::string series_uid;
    std::string modality;
    int rows = 0;
    int columns = 0;
    double row_spacing = 1.0;    // PixelSpacing[0], distance between rows
    double column_spacing = 1.0; // PixelSpacing[1], distance between columns
    double slice_thickness = 0.0;
    Vec3 position = Vec3::Zero();
    Vec3 row_direction = Vec3::UnitX();
    Vec3 column_direction = Vec3::UnitY();
    double slope = 1.0;
    double intercept = 0.0;
    std::vector<float> values; // rescaled, row-major (columns fastest)
};

DicomSlice read_dicom_slice(const std::filesystem::path& file);

} // namespace acudesk
