#include "acudesk/dicom.hpp"

#include "acudesk/error.hpp"
#include "detail/zlib_util.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace acudesk {
namespace {

constexpr std::uint32_t tag(std::uint16_t group, std::uint16_t element) {
    return (static_cast<std::uint32_t>(group) << 16) | element;
}

constexpr std::uint32_t kTransferSyntax = tag(0x0002, 0x0010);
constexpr std::uint32_t kModality = tag(0x0008, 0x0060);
constexpr std::uint32_t kSliceThickness = tag(0x0018, 0x0050);
constexpr std::uint32_t kSeriesUid = tag(0x0020, 0x000E);
constexpr std::uint32_t kPosition = tag(0x0020, 0x0032);
constexpr std::uint32_t kOrientation = tag(0x0020, 0x0037);
constexpr std::uint32_t kSamplesPerPixel = tag(0x0028, 0x0002);
constexpr std::uint32_t kNumberOfFrames = tag(0x0028, 0x0008);
constexpr std::uint32_t kRows = tag(0x0028, 0x0010);
constexpr std::uint32_t kColumns = tag(0x0028, 0x0011);
constexpr std::uint32_t kPixelSpacing = tag(0x0028, 0x0030);
constexpr std::uint32_t kBitsAllocated = tag(0x0028, 0x0100);
constexpr std::uint32_t kBitsStored = tag(0x0028, 0x0101);
constexpr std::uint32_t kPixelRepresentation = tag(0x0028, 0x0103);
constexpr std::uint32_t kRescaleIntercept = tag(0x0028, 0x1052);
constexpr std::uint32_t kRescaleSlope = tag(0x0028, 0x1053);
constexpr std::uint32_t kPixelData = tag(0x7FE0, 0x0010);

constexpr std::uint32_t kItem = tag(0xFFFE, 0xE000);
constexpr std::uint32_t kItemDelimitation = tag(0xFFFE, 0xE00D);
constexpr std::uint32_t kSequenceDelimitation = tag(0xFFFE, 0xE0DD);
constexpr std::uint32_t kUndefinedLength = 0xFFFFFFFFu;

constexpr std::string_view kExplicitLittle = "1.2.840.10008.1.2.1";

bool long_form_vr(std::string_view vr) {
    return vr == "OB" || vr == "OD" || vr == "OF" || vr == "OL" || vr == "OV" || vr == "OW" ||
           vr == "SQ" || vr == "SV" || vr == "UC" || vr == "UN" || vr == "UR" || vr == "UT" ||
           vr == "UV";
}

struct Element {
    std::string vr;
    std::span<const std::uint8_t> value;
};

/// Cursor over an explicit-VR little-endian byte stream.
class Reader {
public:
    Reader(std::span<const std::uint8_t> bytes, std::string name) : bytes_(bytes), name_(std::move(name)) {}

    bool done() const { return pos_ >= bytes_.size(); }
    std::size_t pos() const { return pos_; }

    std::uint16_t u16() {
        need(2);
        const std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | bytes_[pos_ + i];
        pos_ += 4;
        return v;
    }
    std::span<const std::uint8_t> take(std::size_t n) {
        need(n);
        auto s = bytes_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    void skip(std::size_t n) { need(n), pos_ += n; }
    std::uint32_t peek_tag() {
        const std::size_t save = pos_;
        const std::uint16_t g = u16();
        const std::uint16_t e = u16();
        pos_ = save;
        return tag(g, e);
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorCode::ParseError, name_ + " @" + std::to_string(pos_) + ": " + what);
    }

private:
    void need(std::size_t n) const {
        if (pos_ + n > bytes_.size())
            throw Error(ErrorCode::TruncatedData, name_ + ": element runs past end of file");
    }

    std::span<const std::uint8_t> bytes_;
    std::string name_;
    std::size_t pos_ = 0;
};

void skip_undefined_sequence(Reader& r);

/// Reads one explicit-VR element header and value. Sequences are skipped.
std::pair<std::uint32_t, Element> read_element(Reader& r) {
    const std::uint16_t g = r.u16();
    const std::uint16_t e = r.u16();
    const std::uint32_t t = tag(g, e);
    if (g == 0xFFFE) r.fail("unexpected item tag at top level");
    const auto vr_bytes = r.take(2);
    std::string vr(reinterpret_cast<const char*>(vr_bytes.data()), 2);
    if (!std::isupper(static_cast<unsigned char>(vr[0])) || !std::isupper(static_cast<unsigned char>(vr[1])))
        r.fail("invalid VR (implicit-VR data is not supported)");
    std::uint32_t len;
    if (long_form_vr(vr)) {
        r.skip(2);
        len = r.u32();
    } else {
        len = r.u16();
    }
    if (len == kUndefinedLength) {
        if (t == kPixelData)
            throw Error(ErrorCode::UnsupportedFormat, "encapsulated (compressed) pixel data");
        skip_undefined_sequence(r);
        return {t, Element{vr, {}}};
    }
    return {t, Element{vr, r.take(len)}};
}

void skip_item_contents(Reader& r) {
    while (!r.done()) {
        if (r.peek_tag() == kItemDelimitation) {
            r.skip(8);
            return;
        }
        read_element(r);
    }
}

void skip_undefined_sequence(Reader& r) {
    while (!r.done()) {
        const std::uint16_t g = r.u16();
        const std::uint16_t e = r.u16();
        const std::uint32_t len = r.u32();
        const std::uint32_t t = tag(g, e);
        if (t == kSequenceDelimitation) return;
        if (t != kItem) r.fail("malformed sequence");
        if (len == kUndefinedLength)
            skip_item_contents(r);
        else
            r.skip(len);
    }
}

std::string as_string(const Element& el) {
    std::string s(reinterpret_cast<const char*>(el.value.data()), el.value.size());
    while (!s.empty() && (s.back() == ' ' || s.back() == '\0')) s.pop_back();
    const auto b = s.find_first_not_of(' ');
    return b == std::string::npos ? std::string() : s.substr(b);
}

std::vector<double> as_decimals(const Element& el, const std::string& what) {
    std::string s = as_string(el);
    std::replace(s.begin(), s.end(), '\\', ' ');
    std::istringstream is(s);
    is.imbue(std::locale::classic());
    std::vector<double> out;
    for (double v; is >> v;) out.push_back(v);
    if (!is.eof()) throw Error(ErrorCode::ParseError, "malformed decimal string in " + what);
    return out;
}

int as_us(const Element& el, const std::string& what) {
    if (el.value.size() < 2) throw Error(ErrorCode::ParseError, "short US value in " + what);
    return el.value[0] | (el.value[1] << 8);
}

} // namespace

DicomSlice read_dicom_slice(const std::filesystem::path& file) {
    const auto bytes = detail::read_file_bytes(file.string());
    const std::string name = file.filename().string();
    if (bytes.size() < 132 || std::memcmp(bytes.data() + 128, "DICM", 4) != 0)
        throw Error(ErrorCode::ParseError, name + ": missing DICM preamble");
    Reader r(std::span<const std::uint8_t>(bytes).subspan(132), name);

    std::map<std::uint32_t, Element> elements;
    while (!r.done()) {
        auto [t, el] = read_element(r);
        elements.emplace(t, el);
        if (t == kTransferSyntax) {
            const auto syntax = as_string(el);
            if (syntax != kExplicitLittle)
                throw Error(ErrorCode::UnsupportedFormat, name + ": transfer syntax " + syntax);
        }
        if (t == kPixelData) break;
    }
    if (!elements.contains(kTransferSyntax))
        throw Error(ErrorCode::ParseError, name + ": missing transfer syntax in file meta");

    auto require = [&](std::uint32_t t, const char* what) -> const Element& {
        auto it = elements.find(t);
        if (it == elements.end()) throw Error(ErrorCode::ParseError, name + ": missing " + what);
        return it->second;
    };
    auto optional_el = [&](std::uint32_t t) -> const Element* {
        auto it = elements.find(t);
        return it == elements.end() ? nullptr : &it->second;
    };

    DicomSlice s;
    if (auto* el = optional_el(kSeriesUid)) s.series_uid = as_string(*el);
    if (auto* el = optional_el(kModality)) s.modality = as_string(*el);
    if (auto* el = optional_el(kSamplesPerPixel); el && as_us(*el, "SamplesPerPixel") != 1)
        throw Error(ErrorCode::UnsupportedFormat, name + ": only single-sample (grayscale) images");
    if (auto* el = optional_el(kNumberOfFrames)) {
        const auto frames = as_decimals(*el, "NumberOfFrames");
        if (!frames.empty() && frames[0] != 1.0)
            throw Error(ErrorCode::UnsupportedFormat, name + ": multi-frame images are not supported");
    }
    s.rows = as_us(require(kRows, "Rows"), "Rows");
    s.columns = as_us(require(kColumns, "Columns"), "Columns");
    const auto spacing = as_decimals(require(kPixelSpacing, "PixelSpacing"), "PixelSpacing");
    const auto position = as_decimals(require(kPosition, "ImagePositionPatient"), "ImagePositionPatient");
    const auto orient = as_decimals(require(kOrientation, "ImageOrientationPatient"), "ImageOrientationPatient");
    if (spacing.size() != 2 || position.size() != 3 || orient.size() != 6)
        throw Error(ErrorCode::ParseError, name + ": wrong multiplicity in geometry tags");
    s.row_spacing = spacing[0];
    s.column_spacing = spacing[1];
    s.position = Vec3(position[0], position[1], position[2]);
    s.row_direction = Vec3(orient[0], orient[1], orient[2]).normalized();
    s.column_direction = Vec3(orient[3], orient[4], orient[5]).normalized();
    if (auto* el = optional_el(kSliceThickness)) {
        const auto v = as_decimals(*el, "SliceThickness");
        if (!v.empty()) s.slice_thickness = v[0];
    }
    if (auto* el = optional_el(kRescaleSlope)) {
        const auto v = as_decimals(*el, "RescaleSlope");
        if (!v.empty()) s.slope = v[0];
    }
    if (auto* el = optional_el(kRescaleIntercept)) {
        const auto v = as_decimals(*el, "RescaleIntercept");
        if (!v.empty()) s.intercept = v[0];
    }

    const int bits = as_us(require(kBitsAllocated, "BitsAllocated"), "BitsAllocated");
    if (bits != 8 && bits != 16)
        throw Error(ErrorCode::UnsupportedFormat, name + ": BitsAllocated " + std::to_string(bits));
    const Element* stored_el = optional_el(kBitsStored);
    const int stored = stored_el ? as_us(*stored_el, "BitsStored") : bits;
    const Element* repr_el = optional_el(kPixelRepresentation);
    const bool is_signed = repr_el && as_us(*repr_el, "PixelRepresentation") == 1;

    const Element& pixels = require(kPixelData, "PixelData");
    const std::size_t count = static_cast<std::size_t>(s.rows) * s.columns;
    const std::size_t need = count * (bits / 8);
    if (pixels.value.size() < need)
        throw Error(ErrorCode::TruncatedData, name + ": pixel data shorter than Rows x Columns");

    s.values.resize(count);
    const std::uint32_t mask = stored >= 32 ? 0xFFFFFFFFu : ((1u << stored) - 1u);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint32_t raw = bits == 8 ? pixels.value[i]
                                      : static_cast<std::uint32_t>(pixels.value[2 * i] | (pixels.value[2 * i + 1] << 8));
        raw &= mask;
        std::int64_t stored_value = raw;
        if (is_signed && (raw & (1u << (stored - 1)))) stored_value -= (std::int64_t{1} << stored);
        s.values[i] = static_cast<float>(static_cast<double>(stored_value) * s.slope + s.intercept);
    }
    return s;
}

DicomSeries load_dicom_series(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw Error(ErrorCode::IoError, "not a directory: " + dir.string());

    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        // Non-Part-10 files (DICOMDIR aside, READMEs, sidecars) are skipped.
        std::ifstream probe(entry.path(), std::ios::binary);
        char buf[132] = {};
        probe.read(buf, sizeof buf);
        if (probe.gcount() == 132 && std::memcmp(buf + 128, "DICM", 4) == 0) files.push_back(entry.path());
    }
    if (files.empty()) throw Error(ErrorCode::ParseError, "no DICOM files in " + dir.string());
    std::sort(files.begin(), files.end());

    std::vector<DicomSlice> slices;
    slices.reserve(files.size());
    for (const auto& f : files) slices.push_back(read_dicom_slice(f));

    const DicomSlice& first = slices.front();
    for (const auto& s : slices) {
        if (s.series_uid != first.series_uid)
            throw Error(ErrorCode::InconsistentSeries,
                        "mixed SeriesInstanceUID '" + first.series_uid + "' and '" + s.series_uid + "'");
        if (s.rows != first.rows || s.columns != first.columns)
            throw Error(ErrorCode::InconsistentSeries, "slices differ in Rows/Columns");
        if ((s.row_direction - first.row_direction).norm() > 1e-4 ||
            (s.column_direction - first.column_direction).norm() > 1e-4)
            throw Error(ErrorCode::InconsistentSeries, "slices differ in ImageOrientationPatient");
    }

    Mat3 orientation;
    orientation.col(0) = first.row_direction;
    orientation.col(1) = first.column_direction;
    orientation.col(2) = first.row_direction.cross(first.column_direction).normalized();
    if (!is_orthonormal(orientation, 1e-6)) {
        // Re-orthogonalise column direction against row direction (DS values are rounded).
        orientation.col(1) = (orientation.col(1) - orientation.col(1).dot(orientation.col(0)) * orientation.col(0)).normalized();
        orientation.col(2) = orientation.col(0).cross(orientation.col(1));
    }
    const Vec3 normal = orientation.col(2);

    // Stable sort with a file-name tiebreak keeps the order independent of
    // directory enumeration.
    std::vector<std::size_t> order(slices.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return slices[a].position.dot(normal) < slices[b].position.dot(normal);
    });

    std::vector<std::string> warnings;

    double slice_spacing = first.slice_thickness > 0.0 ? first.slice_thickness : 1.0;
    if (slices.size() > 1) {
        std::vector<double> gaps;
        for (std::size_t i = 1; i < order.size(); ++i)
            gaps.push_back(slices[order[i]].position.dot(normal) - slices[order[i - 1]].position.dot(normal));
        std::vector<double> sorted = gaps;
        std::sort(sorted.begin(), sorted.end());
        const std::size_t n = sorted.size();
        const double median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
        if (!(median > 0.0))
            throw Error(ErrorCode::InconsistentSeries, "slices share the same position");
        for (std::size_t i = 0; i < gaps.size(); ++i) {
            if (std::abs(gaps[i] - median) > 0.01 * median) {
                std::ostringstream msg;
                msg << "NonUniformSpacing: gap " << gaps[i] << " mm between slices " << i << " and " << i + 1
                    << " differs from median " << median << " mm";
                warnings.push_back(msg.str());
            }
        }
        slice_spacing = median;
    }

    const std::size_t per_slice = static_cast<std::size_t>(first.rows) * first.columns;
    std::vector<float> scalars;
    scalars.reserve(per_slice * slices.size());
    for (std::size_t idx : order) scalars.insert(scalars.end(), slices[idx].values.begin(), slices[idx].values.end());

    Modality modality = modality_from_string(first.modality);
    Volume volume({first.columns, first.rows, static_cast<int>(slices.size())},
                  Vec3(first.column_spacing, first.row_spacing, slice_spacing),
                  slices[order.front()].position, orientation, std::move(scalars), modality);
    const bool non_uniform = !warnings.empty();
    return DicomSeries{std::move(volume), std::move(warnings), non_uniform};
}

} // namespace acudesk
