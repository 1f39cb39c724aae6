#include "acudesk/volume.hpp"

#include "acudesk/error.hpp"

#include <algorithm>
#include <cmath>

namespace acudesk {

std::string_view to_string(Modality m) noexcept {
    switch (m) {
    case Modality::CT: return "CT";
    case Modality::MR: return "MR";
    case Modality::Other: return "OTHER";
    }
    return "OTHER";
}

Modality modality_from_string(std::string_view s) noexcept {
    if (s == "CT") return Modality::CT;
    if (s == "MR") return Modality::MR;
    return Modality::Other;
}

Volume::Volume(Dims dims, Vec3 spacing, Vec3 origin, Mat3 orientation,
               std::vector<float> scalars, Modality modality)
    : dims_(dims), spacing_(spacing), origin_(origin), orientation_(orientation),
      scalars_(std::move(scalars)), modality_(modality) {
    for (int d : dims_) {
        if (d < 1) throw Error(ErrorCode::InvalidArgument, "volume dimensions must be >= 1");
    }
    for (int a = 0; a < 3; ++a) {
        if (!(spacing_[a] > 0.0) || !std::isfinite(spacing_[a]))
            throw Error(ErrorCode::InvalidArgument, "volume spacing must be positive");
    }
    if (!is_orthonormal(orientation_, 1e-6))
        throw Error(ErrorCode::InvalidArgument, "volume orientation must be orthonormal");
    const auto expected = static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
    if (scalars_.size() != expected)
        throw Error(ErrorCode::InvalidArgument, "scalar count does not match dimensions");
    const auto [lo, hi] = std::minmax_element(scalars_.begin(), scalars_.end());
    range_ = {*lo, *hi};
}

Vec3 Volume::index_to_world(const Vec3& index) const {
    return origin_ + orientation_ * spacing_.cwiseProduct(index);
}

Vec3 Volume::world_to_index(const Vec3& world) const {
    return (orientation_.transpose() * (world - origin_)).cwiseQuotient(spacing_);
}

Affine Volume::index_to_world_affine() const {
    Affine a = Affine::Identity();
    a.linear() = orientation_ * spacing_.asDiagonal();
    a.translation() = origin_;
    return a;
}

Vec3 Volume::center() const {
    return index_to_world(Vec3((dims_[0] - 1) * 0.5, (dims_[1] - 1) * 0.5, (dims_[2] - 1) * 0.5));
}

Histogram histogram(const Volume& volume, int bins) {
    if (bins < 2) throw Error(ErrorCode::InvalidArgument, "histogram needs at least 2 bins");
    Histogram h;
    h.bin_count = bins;
    const auto [lo, hi] = volume.value_range();
    h.range = {lo, hi};
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    const double width = static_cast<double>(hi) - lo;
    if (width <= 0.0) {
        h.counts[0] = volume.voxel_count();
        return h;
    }
    const double scale = bins / width;
    for (float v : volume.scalars()) {
        auto b = static_cast<long>((static_cast<double>(v) - lo) * scale);
        b = std::clamp<long>(b, 0, bins - 1);
        ++h.counts[static_cast<std::size_t>(b)];
    }
    return h;
}

} // namespace acudesk
