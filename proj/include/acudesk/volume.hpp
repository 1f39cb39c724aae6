#pragma once

#include "acudesk/math.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace acudesk {

enum class Modality { CT, MR, Other };

std::string_view to_string(Modality m) noexcept;
Modality modality_from_string(std::string_view s) noexcept;

using Dims = std::array<int, 3>;

/// A 3D scalar grid in world millimetres.
///
/// Voxel (i,j,k) sits at origin + orientation * (spacing ⊙ (i,j,k)); scalars
/// are stored x-fastest. Instances are immutable after construction, so a
/// single Volume can be shared by concurrent renderers.
class Volume {
public:
    Volume(Dims dims, Vec3 spacing, Vec3 origin, Mat3 orientation,
           std::vector<float> scalars, Modality modality = Modality::Other);

    const Dims& dims() const noexcept { return dims_; }
    const Vec3& spacing() const noexcept { return spacing_; }
    const Vec3& origin() const noexcept { return origin_; }
    const Mat3& orientation() const noexcept { return orientation_; }
    std::span<const float> scalars() const noexcept { return scalars_; }
    std::pair<float, float> value_range() const noexcept { return range_; }
    Modality modality() const noexcept { return modality_; }

    std::size_t voxel_count() const noexcept { return scalars_.size(); }
    std::size_t linear_index(int i, int j, int k) const noexcept {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(dims_[0]) *
                   (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims_[1]) * k);
    }
    float at(int i, int j, int k) const noexcept { return scalars_[linear_index(i, j, k)]; }

    Vec3 index_to_world(const Vec3& index) const;
    Vec3 world_to_index(const Vec3& world) const;

    /// World-space affine taking continuous voxel indices to millimetres.
    Affine index_to_world_affine() const;

    /// World position of the volume box centre (midpoint of the voxel-centre lattice).
    Vec3 center() const;

private:
    Dims dims_;
    Vec3 spacing_;
    Vec3 origin_;
    Mat3 orientation_;
    std::vector<float> scalars_;
    std::pair<float, float> range_;
    Modality modality_;
};

struct Histogram {
    int bin_count = 0;
    std::pair<double, double> range{0.0, 0.0};
    std::vector<std::uint64_t> counts;
};

/// Uniform bins over the volume's value range; the maximum lands in the last
/// bin and a zero-width range puts every sample in bin 0.
Histogram histogram(const Volume& volume, int bins);

} // namespace acudesk
