#pragma once

#include "eegloc/volume.hpp"

#include <cstdint>
#include <vector>

namespace eegloc {

/// Boolean voxel grid sharing a volume's geometry. The set-voxel count is
/// cached and kept in sync by every mutator.
class BinaryMask {
 public:
  BinaryMask() = default;
  explicit BinaryMask(Geometry geom);
  BinaryMask(Geometry geom, std::vector<std::uint8_t> bits);

  const Geometry& geometry() const noexcept { return geometry_; }
  const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }
  std::size_t size() const noexcept { return bits_.size(); }

  bool test(std::size_t idx) const noexcept { return bits_[idx] != 0; }
  bool test(int i, int j, int k) const noexcept {
    return bits_[geometry_.index(i, j, k)] != 0;
  }
  void set(std::size_t idx, bool value) noexcept;

  std::size_t voxel_count() const noexcept { return count_; }
  bool empty() const noexcept { return count_ == 0; }

  bool operator==(const BinaryMask& other) const {
    return geometry_ == other.geometry_ && bits_ == other.bits_;
  }

 private:
  Geometry geometry_;
  std::vector<std::uint8_t> bits_;
  std::size_t count_ = 0;
};

struct MorphologyOptions {
  int workers = 0;
};

/// Otsu threshold over a 256-bin histogram of the finite data range.
/// When several cut points tie, the middle of the tied run is used.
double otsu_threshold(const Volume3D& vol);

/// Voxels with value strictly above `threshold`.
BinaryMask threshold_mask(const Volume3D& vol, double threshold);

/// Largest 26-connected component; ties go to the component met first in
/// linear index order.
BinaryMask largest_component(const BinaryMask& mask);

/// Fills background pockets not reachable from the grid border, first per
/// axial slice (4-connected) then in 3D (6-connected).
BinaryMask fill_holes(const BinaryMask& mask);

/// Squared world distance (mm^2) from every voxel to the nearest set voxel.
/// With `outside_is_set`, voxels beyond the grid count as set.
std::vector<double> squared_distance_map(const BinaryMask& mask, bool outside_is_set,
                                         const MorphologyOptions& opts = {});

/// Voxels within `radius_mm` (world distance between voxel centres) of the
/// set. Outside the grid is background.
BinaryMask dilate(const BinaryMask& mask, double radius_mm,
                  const MorphologyOptions& opts = {});

/// Voxels whose whole `radius_mm` ball lies inside the set; outside the grid
/// is background, so voxels near the border erode.
BinaryMask erode(const BinaryMask& mask, double radius_mm,
                 const MorphologyOptions& opts = {});

/// mask OR erode(dilate(mask, r), r).
BinaryMask close(const BinaryMask& mask, double radius_mm,
                 const MorphologyOptions& opts = {});

/// Otsu -> largest component -> closing (2 voxels) -> hole fill.
BinaryMask extract_head_mask(const Volume3D& t1, const MorphologyOptions& opts = {});

/// dilate(head, outer) AND NOT erode(head, inner).
BinaryMask build_voi_shell(const BinaryMask& head, double outer_margin_mm,
                           double inner_margin_mm, const MorphologyOptions& opts = {});

BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_and_not(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_or(const BinaryMask& a, const BinaryMask& b);
BinaryMask complement(const BinaryMask& m);

/// Nearest-neighbour resampling through world space onto `target`.
BinaryMask resample_nearest(const BinaryMask& mask, const Geometry& target);

/// u8 0/1 volume, for writing masks as NIfTI.
Volume3D mask_to_volume(const BinaryMask& mask);
BinaryMask mask_from_volume(const Volume3D& vol);

/// World-space centroid of the set voxels. Requires a non-empty mask.
WorldPoint mask_centroid(const BinaryMask& mask);

/// True when the set voxels form a single 26-connected component.
bool is_connected(const BinaryMask& mask);

}  // namespace eegloc
