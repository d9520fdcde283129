#pragma once

#include "eegloc/morphology.hpp"
#include "eegloc/volume.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace eegloc {

/// Sphere hypothesis in world mm.
struct SphereCandidate {
  WorldPoint center = WorldPoint::Zero();
  double radius_mm = 0.0;
  std::int64_t score = 0;
  std::size_t voxel = 0;  // linear index of the centre voxel
};

struct HoughParams {
  double r_min_mm = 3.0;
  double r_max_mm = 9.0;
  double r_step_mm = 1.0;
  double grad_threshold_frac = 0.30;
  double nms_min_dist_mm = 10.0;
  int max_candidates = 200;
  // Local maxima scoring below this fraction of the strongest one are not
  // reported. 0 keeps every positive maximum.
  double min_score_frac = 0.10;
  int workers = 0;

  void validate() const;
  std::vector<double> radii() const;
};

/// Per-voxel gradient in mm^-1: central differences over 2*spacing,
/// one-sided at the borders. Components follow the voxel axes.
std::vector<std::array<float, 3>> gradient(const Volume3D& vol);

/// Raw integer vote accumulator on the volume grid.
struct VoteAccumulator {
  std::vector<std::int32_t> votes;
  std::size_t edge_voxels = 0;
  std::size_t radius_count = 0;
  std::size_t out_of_grid = 0;

  std::int64_t total() const;
};

/// Edge selection and gradient-direction voting (both polarities, every
/// radius of the ladder) without smoothing or peak picking.
VoteAccumulator vote_accumulator(const Volume3D& ute, const BinaryMask& voi,
                                 const HoughParams& params);

/// 3x3x3 box sum; voxels beyond the grid contribute zero.
std::vector<std::int32_t> box_sum3(const std::vector<std::int32_t>& acc,
                                   const Geometry& geometry);

/// Spherical Hough detection inside the VOI. Returns candidates sorted by
/// descending score (ties: lower voxel index first), pairwise at least
/// nms_min_dist_mm apart, at most max_candidates of them.
std::vector<SphereCandidate> detect_spheres(const Volume3D& ute, const BinaryMask& voi,
                                            const HoughParams& params);

/// Greedy suppression: sorts by descending score (stable on input order)
/// and keeps a candidate unless a kept one lies closer than min_dist_mm.
std::vector<SphereCandidate> non_max_suppression(std::vector<SphereCandidate> candidates,
                                                 double min_dist_mm);

}  // namespace eegloc
