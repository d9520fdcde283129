#pragma once

#include "eegloc/electrode_template.hpp"
#include "eegloc/similarity.hpp"
#include "eegloc/volume.hpp"

#include <map>
#include <span>
#include <vector>

namespace eegloc {

enum class IcpInit {
  // Centroid alignment + RMS-radius scale, tried under the 24 rotations of
  // the cube, both in world axes and between the principal axes of the two
  // point sets (48 seeds). The lowest final residual wins; fits that
  // collapse onto a few candidates are passed over.
  CubeSeeds,
  // Start from IcpOptions::initial only.
  Given,
};

struct IcpOptions {
  int max_iter = 100;
  double tol = 1e-6;
  bool with_scale = true;
  IcpInit init = IcpInit::CubeSeeds;
  SimilarityTransform initial;
  int workers = 1;
};

struct IcpResult {
  SimilarityTransform transform;
  // RMS nearest-neighbour distance (mm) of the template under the transform
  // of each iteration; the last entry belongs to `transform`.
  std::vector<double> residual_history;
  int iterations = 0;
  bool converged = false;
  int seed_index = 0;

  double final_residual() const {
    return residual_history.empty() ? 0.0 : residual_history.back();
  }
};

/// The 24 proper rotations mapping the coordinate axes onto themselves.
/// Index 0 is the identity.
std::vector<Eigen::Matrix3d> cube_rotations();

/// Nearest candidate for each point; ties go to the lower candidate index.
std::vector<std::size_t> nearest_neighbours(std::span<const Eigen::Vector3d> points,
                                            std::span<const Eigen::Vector3d> candidates);

/// Template-to-candidate ICP with per-iteration Umeyama fits. seed_index
/// counts world-axis seeds first, then principal-axis seeds. Stops when
/// the relative change of the residual drops below tol, or at max_iter
/// (converged = false, not an error).
IcpResult icp_register(std::span<const Eigen::Vector3d> template_pts,
                       std::span<const Eigen::Vector3d> candidates, const IcpOptions& opts = {});

/// Similarity mapping the template's five landmarks onto measured ones.
SimilarityTransform fiducial_register(const ElectrodeTemplate& tpl,
                                      const std::map<Fiducial, WorldPoint>& fiducials_mm);

}  // namespace eegloc
