#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace eegloc {

using PointList = std::vector<Eigen::Vector3d>;

/// p -> s * R * p + t, with R a proper rotation and s > 0.
struct SimilarityTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  double scale = 1.0;

  static SimilarityTransform identity() { return {}; }

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return scale * (rotation * p) + translation;
  }
  SimilarityTransform inverse() const;
  /// (*this) after `first`: x -> this(first(x)).
  SimilarityTransform compose(const SimilarityTransform& first) const;

  /// RtR = I and det(R) = +1 within `tol`, s > 0.
  bool is_valid(double tol = 1e-9) const;
};

PointList apply_transform(const SimilarityTransform& t, std::span<const Eigen::Vector3d> pts);

/// Closed-form least-squares similarity (or rigid, when !with_scale)
/// mapping src onto dst. Reflections are corrected so det(R) = +1.
SimilarityTransform umeyama(std::span<const Eigen::Vector3d> src,
                            std::span<const Eigen::Vector3d> dst, bool with_scale);

/// Sum of squared distances |T(src_i) - dst_i|^2.
double sum_squared_residual(const SimilarityTransform& t, std::span<const Eigen::Vector3d> src,
                            std::span<const Eigen::Vector3d> dst);

}  // namespace eegloc
