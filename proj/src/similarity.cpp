#include "eegloc/similarity.hpp"

#include "eegloc/error.hpp"

#include <cmath>
#include <string>

namespace eegloc {

SimilarityTransform SimilarityTransform::inverse() const {
  SimilarityTransform inv;
  inv.rotation = rotation.transpose();
  inv.scale = 1.0 / scale;
  inv.translation = -inv.scale * (inv.rotation * translation);
  return inv;
}

SimilarityTransform SimilarityTransform::compose(const SimilarityTransform& first) const {
  SimilarityTransform out;
  out.rotation = rotation * first.rotation;
  out.scale = scale * first.scale;
  out.translation = scale * (rotation * first.translation) + translation;
  return out;
}

bool SimilarityTransform::is_valid(double tol) const {
  const double orth = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity())
                          .cwiseAbs()
                          .maxCoeff();
  return orth <= tol && std::abs(rotation.determinant() - 1.0) <= tol && scale > 0.0 &&
         std::isfinite(scale) && translation.allFinite();
}

PointList apply_transform(const SimilarityTransform& t, std::span<const Eigen::Vector3d> pts) {
  PointList out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(t.apply(p));
  return out;
}

SimilarityTransform umeyama(std::span<const Eigen::Vector3d> src,
                            std::span<const Eigen::Vector3d> dst, bool with_scale) {
  const char* stage = "umeyama";
  if (src.size() != dst.size()) {
    throw Error(Errc::InvalidArgument, stage,
                "point lists differ in length (" + std::to_string(src.size()) + " vs " +
                    std::to_string(dst.size()) + ")");
  }
  if (src.size() < 3) {
    throw Error(Errc::TooFewPoints, stage,
                "need at least 3 correspondences, got " + std::to_string(src.size()));
  }
  const double n = static_cast<double>(src.size());
  Eigen::Vector3d mu_s = Eigen::Vector3d::Zero(), mu_d = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    mu_s += src[i];
    mu_d += dst[i];
  }
  mu_s /= n;
  mu_d /= n;

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  double var_s = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const Eigen::Vector3d a = src[i] - mu_s;
    cov += (dst[i] - mu_d) * a.transpose();
    var_s += a.squaredNorm();
  }
  cov /= n;
  var_s /= n;

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d sv = svd.singularValues();
  if (!(sv(0) > 0.0) || sv(1) <= 1e-12 * sv(0)) {
    throw Error(Errc::DegenerateConfiguration, stage,
                "cross-covariance has rank < 2 (collinear or coincident points)");
  }
  const Eigen::Matrix3d& u = svd.matrixU();
  const Eigen::Matrix3d& v = svd.matrixV();
  Eigen::Vector3d sign(1.0, 1.0, 1.0);
  if (u.determinant() * v.determinant() < 0.0) sign(2) = -1.0;

  SimilarityTransform t;
  t.rotation = u * sign.asDiagonal() * v.transpose();
  t.scale = with_scale ? sv.dot(sign) / var_s : 1.0;
  t.translation = mu_d - t.scale * (t.rotation * mu_s);
  return t;
}

double sum_squared_residual(const SimilarityTransform& t, std::span<const Eigen::Vector3d> src,
                            std::span<const Eigen::Vector3d> dst) {
  double s = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) s += (t.apply(src[i]) - dst[i]).squaredNorm();
  return s;
}

}  // namespace eegloc
