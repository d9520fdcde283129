#include "eegloc/registration.hpp"

#include "eegloc/error.hpp"
#include "eegloc/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace eegloc {
namespace {

double rms_radius(std::span<const Eigen::Vector3d> pts, const Eigen::Vector3d& centre) {
  double s = 0.0;
  for (const auto& p : pts) s += (p - centre).squaredNorm();
  return std::sqrt(s / static_cast<double>(pts.size()));
}

Eigen::Vector3d centroid(std::span<const Eigen::Vector3d> pts) {
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (const auto& p : pts) c += p;
  return c / static_cast<double>(pts.size());
}

// Eigenvectors of the scatter matrix, ascending eigenvalue, as a proper
// rotation.
Eigen::Matrix3d principal_frame(std::span<const Eigen::Vector3d> pts, const Eigen::Vector3d& c) {
  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (const auto& p : pts) scatter += (p - c) * (p - c).transpose();
  Eigen::Matrix3d e = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(scatter).eigenvectors();
  if (e.determinant() < 0.0) e.col(0) = -e.col(0);
  return e;
}

// A fit that pulls the template onto a handful of candidates can reach a
// lower residual than the true pose; such fits are only used as a last resort.
bool collapsed(const SimilarityTransform& t, std::span<const Eigen::Vector3d> tpl,
               std::span<const Eigen::Vector3d> cand) {
  auto nn = nearest_neighbours(apply_transform(t, tpl), cand);
  std::sort(nn.begin(), nn.end());
  const auto distinct = static_cast<std::size_t>(std::unique(nn.begin(), nn.end()) - nn.begin());
  return 2 * distinct < std::min(tpl.size(), cand.size());
}

struct MatchState {
  std::vector<std::size_t> nn;
  double rms = 0.0;
};

MatchState match(const SimilarityTransform& t, std::span<const Eigen::Vector3d> tpl,
                 std::span<const Eigen::Vector3d> cand) {
  const PointList moved = apply_transform(t, tpl);
  MatchState s;
  s.nn = nearest_neighbours(moved, cand);
  double sum = 0.0;
  for (std::size_t i = 0; i < moved.size(); ++i) sum += (moved[i] - cand[s.nn[i]]).squaredNorm();
  s.rms = std::sqrt(sum / static_cast<double>(moved.size()));
  return s;
}

// One ICP descent. Returns false when an Umeyama fit degenerates.
bool run_icp(std::span<const Eigen::Vector3d> tpl, std::span<const Eigen::Vector3d> cand,
             const IcpOptions& opts, const SimilarityTransform& start, IcpResult& out) {
  out.transform = start;
  out.residual_history.clear();
  out.converged = false;
  out.iterations = 0;
  PointList targets(tpl.size());
  for (int it = 0; it < opts.max_iter; ++it) {
    const MatchState m = match(out.transform, tpl, cand);
    out.residual_history.push_back(m.rms);
    if (it > 0) {
      const double prev = out.residual_history[out.residual_history.size() - 2];
      if (m.rms <= 1e-12 || std::abs(prev - m.rms) <= opts.tol * prev) {
        out.converged = true;
        return true;
      }
    } else if (m.rms <= 1e-12) {
      out.converged = true;
      return true;
    }
    for (std::size_t i = 0; i < tpl.size(); ++i) targets[i] = cand[m.nn[i]];
    try {
      out.transform = umeyama(tpl, targets, opts.with_scale);
    } catch (const Error&) {
      return false;
    }
    out.iterations = it + 1;
  }
  out.residual_history.push_back(match(out.transform, tpl, cand).rms);
  return true;
}

}  // namespace

std::vector<Eigen::Matrix3d> cube_rotations() {
  std::vector<Eigen::Matrix3d> out;
  out.push_back(Eigen::Matrix3d::Identity());
  const int perms[6][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}, {0, 2, 1}, {2, 1, 0}, {1, 0, 2}};
  for (const auto& p : perms) {
    for (int signs = 0; signs < 8; ++signs) {
      Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
      for (int r = 0; r < 3; ++r) m(r, p[r]) = (signs >> r) & 1 ? -1.0 : 1.0;
      if (m.determinant() > 0.0 && !m.isIdentity()) out.push_back(m);
    }
  }
  return out;
}

std::vector<std::size_t> nearest_neighbours(std::span<const Eigen::Vector3d> points,
                                            std::span<const Eigen::Vector3d> candidates) {
  std::vector<std::size_t> nn(points.size(), 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      const double d = (points[i] - candidates[c]).squaredNorm();
      if (d < best) {
        best = d;
        nn[i] = c;
      }
    }
  }
  return nn;
}

IcpResult icp_register(std::span<const Eigen::Vector3d> template_pts,
                       std::span<const Eigen::Vector3d> candidates, const IcpOptions& opts) {
  const char* stage = "icp_register";
  if (candidates.size() < 4) {
    throw Error(Errc::TooFewCandidates, stage,
                "need at least 4 candidates, got " + std::to_string(candidates.size()));
  }
  if (template_pts.size() < 3) {
    throw Error(Errc::TooFewPoints, stage, "template needs at least 3 points");
  }
  if (opts.max_iter <= 0 || !(opts.tol >= 0.0)) {
    throw Error(Errc::InvalidArgument, stage, "max_iter must be > 0 and tol >= 0");
  }

  std::vector<SimilarityTransform> starts;
  if (opts.init == IcpInit::Given) {
    starts.push_back(opts.initial);
  } else {
    const Eigen::Vector3d ct = centroid(template_pts), cc = centroid(candidates);
    const double rt = rms_radius(template_pts, ct);
    if (!(rt > 0.0)) {
      throw Error(Errc::DegenerateConfiguration, stage, "template points coincide");
    }
    const double s0 = opts.with_scale ? rms_radius(candidates, cc) / rt : 1.0;
    const Eigen::Matrix3d ft = principal_frame(template_pts, ct);
    const Eigen::Matrix3d fc = principal_frame(candidates, cc);
    auto add = [&](const Eigen::Matrix3d& q) {
      SimilarityTransform t;
      t.rotation = q;
      t.scale = s0;
      t.translation = cc - s0 * (q * ct);
      starts.push_back(t);
    };
    // cube rotations in the world frame, then between the principal frames
    const auto cube = cube_rotations();
    for (const auto& q : cube) add(q);
    for (const auto& q : cube) add(fc * q * ft.transpose());
  }

  std::vector<IcpResult> results(starts.size());
  std::vector<char> ok(starts.size(), 0);
  parallel_for(starts.size(), opts.workers, [&](std::size_t begin, std::size_t end, int) {
    for (std::size_t s = begin; s < end; ++s) {
      ok[s] = run_icp(template_pts, candidates, opts, starts[s], results[s]);
      results[s].seed_index = static_cast<int>(s);
    }
  });

  std::vector<char> sound(starts.size(), 0);
  for (std::size_t s = 0; s < starts.size(); ++s)
    sound[s] = ok[s] && !collapsed(results[s].transform, template_pts, candidates);
  const bool any_sound = std::find(sound.begin(), sound.end(), 1) != sound.end();
  int best = -1;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    if (!ok[s] || (any_sound && !sound[s])) continue;
    if (best < 0 || results[s].final_residual() < results[best].final_residual()) {
      best = static_cast<int>(s);
    }
  }
  if (best < 0) {
    throw Error(Errc::DegenerateConfiguration, stage,
                "every initialisation collapsed onto degenerate matches");
  }
  return results[best];
}

SimilarityTransform fiducial_register(const ElectrodeTemplate& tpl,
                                      const std::map<Fiducial, WorldPoint>& fiducials_mm) {
  PointList src, dst;
  for (Fiducial f : kAllFiducials) {
    const auto it = fiducials_mm.find(f);
    if (it == fiducials_mm.end()) {
      throw Error(Errc::MissingFiducial, "fiducial_register",
                  std::string("fiducial '") + fiducial_name(f) + "' not provided");
    }
    src.push_back(tpl.fiducial(f));
    dst.push_back(it->second);
  }
  try {
    return umeyama(src, dst, true);
  } catch (const Error& e) {
    throw Error(e.code(), "fiducial_register", e.what());
  }
}

}  // namespace eegloc
