#include "eegloc/hough.hpp"

#include "eegloc/error.hpp"
#include "eegloc/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>

namespace eegloc {
namespace {

void require_min_dims(const Geometry& g, const char* stage) {
  for (int d : g.dims()) {
    if (d < 3) {
      throw Error(Errc::VolumeTooSmall, stage,
                  "every axis needs at least 3 voxels, got " + std::to_string(d));
    }
  }
}

Eigen::Vector3d gradient_at(const Volume3D& vol, int i, int j, int k) {
  const Geometry& g = vol.geometry;
  const auto& sp = g.spacing();
  const std::array<int, 3> c{i, j, k};
  Eigen::Vector3d out;
  for (int a = 0; a < 3; ++a) {
    std::array<int, 3> lo = c, hi = c;
    const int n = g.dims()[a];
    double span = 2.0;
    if (c[a] == 0) {
      hi[a] = 1;
      span = 1.0;
    } else if (c[a] == n - 1) {
      lo[a] = n - 2;
      span = 1.0;
    } else {
      lo[a] -= 1;
      hi[a] += 1;
    }
    const double diff = static_cast<double>(vol.at(hi[0], hi[1], hi[2])) -
                        static_cast<double>(vol.at(lo[0], lo[1], lo[2]));
    out[a] = diff / (span * sp[a]);
  }
  return out;
}

struct Edge {
  std::array<int, 3> ijk;
  Eigen::Vector3d step;  // unit gradient expressed in voxels per mm
};

std::vector<Edge> select_edges(const Volume3D& ute, const BinaryMask& voi,
                               double threshold_frac) {
  const Geometry& g = ute.geometry;
  const auto& sp = g.spacing();
  std::vector<std::size_t> members;
  members.reserve(voi.voxel_count());
  for (std::size_t idx = 0; idx < voi.size(); ++idx)
    if (voi.test(idx)) members.push_back(idx);

  std::vector<Eigen::Vector3d> grads(members.size());
  double max_mag = 0.0;
  for (std::size_t m = 0; m < members.size(); ++m) {
    const auto c = g.coords(members[m]);
    grads[m] = gradient_at(ute, c[0], c[1], c[2]);
    max_mag = std::max(max_mag, grads[m].norm());
  }
  std::vector<Edge> edges;
  if (!(max_mag > 0.0)) return edges;
  const double cut = threshold_frac * max_mag;
  for (std::size_t m = 0; m < members.size(); ++m) {
    const double mag = grads[m].norm();
    if (mag < cut || mag == 0.0) continue;
    const Eigen::Vector3d unit = grads[m] / mag;
    edges.push_back({g.coords(members[m]),
                     Eigen::Vector3d(unit.x() / sp[0], unit.y() / sp[1], unit.z() / sp[2])});
  }
  return edges;
}

// Target voxel of a vote, or false when it falls outside the grid. The
// offset is rounded on its own so integer shifts of the input shift every
// vote by exactly the same amount.
bool vote_target(const Geometry& g, const Edge& e, double signed_radius, std::size_t& out) {
  const int i = e.ijk[0] + static_cast<int>(std::lround(signed_radius * e.step.x()));
  const int j = e.ijk[1] + static_cast<int>(std::lround(signed_radius * e.step.y()));
  const int k = e.ijk[2] + static_cast<int>(std::lround(signed_radius * e.step.z()));
  if (!g.contains(i, j, k)) return false;
  out = g.index(i, j, k);
  return true;
}

void check_inputs(const Volume3D& ute, const BinaryMask& voi, const HoughParams& params,
                  const char* stage) {
  params.validate();
  if (!(ute.geometry == voi.geometry())) {
    throw Error(Errc::GeometryMismatch, stage, "UTE volume and VOI differ in geometry");
  }
  require_min_dims(ute.geometry, stage);
  if (voi.empty()) throw Error(Errc::EmptyVoi, stage, "VOI mask has no voxels");
}

VoteAccumulator accumulate(const Volume3D& ute, const std::vector<Edge>& edges,
                           const std::vector<double>& radii, int workers) {
  const Geometry& g = ute.geometry;
  VoteAccumulator acc;
  acc.votes.assign(g.voxel_count(), 0);
  acc.edge_voxels = edges.size();
  acc.radius_count = radii.size();
  std::atomic<std::size_t> dropped{0};
  parallel_for(edges.size(), workers, [&](std::size_t begin, std::size_t end, int) {
    std::size_t local_dropped = 0;
    for (std::size_t e = begin; e < end; ++e) {
      for (double r : radii) {
        for (double sign : {1.0, -1.0}) {
          std::size_t target;
          if (vote_target(g, edges[e], sign * r, target)) {
            std::atomic_ref<std::int32_t>(acc.votes[target])
                .fetch_add(1, std::memory_order_relaxed);
          } else {
            ++local_dropped;
          }
        }
      }
    }
    dropped += local_dropped;
  });
  acc.out_of_grid = dropped.load();
  return acc;
}

bool is_local_max(const std::vector<std::int32_t>& s, const Geometry& g, std::size_t idx) {
  const std::int32_t v = s[idx];
  const auto c = g.coords(idx);
  for (int dk = -1; dk <= 1; ++dk)
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        if (!di && !dj && !dk) continue;
        const int i = c[0] + di, j = c[1] + dj, k = c[2] + dk;
        if (!g.contains(i, j, k)) continue;
        const std::size_t n = g.index(i, j, k);
        if (s[n] > v || (s[n] == v && n < idx)) return false;
      }
  return true;
}

}  // namespace

void HoughParams::validate() const {
  auto fail = [](const std::string& what) {
    throw Error(Errc::InvalidArgument, "hough_params", what);
  };
  if (!(r_min_mm > 0.0) || !(r_max_mm >= r_min_mm)) fail("need 0 < r_min_mm <= r_max_mm");
  if (!(r_step_mm > 0.0)) fail("r_step_mm must be > 0");
  if (!(grad_threshold_frac > 0.0 && grad_threshold_frac < 1.0))
    fail("grad_threshold_frac must lie in (0, 1)");
  if (!(nms_min_dist_mm > 0.0)) fail("nms_min_dist_mm must be > 0");
  if (max_candidates <= 0) fail("max_candidates must be positive");
  if (!(min_score_frac >= 0.0 && min_score_frac < 1.0)) fail("min_score_frac must lie in [0, 1)");
}

std::vector<double> HoughParams::radii() const {
  std::vector<double> out;
  for (int n = 0;; ++n) {
    const double r = r_min_mm + n * r_step_mm;
    if (r > r_max_mm + 1e-9 * r_max_mm) break;
    out.push_back(r);
  }
  return out;
}

std::int64_t VoteAccumulator::total() const {
  return std::accumulate(votes.begin(), votes.end(), std::int64_t{0});
}

std::vector<std::array<float, 3>> gradient(const Volume3D& vol) {
  const Geometry& g = vol.geometry;
  require_min_dims(g, "gradient");
  std::vector<std::array<float, 3>> out(g.voxel_count());
  for (int k = 0; k < g.nz(); ++k)
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        const Eigen::Vector3d d = gradient_at(vol, i, j, k);
        out[g.index(i, j, k)] = {static_cast<float>(d.x()), static_cast<float>(d.y()),
                                 static_cast<float>(d.z())};
      }
  return out;
}

VoteAccumulator vote_accumulator(const Volume3D& ute, const BinaryMask& voi,
                                 const HoughParams& params) {
  check_inputs(ute, voi, params, "detect_spheres");
  const auto edges = select_edges(ute, voi, params.grad_threshold_frac);
  return accumulate(ute, edges, params.radii(), params.workers);
}

std::vector<std::int32_t> box_sum3(const std::vector<std::int32_t>& acc,
                                   const Geometry& g) {
  std::vector<std::int32_t> cur = acc, next(acc.size());
  const std::array<std::size_t, 3> stride{
      1, static_cast<std::size_t>(g.nx()),
      static_cast<std::size_t>(g.nx()) * static_cast<std::size_t>(g.ny())};
  for (int axis = 0; axis < 3; ++axis) {
    const int n = g.dims()[axis];
    for (std::size_t idx = 0; idx < cur.size(); ++idx) {
      const int c = g.coords(idx)[axis];
      std::int32_t s = cur[idx];
      if (c > 0) s += cur[idx - stride[axis]];
      if (c + 1 < n) s += cur[idx + stride[axis]];
      next[idx] = s;
    }
    std::swap(cur, next);
  }
  return cur;
}

std::vector<SphereCandidate> non_max_suppression(std::vector<SphereCandidate> candidates,
                                                 double min_dist_mm) {
  if (!(min_dist_mm > 0.0)) {
    throw Error(Errc::InvalidArgument, "non_max_suppression", "min_dist_mm must be > 0");
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const SphereCandidate& a, const SphereCandidate& b) {
                     return a.score > b.score;
                   });
  std::vector<SphereCandidate> kept;
  const double d2 = min_dist_mm * min_dist_mm;
  for (const auto& c : candidates) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const SphereCandidate& k) {
      return (k.center - c.center).squaredNorm() < d2;
    });
    if (!suppressed) kept.push_back(c);
  }
  return kept;
}

std::vector<SphereCandidate> detect_spheres(const Volume3D& ute, const BinaryMask& voi,
                                            const HoughParams& params) {
  check_inputs(ute, voi, params, "detect_spheres");
  const Geometry& g = ute.geometry;
  const auto edges = select_edges(ute, voi, params.grad_threshold_frac);
  if (edges.empty()) return {};
  const auto radii = params.radii();
  const VoteAccumulator acc = accumulate(ute, edges, radii, params.workers);
  const auto smooth = box_sum3(acc.votes, g);

  std::vector<SphereCandidate> maxima;
  for (std::size_t idx = 0; idx < smooth.size(); ++idx) {
    if (smooth[idx] > 0 && is_local_max(smooth, g, idx)) {
      SphereCandidate c;
      c.voxel = idx;
      c.score = smooth[idx];
      c.center = g.voxel_to_world(idx);
      maxima.push_back(c);
    }
  }
  std::sort(maxima.begin(), maxima.end(), [](const SphereCandidate& a, const SphereCandidate& b) {
    return a.score != b.score ? a.score > b.score : a.voxel < b.voxel;
  });
  if (!maxima.empty() && params.min_score_frac > 0.0) {
    const double floor = params.min_score_frac * static_cast<double>(maxima.front().score);
    maxima.erase(std::find_if(maxima.begin(), maxima.end(),
                              [&](const SphereCandidate& c) {
                                return static_cast<double>(c.score) < floor;
                              }),
                 maxima.end());
  }

  std::vector<SphereCandidate> kept;
  const double d2 = params.nms_min_dist_mm * params.nms_min_dist_mm;
  for (const auto& c : maxima) {
    if (static_cast<int>(kept.size()) >= params.max_candidates) break;
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const SphereCandidate& k) {
      return (k.center - c.center).squaredNorm() < d2;
    });
    if (!suppressed) kept.push_back(c);
  }

  // Radius per candidate: the ladder radius whose votes land most often on
  // the centre voxel itself; falls back to the 3x3x3 box when none do.
  const std::size_t nr = radii.size();
  std::unordered_map<std::size_t, std::size_t> centre_of;
  std::unordered_map<std::size_t, std::vector<std::size_t>> box_of;
  for (std::size_t c = 0; c < kept.size(); ++c) {
    centre_of[kept[c].voxel] = c;
    const auto v = g.coords(kept[c].voxel);
    for (int dk = -1; dk <= 1; ++dk)
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di)
          if (g.contains(v[0] + di, v[1] + dj, v[2] + dk))
            box_of[g.index(v[0] + di, v[1] + dj, v[2] + dk)].push_back(c);
  }
  std::vector<std::int64_t> centre_hits(kept.size() * nr, 0), box_hits(kept.size() * nr, 0);
  for (const auto& e : edges) {
    for (std::size_t r = 0; r < nr; ++r) {
      for (double sign : {1.0, -1.0}) {
        std::size_t target;
        if (!vote_target(g, e, sign * radii[r], target)) continue;
        if (auto it = centre_of.find(target); it != centre_of.end())
          ++centre_hits[it->second * nr + r];
        if (auto it = box_of.find(target); it != box_of.end())
          for (std::size_t c : it->second) ++box_hits[c * nr + r];
      }
    }
  }
  for (std::size_t c = 0; c < kept.size(); ++c) {
    const auto* hits = &centre_hits[c * nr];
    if (std::all_of(hits, hits + nr, [](std::int64_t h) { return h == 0; }))
      hits = &box_hits[c * nr];
    const auto best = std::max_element(hits, hits + nr) - hits;
    kept[c].radius_mm = radii[static_cast<std::size_t>(best)];
  }
  return kept;
}

}  // namespace eegloc
