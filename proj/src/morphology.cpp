#include "eegloc/morphology.hpp"

#include "eegloc/error.hpp"
#include "eegloc/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace eegloc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_geometry(const BinaryMask& a, const BinaryMask& b, const char* stage) {
  if (!(a.geometry() == b.geometry())) {
    throw Error(Errc::GeometryMismatch, stage, "masks have different geometry");
  }
}

// Lower envelope of parabolas w*(p-q)^2 + f[q] over one grid line
// (Felzenszwalb & Huttenlocher). With `border_sites`, zero-cost sites are
// added at q = -1 and q = n.
class LineTransform {
 public:
  void run(std::vector<double>& f, double w, bool border_sites) {
    const int n = static_cast<int>(f.size());
    sites_.clear();
    values_.clear();
    if (border_sites) push(-1, 0.0);
    for (int q = 0; q < n; ++q)
      if (f[q] < kInf) push(q, f[q]);
    if (border_sites) push(n, 0.0);

    if (sites_.empty()) {
      std::fill(f.begin(), f.end(), kInf);
      return;
    }
    env_.assign(sites_.size(), 0);
    bounds_.assign(sites_.size() + 1, 0.0);
    int k = 0;
    env_[0] = 0;
    bounds_[0] = -kInf;
    bounds_[1] = kInf;
    for (std::size_t s = 1; s < sites_.size(); ++s) {
      const double q = sites_[s];
      double cut;
      while (true) {
        const double v = sites_[env_[k]];
        cut = ((values_[s] + w * q * q) - (values_[env_[k]] + w * v * v)) /
              (2.0 * w * (q - v));
        if (cut <= bounds_[k] && k > 0) {
          --k;
        } else {
          break;
        }
      }
      ++k;
      env_[k] = static_cast<int>(s);
      bounds_[k] = cut;
      bounds_[k + 1] = kInf;
    }
    k = 0;
    for (int p = 0; p < n; ++p) {
      while (bounds_[k + 1] < p) ++k;
      const double dq = p - sites_[env_[k]];
      f[p] = w * dq * dq + values_[env_[k]];
    }
  }

 private:
  void push(int q, double v) {
    sites_.push_back(static_cast<double>(q));
    values_.push_back(v);
  }
  std::vector<double> sites_;
  std::vector<double> values_;
  std::vector<int> env_;
  std::vector<double> bounds_;
};

bool within(double d2, double radius_mm) {
  const double r2 = radius_mm * radius_mm;
  return d2 <= r2 * (1.0 + 1e-9) + 1e-12;
}

void check_radius(double radius_mm, const char* stage) {
  if (!(radius_mm >= 0.0) || !std::isfinite(radius_mm)) {
    throw Error(Errc::NegativeRadius, stage,
                "radius must be finite and >= 0, got " + std::to_string(radius_mm));
  }
}

// Breadth-first flood over `mask` set voxels from `seed`, marking `visited`.
// Returns the component size; voxel indices are appended to `out` if given.
template <typename Neighbours>
std::size_t flood(const Geometry& g, const std::vector<std::uint8_t>& in,
                  std::vector<std::uint8_t>& visited, std::size_t seed,
                  const Neighbours& offsets, std::vector<std::size_t>* out) {
  std::vector<std::size_t> queue{seed};
  visited[seed] = 1;
  std::size_t head = 0;
  while (head < queue.size()) {
    const std::size_t idx = queue[head++];
    const auto c = g.coords(idx);
    for (const auto& o : offsets) {
      const int i = c[0] + o[0], j = c[1] + o[1], k = c[2] + o[2];
      if (!g.contains(i, j, k)) continue;
      const std::size_t n = g.index(i, j, k);
      if (in[n] && !visited[n]) {
        visited[n] = 1;
        queue.push_back(n);
      }
    }
  }
  if (out) out->insert(out->end(), queue.begin(), queue.end());
  return queue.size();
}

std::vector<std::array<int, 3>> offsets26() {
  std::vector<std::array<int, 3>> o;
  for (int dk = -1; dk <= 1; ++dk)
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di)
        if (di || dj || dk) o.push_back({di, dj, dk});
  return o;
}

const std::array<std::array<int, 3>, 6> kOffsets6{{
    {-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}}};

}  // namespace

BinaryMask::BinaryMask(Geometry geom)
    : geometry_(std::move(geom)), bits_(geometry_.voxel_count(), 0) {}

BinaryMask::BinaryMask(Geometry geom, std::vector<std::uint8_t> bits)
    : geometry_(std::move(geom)), bits_(std::move(bits)) {
  if (bits_.size() != geometry_.voxel_count()) {
    throw Error(Errc::InvalidArgument, "mask", "bit count does not match dims");
  }
  for (auto& b : bits_) {
    b = b ? 1 : 0;
    count_ += b;
  }
}

void BinaryMask::set(std::size_t idx, bool value) noexcept {
  const std::uint8_t v = value ? 1 : 0;
  if (bits_[idx] != v) {
    count_ = v ? count_ + 1 : count_ - 1;
    bits_[idx] = v;
  }
}

double otsu_threshold(const Volume3D& vol) {
  double lo = kInf, hi = -kInf;
  for (float v : vol.data) {
    if (!std::isfinite(v)) continue;
    lo = std::min<double>(lo, v);
    hi = std::max<double>(hi, v);
  }
  if (!(hi > lo)) {
    throw Error(Errc::ConstantVolume, "otsu_threshold",
                "volume has fewer than two distinct finite values");
  }
  constexpr int kBins = 256;
  const double width = (hi - lo) / kBins;
  std::array<double, kBins> count{};
  std::array<double, kBins> sum{};
  for (float v : vol.data) {
    if (!std::isfinite(v)) continue;
    const int b = std::min(kBins - 1, static_cast<int>((v - lo) / width));
    count[b] += 1.0;
    sum[b] += v;
  }
  const double total_n = std::accumulate(count.begin(), count.end(), 0.0);
  const double total_s = std::accumulate(sum.begin(), sum.end(), 0.0);

  std::array<double, kBins - 1> between{};
  double n0 = 0.0, s0 = 0.0;
  for (int k = 0; k < kBins - 1; ++k) {
    n0 += count[k];
    s0 += sum[k];
    const double n1 = total_n - n0;
    if (n0 == 0.0 || n1 == 0.0) {
      between[k] = -1.0;
      continue;
    }
    const double d = s0 / n0 - (total_s - s0) / n1;
    between[k] = n0 * n1 * d * d;
  }
  const auto best = std::max_element(between.begin(), between.end());
  int first = static_cast<int>(best - between.begin());
  int last = first;
  while (last + 1 < kBins - 1 && between[last + 1] == *best) ++last;
  const double cut = 0.5 * (first + last) + 1.0;
  return lo + cut * width;
}

BinaryMask threshold_mask(const Volume3D& vol, double threshold) {
  std::vector<std::uint8_t> bits(vol.data.size());
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = vol.data[i] > threshold;
  return BinaryMask(vol.geometry, std::move(bits));
}

BinaryMask largest_component(const BinaryMask& mask) {
  const Geometry& g = mask.geometry();
  const auto offsets = offsets26();
  std::vector<std::uint8_t> visited(mask.size(), 0);
  std::size_t best_size = 0, best_seed = 0;
  for (std::size_t idx = 0; idx < mask.size(); ++idx) {
    if (!mask.test(idx) || visited[idx]) continue;
    const std::size_t size = flood(g, mask.bits(), visited, idx, offsets, nullptr);
    if (size > best_size) {
      best_size = size;
      best_seed = idx;
    }
  }
  BinaryMask out(g);
  if (best_size == 0) return out;
  std::fill(visited.begin(), visited.end(), 0);
  std::vector<std::size_t> members;
  flood(g, mask.bits(), visited, best_seed, offsets, &members);
  for (std::size_t idx : members) out.set(idx, true);
  return out;
}

bool is_connected(const BinaryMask& mask) {
  if (mask.empty()) return true;
  std::size_t seed = 0;
  while (!mask.test(seed)) ++seed;
  std::vector<std::uint8_t> visited(mask.size(), 0);
  return flood(mask.geometry(), mask.bits(), visited, seed, offsets26(), nullptr) ==
         mask.voxel_count();
}

BinaryMask fill_holes(const BinaryMask& mask) {
  const Geometry& g = mask.geometry();
  std::vector<std::uint8_t> bits = mask.bits();
  const int nx = g.nx(), ny = g.ny(), nz = g.nz();

  // Per axial slice, 4-connected background reachable from the slice border.
  std::vector<std::uint8_t> reach(static_cast<std::size_t>(nx) * ny);
  std::vector<int> queue;
  for (int k = 0; k < nz; ++k) {
    std::fill(reach.begin(), reach.end(), 0);
    queue.clear();
    auto seed = [&](int i, int j) {
      const int p = i + nx * j;
      if (!bits[g.index(i, j, k)] && !reach[p]) {
        reach[p] = 1;
        queue.push_back(p);
      }
    };
    for (int i = 0; i < nx; ++i) {
      seed(i, 0);
      seed(i, ny - 1);
    }
    for (int j = 0; j < ny; ++j) {
      seed(0, j);
      seed(nx - 1, j);
    }
    for (std::size_t h = 0; h < queue.size(); ++h) {
      const int i = queue[h] % nx, j = queue[h] / nx;
      if (i > 0) seed(i - 1, j);
      if (i + 1 < nx) seed(i + 1, j);
      if (j > 0) seed(i, j - 1);
      if (j + 1 < ny) seed(i, j + 1);
    }
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        if (!reach[i + nx * j]) bits[g.index(i, j, k)] = 1;
  }

  // 3D, 6-connected.
  std::vector<std::uint8_t> background(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) background[i] = !bits[i];
  std::vector<std::uint8_t> visited(bits.size(), 0);
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const bool border = i == 0 || j == 0 || k == 0 || i == nx - 1 ||
                            j == ny - 1 || k == nz - 1;
        const std::size_t idx = g.index(i, j, k);
        if (border && background[idx] && !visited[idx])
          flood(g, background, visited, idx, kOffsets6, nullptr);
      }
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (background[i] && !visited[i]) bits[i] = 1;
  return BinaryMask(g, std::move(bits));
}

std::vector<double> squared_distance_map(const BinaryMask& mask, bool outside_is_set,
                                         const MorphologyOptions& opts) {
  const Geometry& g = mask.geometry();
  const auto& dims = g.dims();
  const auto& sp = g.spacing();
  std::vector<double> d(mask.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = mask.test(i) ? 0.0 : kInf;

  const std::array<std::size_t, 3> stride{
      1, static_cast<std::size_t>(dims[0]),
      static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1])};
  for (int axis = 0; axis < 3; ++axis) {
    const int n = dims[axis];
    const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
    const std::size_t lines = static_cast<std::size_t>(dims[a1]) * dims[a2];
    const double w = sp[axis] * sp[axis];
    parallel_for(lines, opts.workers, [&](std::size_t begin, std::size_t end, int) {
      LineTransform lt;
      std::vector<double> line(n);
      for (std::size_t l = begin; l < end; ++l) {
        const std::size_t u = l % dims[a1], v = l / dims[a1];
        const std::size_t base = u * stride[a1] + v * stride[a2];
        for (int p = 0; p < n; ++p) line[p] = d[base + p * stride[axis]];
        lt.run(line, w, outside_is_set);
        for (int p = 0; p < n; ++p) d[base + p * stride[axis]] = line[p];
      }
    });
  }
  return d;
}

BinaryMask dilate(const BinaryMask& mask, double radius_mm, const MorphologyOptions& opts) {
  check_radius(radius_mm, "dilate");
  if (radius_mm == 0.0 || mask.empty()) return mask;
  const auto d = squared_distance_map(mask, false, opts);
  std::vector<std::uint8_t> bits(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) bits[i] = within(d[i], radius_mm);
  return BinaryMask(mask.geometry(), std::move(bits));
}

BinaryMask erode(const BinaryMask& mask, double radius_mm, const MorphologyOptions& opts) {
  check_radius(radius_mm, "erode");
  if (radius_mm == 0.0 || mask.empty()) return mask;
  const auto d = squared_distance_map(complement(mask), true, opts);
  std::vector<std::uint8_t> bits(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) bits[i] = !within(d[i], radius_mm);
  return BinaryMask(mask.geometry(), std::move(bits));
}

BinaryMask close(const BinaryMask& mask, double radius_mm, const MorphologyOptions& opts) {
  return mask_or(mask, erode(dilate(mask, radius_mm, opts), radius_mm, opts));
}

BinaryMask extract_head_mask(const Volume3D& t1, const MorphologyOptions& opts) {
  const double threshold = otsu_threshold(t1);
  BinaryMask fg = threshold_mask(t1, threshold);
  if (fg.empty()) {
    throw Error(Errc::NoForeground, "extract_head_mask",
                "no voxel above the Otsu threshold " + std::to_string(threshold));
  }
  fg = largest_component(fg);
  const auto& sp = t1.geometry.spacing();
  const double closing_mm = 2.0 * std::max({sp[0], sp[1], sp[2]});
  fg = close(fg, closing_mm, opts);
  return fill_holes(fg);
}

BinaryMask build_voi_shell(const BinaryMask& head, double outer_margin_mm,
                           double inner_margin_mm, const MorphologyOptions& opts) {
  check_radius(outer_margin_mm, "build_voi_shell");
  check_radius(inner_margin_mm, "build_voi_shell");
  if (head.empty()) throw Error(Errc::EmptyHeadMask, "build_voi_shell", "head mask is empty");
  return mask_and_not(dilate(head, outer_margin_mm, opts), erode(head, inner_margin_mm, opts));
}

BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b) {
  require_same_geometry(a, b, "mask_and");
  std::vector<std::uint8_t> bits(a.size());
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = a.test(i) && b.test(i);
  return BinaryMask(a.geometry(), std::move(bits));
}

BinaryMask mask_and_not(const BinaryMask& a, const BinaryMask& b) {
  require_same_geometry(a, b, "mask_and_not");
  std::vector<std::uint8_t> bits(a.size());
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = a.test(i) && !b.test(i);
  return BinaryMask(a.geometry(), std::move(bits));
}

BinaryMask mask_or(const BinaryMask& a, const BinaryMask& b) {
  require_same_geometry(a, b, "mask_or");
  std::vector<std::uint8_t> bits(a.size());
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = a.test(i) || b.test(i);
  return BinaryMask(a.geometry(), std::move(bits));
}

BinaryMask complement(const BinaryMask& m) {
  std::vector<std::uint8_t> bits(m.size());
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = !m.test(i);
  return BinaryMask(m.geometry(), std::move(bits));
}

BinaryMask resample_nearest(const BinaryMask& mask, const Geometry& target) {
  if (mask.geometry() == target) return mask;
  const Geometry& src = mask.geometry();
  BinaryMask out(target);
  for (int k = 0; k < target.nz(); ++k)
    for (int j = 0; j < target.ny(); ++j)
      for (int i = 0; i < target.nx(); ++i) {
        const Eigen::Vector3d s =
            src.world_to_voxel(target.voxel_to_world(Eigen::Vector3d(i, j, k)));
        const int si = static_cast<int>(std::lround(s.x()));
        const int sj = static_cast<int>(std::lround(s.y()));
        const int sk = static_cast<int>(std::lround(s.z()));
        if (src.contains(si, sj, sk) && mask.test(si, sj, sk))
          out.set(target.index(i, j, k), true);
      }
  return out;
}

Volume3D mask_to_volume(const BinaryMask& mask) {
  std::vector<float> data(mask.size());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = mask.test(i) ? 1.0f : 0.0f;
  return Volume3D(mask.geometry(), DType::U8, std::move(data));
}

BinaryMask mask_from_volume(const Volume3D& vol) {
  std::vector<std::uint8_t> bits(vol.data.size());
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = vol.data[i] != 0.0f;
  return BinaryMask(vol.geometry, std::move(bits));
}

WorldPoint mask_centroid(const BinaryMask& mask) {
  if (mask.empty()) throw Error(Errc::EmptyInput, "mask_centroid", "mask is empty");
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask.test(i)) continue;
    const auto c = mask.geometry().coords(i);
    sum += Eigen::Vector3d(c[0], c[1], c[2]);
  }
  return mask.geometry().voxel_to_world(Eigen::Vector3d(sum / static_cast<double>(mask.voxel_count())));
}

}  // namespace eegloc
