#include "eegloc/phantom.hpp"

#include "eegloc/csv.hpp"
#include "eegloc/error.hpp"
#include "eegloc/nifti.hpp"
#include "eegloc/parallel.hpp"

#include <cmath>
#include <random>
#include <string>

namespace eegloc {
namespace {

constexpr int kSuper = 4;  // supersamples per axis on partial-volume voxels

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Fraction of the voxel at index (i,j,k) inside the region described by
// `inside(p)`, given an approximate signed distance at its centre.
template <typename Inside>
double coverage(const Geometry& g, int i, int j, int k, double signed_dist, double half_diag,
                const Inside& inside) {
  if (signed_dist >= half_diag) return 0.0;
  if (signed_dist <= -half_diag) return 1.0;
  int hits = 0;
  for (int c = 0; c < kSuper; ++c)
    for (int b = 0; b < kSuper; ++b)
      for (int a = 0; a < kSuper; ++a) {
        const Eigen::Vector3d sub(i + (a + 0.5) / kSuper - 0.5, j + (b + 0.5) / kSuper - 0.5,
                                  k + (c + 0.5) / kSuper - 0.5);
        hits += inside(g.voxel_to_world(sub));
      }
  return static_cast<double>(hits) / (kSuper * kSuper * kSuper);
}

double half_diagonal(const Geometry& g) {
  const auto& s = g.spacing();
  return 0.5 * std::sqrt(s[0] * s[0] + s[1] * s[1] + s[2] * s[2]);
}

void add_noise(Volume3D& vol, double sigma, std::uint64_t seed, std::uint64_t stream, int workers) {
  if (sigma <= 0.0) return;
  const Geometry& g = vol.geometry;
  const std::size_t slice = static_cast<std::size_t>(g.nx()) * g.ny();
  parallel_for(static_cast<std::size_t>(g.nz()), workers,
               [&](std::size_t begin, std::size_t end, int) {
                 for (std::size_t k = begin; k < end; ++k) {
                   std::mt19937_64 rng(splitmix(splitmix(seed ^ (stream << 56)) + k));
                   std::normal_distribution<double> n(0.0, sigma);
                   for (std::size_t v = 0; v < slice; ++v) {
                     float& x = vol.data[k * slice + v];
                     x = static_cast<float>(x + n(rng));
                   }
                 }
               });
}

double ray_radius(const Eigen::Vector3d& u, const std::array<double, 3>& axes) {
  const double q = std::pow(u.x() / axes[0], 2) + std::pow(u.y() / axes[1], 2) +
                   std::pow(u.z() / axes[2], 2);
  return 1.0 / std::sqrt(q);
}

// Paints a solid sphere into `vol` with partial-volume blending.
void paint_sphere(Volume3D& vol, const WorldPoint& center, double radius, double value) {
  const Geometry& g = vol.geometry;
  const double h = half_diagonal(g);
  const double reach = radius + 2.0 * h;
  Eigen::Vector3d lo = Eigen::Vector3d::Constant(1e300), hi = -lo;
  for (int corner = 0; corner < 8; ++corner) {
    const Eigen::Vector3d off((corner & 1 ? 1 : -1) * reach, (corner & 2 ? 1 : -1) * reach,
                              (corner & 4 ? 1 : -1) * reach);
    const Eigen::Vector3d v = g.world_to_voxel(center + off);
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const double r2 = radius * radius;
  auto inside = [&](const WorldPoint& p) { return (p - center).squaredNorm() <= r2; };
  for (int k = std::max(0, static_cast<int>(std::floor(lo.z())));
       k <= std::min(g.nz() - 1, static_cast<int>(std::ceil(hi.z()))); ++k)
    for (int j = std::max(0, static_cast<int>(std::floor(lo.y())));
         j <= std::min(g.ny() - 1, static_cast<int>(std::ceil(hi.y()))); ++j)
      for (int i = std::max(0, static_cast<int>(std::floor(lo.x())));
           i <= std::min(g.nx() - 1, static_cast<int>(std::ceil(hi.x()))); ++i) {
        const WorldPoint p = g.voxel_to_world(Eigen::Vector3d(i, j, k));
        const double cov = coverage(g, i, j, k, (p - center).norm() - radius, h, inside);
        if (cov <= 0.0) continue;
        float& x = vol.at(i, j, k);
        x = static_cast<float>(x * (1.0 - cov) + value * cov);
      }
}

}  // namespace

void PhantomSpec::validate() const {
  auto fail = [](const std::string& what) {
    throw Error(Errc::InvalidArgument, "phantom_spec", what);
  };
  for (int d : dims)
    if (d < 3 || d > 32767) fail("dims must lie in [3, 32767]");
  for (double s : spacing)
    if (!(s > 0.0)) fail("spacing must be > 0");
  if (!(electrode_radius_mm > 0.0)) fail("electrode_radius_mm must be > 0");
  for (double a : semi_axes_mm)
    if (!(a > electrode_radius_mm)) fail("semi-axes must exceed the electrode radius");
  if (!(ute_electrode > ute_head)) fail("ute_electrode must exceed ute_head");
  if (n_electrodes < 5) fail("n_electrodes must be >= 5");
  if (!(t1_noise_sigma >= 0.0) || !(ute_noise_sigma >= 0.0)) fail("noise sigma must be >= 0");
  if (!(cap_perturbation_mm >= 0.0)) fail("cap_perturbation_mm must be >= 0");
}

Geometry PhantomSpec::geometry() const { return Geometry::diagonal(dims, spacing); }

nlohmann::json phantom_spec_to_json(const PhantomSpec& s) {
  return nlohmann::json{{"dims", s.dims},
                        {"spacing", s.spacing},
                        {"head_center_mm", {s.head_center.x(), s.head_center.y(), s.head_center.z()}},
                        {"semi_axes_mm", s.semi_axes_mm},
                        {"electrode_radius_mm", s.electrode_radius_mm},
                        {"n_electrodes", s.n_electrodes},
                        {"t1_bg", s.t1_bg},
                        {"t1_head", s.t1_head},
                        {"ute_bg", s.ute_bg},
                        {"ute_head", s.ute_head},
                        {"ute_electrode", s.ute_electrode},
                        {"t1_noise_sigma", s.t1_noise_sigma},
                        {"ute_noise_sigma", s.ute_noise_sigma},
                        {"cap_perturbation_mm", s.cap_perturbation_mm},
                        {"rng_seed", s.rng_seed}};
}

PhantomSpec phantom_spec_from_json(const nlohmann::json& j, PhantomSpec s) {
  if (!j.is_object()) throw Error(Errc::ParseError, "phantom_spec", "spec must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "dims") s.dims = value.get<std::array<int, 3>>();
      else if (key == "spacing") s.spacing = value.get<std::array<double, 3>>();
      else if (key == "head_center_mm") {
        const auto c = value.get<std::array<double, 3>>();
        s.head_center = WorldPoint(c[0], c[1], c[2]);
      } else if (key == "semi_axes_mm") s.semi_axes_mm = value.get<std::array<double, 3>>();
      else if (key == "electrode_radius_mm") s.electrode_radius_mm = value.get<double>();
      else if (key == "n_electrodes") s.n_electrodes = value.get<int>();
      else if (key == "t1_bg") s.t1_bg = value.get<double>();
      else if (key == "t1_head") s.t1_head = value.get<double>();
      else if (key == "ute_bg") s.ute_bg = value.get<double>();
      else if (key == "ute_head") s.ute_head = value.get<double>();
      else if (key == "ute_electrode") s.ute_electrode = value.get<double>();
      else if (key == "t1_noise_sigma") s.t1_noise_sigma = value.get<double>();
      else if (key == "ute_noise_sigma") s.ute_noise_sigma = value.get<double>();
      else if (key == "cap_perturbation_mm") s.cap_perturbation_mm = value.get<double>();
      else if (key == "rng_seed") s.rng_seed = value.get<std::uint64_t>();
      else throw Error(Errc::ParseError, "phantom_spec", "unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, "phantom_spec", e.what());
  }
  s.validate();
  return s;
}

Phantom generate_phantom(const PhantomSpec& spec, const ElectrodeTemplate& tpl) {
  const char* stage = "generate_phantom";
  spec.validate();
  if (static_cast<std::size_t>(spec.n_electrodes) > tpl.size()) {
    throw Error(Errc::InvalidArgument, stage,
                "template has only " + std::to_string(tpl.size()) + " channels");
  }
  const Geometry g = spec.geometry();
  const auto& axes = spec.semi_axes_mm;
  const WorldPoint& c0 = spec.head_center;

  Phantom ph;
  for (Fiducial f : kAllFiducials) {
    const Eigen::Vector3d u = tpl.fiducial(f);
    ph.fiducials[f] = c0 + ray_radius(u, axes) * u;
  }

  std::mt19937_64 place_rng(splitmix(spec.rng_seed ^ 0x5eedULL));
  std::normal_distribution<double> jitter(0.0, spec.cap_perturbation_mm);
  for (int e = 0; e < spec.n_electrodes; ++e) {
    Eigen::Vector3d u = tpl.channels[e].unit_pos;
    if (spec.cap_perturbation_mm > 0.0) {
      Eigen::Vector3d d(jitter(place_rng), jitter(place_rng), jitter(place_rng));
      d -= d.dot(u) * u;
      u = (ray_radius(u, axes) * u + d).normalized();
    }
    ph.truth.push_back({tpl.channels[e].label, c0 + ray_radius(u, axes) * u});
  }
  for (std::size_t a = 0; a < ph.truth.size(); ++a)
    for (std::size_t b = a + 1; b < ph.truth.size(); ++b)
      if ((ph.truth[a].position - ph.truth[b].position).norm() < 2.0 * spec.electrode_radius_mm) {
        throw Error(Errc::ElectrodeOverlap, stage,
                    ph.truth[a].label + " and " + ph.truth[b].label + " overlap");
      }

  // Head ellipsoid in both volumes.
  ph.t1 = Volume3D(g, DType::F32);
  ph.ute = Volume3D(g, DType::F32);
  const double h = half_diagonal(g);
  auto inside_head = [&](const WorldPoint& p) {
    const Eigen::Vector3d q = p - c0;
    return std::pow(q.x() / axes[0], 2) + std::pow(q.y() / axes[1], 2) +
               std::pow(q.z() / axes[2], 2) <=
           1.0;
  };
  parallel_for(static_cast<std::size_t>(g.nz()), spec.workers,
               [&](std::size_t begin, std::size_t end, int) {
                 for (int k = static_cast<int>(begin); k < static_cast<int>(end); ++k)
                   for (int j = 0; j < g.ny(); ++j)
                     for (int i = 0; i < g.nx(); ++i) {
                       const Eigen::Vector3d q =
                           g.voxel_to_world(Eigen::Vector3d(i, j, k)) - c0;
                       const Eigen::Vector3d s(q.x() / axes[0], q.y() / axes[1],
                                               q.z() / axes[2]);
                       const double f = s.norm();
                       const Eigen::Vector3d grad(s.x() / axes[0], s.y() / axes[1],
                                                  s.z() / axes[2]);
                       const double gn = f > 0.0 ? grad.norm() / f : 1.0;
                       const double dist = (f - 1.0) / std::max(gn, 1e-12);
                       const double cov = coverage(g, i, j, k, dist, 2.0 * h, inside_head);
                       const std::size_t idx = g.index(i, j, k);
                       ph.t1.data[idx] = static_cast<float>(spec.t1_bg + (spec.t1_head - spec.t1_bg) * cov);
                       ph.ute.data[idx] = static_cast<float>(spec.ute_bg + (spec.ute_head - spec.ute_bg) * cov);
                     }
               });

  // Electrodes exist only in the UTE volume.
  for (const auto& e : ph.truth) paint_sphere(ph.ute, e.position, spec.electrode_radius_mm, spec.ute_electrode);

  add_noise(ph.t1, spec.t1_noise_sigma, spec.rng_seed, 1, spec.workers);
  add_noise(ph.ute, spec.ute_noise_sigma, spec.rng_seed, 2, spec.workers);
  return ph;
}

LabeledPoints perturb_ground_truth(const LabeledPoints& truth, double sigma_mm, std::uint64_t seed) {
  if (!(sigma_mm >= 0.0)) {
    throw Error(Errc::InvalidArgument, "perturb_ground_truth", "sigma_mm must be >= 0");
  }
  if (sigma_mm == 0.0) return truth;
  std::mt19937_64 rng(splitmix(seed));
  std::normal_distribution<double> n(0.0, sigma_mm);
  LabeledPoints out = truth;
  for (auto& p : out) {
    const double dx = n(rng), dy = n(rng), dz = n(rng);
    p.position += Eigen::Vector3d(dx, dy, dz);
  }
  return out;
}

Volume3D sphere_volume(std::array<int, 3> dims, std::array<double, 3> spacing,
                       const WorldPoint& center, double radius_mm, double inside, double outside) {
  Volume3D vol(Geometry::diagonal(dims, spacing), DType::F32);
  std::fill(vol.data.begin(), vol.data.end(), static_cast<float>(outside));
  paint_sphere(vol, center, radius_mm, inside);
  return vol;
}

LabeledPoints fiducials_to_points(const std::map<Fiducial, WorldPoint>& fiducials) {
  LabeledPoints out;
  for (Fiducial f : kAllFiducials) {
    const auto it = fiducials.find(f);
    if (it != fiducials.end()) out.push_back({fiducial_name(f), it->second});
  }
  return out;
}

std::map<Fiducial, WorldPoint> fiducials_from_points(const LabeledPoints& pts) {
  std::map<Fiducial, WorldPoint> out;
  for (const auto& p : pts) {
    const auto f = parse_fiducial(p.label);
    if (!f) {
      throw Error(Errc::ParseError, "fiducials", "unknown fiducial label '" + p.label + "'");
    }
    out[*f] = p.position;
  }
  return out;
}

void write_phantom(const Phantom& phantom, const PhantomSpec& spec,
                   const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::IoFailure, "write_phantom", "cannot create " + dir.string());
  write_nifti(phantom.t1, dir / "t1.nii");
  write_nifti(phantom.ute, dir / "ute.nii");
  write_labeled_points(phantom.truth, dir / "truth.csv");
  write_labeled_points(fiducials_to_points(phantom.fiducials), dir / "fiducials.csv");
  csv::write_text(dir / "spec.json", phantom_spec_to_json(spec).dump(2) + "\n");
}

}  // namespace eegloc
