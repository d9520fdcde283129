#pragma once

#include "eegloc/electrode_template.hpp"
#include "eegloc/points.hpp"
#include "eegloc/volume.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>

namespace eegloc {

/// Synthetic head: an ellipsoid that is bright on T1, plus solid electrode
/// spheres centred on its surface that only the UTE volume shows.
struct PhantomSpec {
  std::array<int, 3> dims{220, 260, 200};
  std::array<double, 3> spacing{1.0, 1.0, 1.0};
  WorldPoint head_center{110.0, 130.0, 100.0};
  std::array<double, 3> semi_axes_mm{90.0, 110.0, 80.0};
  double electrode_radius_mm = 6.0;
  int n_electrodes = 65;
  double t1_bg = 20.0;
  double t1_head = 120.0;
  double ute_bg = 10.0;
  double ute_head = 60.0;
  double ute_electrode = 200.0;
  double t1_noise_sigma = 5.0;
  double ute_noise_sigma = 10.0;  // 5% of ute_electrode
  double cap_perturbation_mm = 1.0;
  std::uint64_t rng_seed = 1;
  int workers = 0;

  void validate() const;
  Geometry geometry() const;
};

nlohmann::json phantom_spec_to_json(const PhantomSpec& spec);
/// Overlays the fields present in `j` onto `base`.
PhantomSpec phantom_spec_from_json(const nlohmann::json& j, PhantomSpec base = {});

struct Phantom {
  Volume3D t1;
  Volume3D ute;
  LabeledPoints truth;                        // electrode centres, template order
  std::map<Fiducial, WorldPoint> fiducials;  // exact landmarks on the surface
};

/// Uses the first n_electrodes channels of `tpl`.
Phantom generate_phantom(const PhantomSpec& spec, const ElectrodeTemplate& tpl = default_template());

/// Isotropic Gaussian jitter (sigma_mm per axis), deterministic in `seed`.
LabeledPoints perturb_ground_truth(const LabeledPoints& truth, double sigma_mm,
                                   std::uint64_t seed);

/// Single solid sphere (partial-volume edges) on a diagonal grid, for
/// detector checks.
Volume3D sphere_volume(std::array<int, 3> dims, std::array<double, 3> spacing,
                       const WorldPoint& center, double radius_mm, double inside,
                       double outside);

/// t1.nii, ute.nii, truth.csv, fiducials.csv and spec.json into `dir`.
void write_phantom(const Phantom& phantom, const PhantomSpec& spec,
                   const std::filesystem::path& dir);

LabeledPoints fiducials_to_points(const std::map<Fiducial, WorldPoint>& fiducials);
std::map<Fiducial, WorldPoint> fiducials_from_points(const LabeledPoints& pts);

}  // namespace eegloc
