#include "helpers.hpp"

#include "eegloc/nifti.hpp"
#include "eegloc/phantom.hpp"

#include <algorithm>

using namespace eegloc;
using testutil::code_of;

namespace {

double radial_surface_gap(const PhantomSpec& spec, const WorldPoint& p) {
  const Eigen::Vector3d axes(spec.semi_axes_mm[0], spec.semi_axes_mm[1], spec.semi_axes_mm[2]);
  const Eigen::Vector3d d = p - spec.head_center;
  const double q = d.cwiseQuotient(axes).norm();
  return (d - d / q).norm();
}

PhantomSpec small_spec() {
  PhantomSpec s;
  s.dims = {120, 140, 110};
  s.head_center = {60, 70, 55};
  s.semi_axes_mm = {45, 55, 40};
  s.electrode_radius_mm = 3;
  s.n_electrodes = 20;
  return s;
}

}  // namespace

TEST_CASE("default phantom places 65 electrodes on the surface") {
  PhantomSpec spec;
  const Phantom ph = generate_phantom(spec);
  REQUIRE(ph.truth.size() == 65);
  const auto tpl = default_template();
  for (std::size_t i = 0; i < ph.truth.size(); ++i) {
    CHECK(ph.truth[i].label == tpl.channels[i].label);
    CHECK(radial_surface_gap(spec, ph.truth[i].position) <= 1.0);
  }
  REQUIRE(ph.fiducials.size() == 5);
  for (const auto& [f, p] : ph.fiducials) CHECK(radial_surface_gap(spec, p) < 1e-9);
  CHECK(ph.fiducials.at(Fiducial::Nasion).y() > spec.head_center.y() + 100);
  CHECK(ph.t1.geometry == ph.ute.geometry);
}

TEST_CASE("electrodes are bright in UTE only") {
  PhantomSpec spec;
  const Phantom ph = generate_phantom(spec);
  const auto& g = ph.ute.geometry;

  // UTE at each centre vs the 95th percentile of the scalp band away from electrodes
  std::vector<float> band;
  const double clear = spec.electrode_radius_mm + 1.0;
  for (std::size_t i = 0; i < g.voxel_count(); ++i) {
    const WorldPoint p = g.voxel_to_world(i);
    if (radial_surface_gap(spec, p) > 1.0) continue;
    bool near = false;
    for (const auto& t : ph.truth) near = near || (p - t.position).norm() <= clear;
    if (!near) band.push_back(ph.ute.data[i]);
  }
  std::sort(band.begin(), band.end());
  const float p95 = band[static_cast<std::size_t>(0.95 * (band.size() - 1))];
  for (const auto& t : ph.truth) {
    const Eigen::Vector3d v = g.world_to_voxel(t.position).array().round();
    CHECK(ph.ute.at(int(v[0]), int(v[1]), int(v[2])) >= p95);
  }

  // T1 does not depend on anything electrode-related
  PhantomSpec other = spec;
  other.electrode_radius_mm = 4.0;
  other.ute_electrode = 400.0;
  other.cap_perturbation_mm = 0.0;
  CHECK(generate_phantom(other).t1 == ph.t1);

  // and shows no contrast at the electrode centres
  PhantomSpec quiet = spec;
  quiet.t1_noise_sigma = 0;
  const Phantom q = generate_phantom(quiet);
  for (const auto& t : q.truth) {
    const Eigen::Vector3d v = g.world_to_voxel(t.position).array().round();
    const float x = q.t1.at(int(v[0]), int(v[1]), int(v[2]));
    CHECK(x >= spec.t1_bg - 1e-3);
    CHECK(x <= spec.t1_head + 1e-3);
  }
}

TEST_CASE("phantom is deterministic in the seed and across workers") {
  PhantomSpec spec = small_spec();
  spec.workers = 1;
  const Phantom a = generate_phantom(spec);
  spec.workers = 4;
  const Phantom b = generate_phantom(spec);
  CHECK(a.t1 == b.t1);
  CHECK(a.ute == b.ute);
  for (std::size_t i = 0; i < a.truth.size(); ++i) CHECK(a.truth[i].position == b.truth[i].position);
  spec.rng_seed = 2;
  const Phantom c = generate_phantom(spec);
  CHECK_FALSE(c.ute == a.ute);
}

TEST_CASE("phantom spec validation") {
  PhantomSpec s;
  s.electrode_radius_mm = 12.0;  // neighbours closer than two radii
  CHECK(code_of([&] { generate_phantom(s); }) == Errc::ElectrodeOverlap);
  s = {};
  s.semi_axes_mm = {5, 100, 100};
  CHECK(code_of([&] { s.validate(); }) == Errc::InvalidArgument);
  s = {};
  s.ute_electrode = s.ute_head;
  CHECK(code_of([&] { s.validate(); }) == Errc::InvalidArgument);
  s = {};
  s.n_electrodes = 4;
  CHECK(code_of([&] { s.validate(); }) == Errc::InvalidArgument);
  s = {};
  s.n_electrodes = 66;
  CHECK(code_of([&] { generate_phantom(s); }) == Errc::InvalidArgument);
}

TEST_CASE("phantom spec JSON") {
  PhantomSpec s = small_spec();
  s.rng_seed = 77;
  const auto back = phantom_spec_from_json(phantom_spec_to_json(s));
  CHECK(phantom_spec_to_json(back) == phantom_spec_to_json(s));
  CHECK(code_of([] { phantom_spec_from_json(nlohmann::json{{"bogus", 1}}); }) == Errc::ParseError);
  const auto partial = phantom_spec_from_json(nlohmann::json{{"ute_noise_sigma", 0}});
  CHECK(partial.ute_noise_sigma == 0.0);
  CHECK(partial.t1_head == PhantomSpec{}.t1_head);
}

TEST_CASE("ground-truth perturbation") {
  LabeledPoints pts;
  for (int i = 0; i < 10000; ++i) pts.push_back({std::to_string(i), {i * 1.0, 0, 0}});
  const auto same = perturb_ground_truth(pts, 0.0, 3);
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK(same[i].position == pts[i].position);

  const auto a = perturb_ground_truth(pts, 5.0, 3);
  const auto b = perturb_ground_truth(pts, 5.0, 3);
  double ss = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(a[i].position == b[i].position);
    CHECK(a[i].label == pts[i].label);
    ss += (a[i].position - pts[i].position).squaredNorm();
  }
  const double rms = std::sqrt(ss / pts.size());
  CHECK(std::abs(rms - 5.0 * std::sqrt(3.0)) / (5.0 * std::sqrt(3.0)) < 0.03);
  CHECK(code_of([&] { perturb_ground_truth(pts, -1.0, 1); }) == Errc::InvalidArgument);
}

TEST_CASE("single sphere volume") {
  const Volume3D v = sphere_volume({21, 21, 21}, {1, 1, 1}, {10, 10, 10}, 5.0, 100.0, 0.0);
  CHECK(v.at(10, 10, 10) == 100.0f);
  CHECK(v.at(0, 0, 0) == 0.0f);
  double mass = 0;
  for (float x : v.data) mass += x / 100.0;
  CHECK(mass == doctest::Approx(4.0 / 3.0 * 3.14159265 * 125).epsilon(0.02));
}

TEST_CASE("phantom files on disk") {
  const auto dir = testutil::scratch_dir("phantom_files");
  const PhantomSpec spec = small_spec();
  const Phantom ph = generate_phantom(spec);
  write_phantom(ph, spec, dir);
  CHECK(read_nifti(dir / "t1.nii") == ph.t1);
  CHECK(read_nifti(dir / "ute.nii") == ph.ute);
  const auto truth = read_labeled_points(dir / "truth.csv");
  REQUIRE(truth.size() == ph.truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) CHECK(truth[i].position == ph.truth[i].position);
  const auto fid = fiducials_from_points(read_labeled_points(dir / "fiducials.csv"));
  CHECK(fid == ph.fiducials);
}
