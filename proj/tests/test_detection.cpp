#include "helpers.hpp"

#include "eegloc/detection.hpp"
#include "eegloc/evaluation.hpp"
#include "eegloc/phantom.hpp"

#include <set>

using namespace eegloc;
using testutil::code_of;

namespace {

SphereCandidate cand(double x, double y, double z, std::int64_t score = 10) {
  return {{x, y, z}, 6.0, score, 0};
}

// Replaces each listed electrode in the UTE volume by the plain head/background it covers.
void erase_electrodes(Phantom& ph, const PhantomSpec& spec, const std::vector<std::size_t>& which) {
  const auto& g = ph.ute.geometry;
  for (std::size_t i = 0; i < g.voxel_count(); ++i) {
    const WorldPoint p = g.voxel_to_world(i);
    bool hit = false;
    for (auto w : which) hit = hit || (p - ph.truth[w].position).norm() <= spec.electrode_radius_mm + 2.0;
    if (!hit) continue;
    const Eigen::Vector3d q = (p - spec.head_center).cwiseQuotient(
        Eigen::Vector3d(spec.semi_axes_mm[0], spec.semi_axes_mm[1], spec.semi_axes_mm[2]));
    ph.ute.data[i] = static_cast<float>(q.squaredNorm() <= 1.0 ? spec.ute_head : spec.ute_bg);
  }
}

void check_set_invariants(const LabeledElectrodeSet& set, const ElectrodeTemplate& tpl,
                          const DetectionTrace& trace, const PipelineConfig& cfg) {
  REQUIRE(set.electrodes.size() == tpl.size());
  std::set<std::string> labels;
  std::set<std::tuple<double, double, double>> used;
  for (std::size_t i = 0; i < tpl.size(); ++i) {
    const auto& e = set.electrodes[i];
    CHECK(e.label == tpl.channels[i].label);
    labels.insert(e.label);
    if (e.source == ElectrodeSource::Hough) {
      bool found = false;
      for (const auto& c : trace.candidates) found = found || c.center == e.position;
      CHECK(found);
      CHECK(used.insert({e.position.x(), e.position.y(), e.position.z()}).second);
      CHECK(e.assign_dist_mm <= cfg.gate_dist_mm);
    } else {
      const double d = (e.position - trace.registered[i].position).norm();
      CHECK(d <= cfg.refine_radius_mm + 1e-9);
      if (e.fallback) CHECK(d == 0.0);
    }
  }
  CHECK(labels.size() == tpl.size());
}

}  // namespace

TEST_CASE("assignment basics") {
  LabeledPoints reg{{"A", {0, 0, 0}}, {"B", {20, 0, 0}}, {"C", {40, 0, 0}}};
  auto a = assign_candidates(reg, {cand(0, 0, 0), cand(20, 0, 0), cand(40, 0, 0)}, 15);
  for (std::size_t i = 0; i < 3; ++i) CHECK(a[i] == i);

  a = assign_candidates(reg, {}, 15);
  for (const auto& x : a) CHECK_FALSE(x.has_value());

  // one candidate between A and B, closer to B
  a = assign_candidates(reg, {cand(11, 0, 0)}, 15);
  CHECK_FALSE(a[0].has_value());
  CHECK(a[1] == 0u);
  // exact tie goes to the earlier label
  a = assign_candidates(reg, {cand(10, 0, 0)}, 15);
  CHECK(a[0] == 0u);
  CHECK_FALSE(a[1].has_value());
  // beyond the gate
  a = assign_candidates(reg, {cand(0, 16, 0)}, 15);
  CHECK_FALSE(a[0].has_value());
}

TEST_CASE("assignment is injective on random inputs") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 60);
  for (int t = 0; t < 100; ++t) {
    LabeledPoints reg;
    std::vector<SphereCandidate> cands;
    for (int i = 0; i < 20; ++i) reg.push_back({std::to_string(i), {u(rng), u(rng), u(rng)}});
    for (int i = 0; i < 25; ++i) cands.push_back(cand(u(rng), u(rng), u(rng)));
    const auto a = assign_candidates(reg, cands, 15);
    std::set<std::size_t> seen;
    for (std::size_t l = 0; l < a.size(); ++l) {
      if (!a[l]) continue;
      CHECK(seen.insert(*a[l]).second);
      CHECK((reg[l].position - cands[*a[l]].center).norm() <= 15.0);
    }
  }
}

TEST_CASE("local maximum refinement") {
  const auto g = Geometry::diagonal({30, 30, 30}, {1, 1, 1});
  Volume3D v(g, DType::F32);
  const BinaryMask all = complement(BinaryMask(g));
  v.at(19, 15, 15) = 1000.0f;
  auto r = refine_local_max(v, all, {15, 15, 15}, 10.0);
  CHECK_FALSE(r.fallback);
  CHECK(r.position.isApprox(WorldPoint(19, 15, 15)));
  CHECK(r.intensity == 1000.0);

  // uniform: lowest linear index inside the ball
  Volume3D flat(g, DType::F32);
  std::fill(flat.data.begin(), flat.data.end(), 5.0f);
  r = refine_local_max(flat, all, {15, 15, 15}, 3.0);
  CHECK(r.position.isApprox(WorldPoint(15, 15, 12)));

  // no VOI voxel in range
  BinaryMask corner(g);
  corner.set(g.index(0, 0, 0), true);
  r = refine_local_max(v, corner, {15, 15, 15}, 5.0);
  CHECK(r.fallback);
  CHECK(r.position == WorldPoint(15, 15, 15));
  CHECK(code_of([&] { refine_local_max(v, all, {15, 15, 15}, 0.0); }) == Errc::InvalidArgument);
}

TEST_CASE("config JSON round trip and validation") {
  PipelineConfig c;
  c.gate_dist_mm = 12.5;
  c.hough.r_max_mm = 8;
  c.icp_with_scale = false;
  const auto back = config_from_json(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));
  CHECK(code_of([] { config_from_json(nlohmann::json{{"gate", 3}}); }) == Errc::ParseError);
  CHECK(code_of([] { config_from_json(nlohmann::json{{"hough", {{"rmin", 3}}}}); }) ==
        Errc::ParseError);
  CHECK(code_of([] { config_from_json(nlohmann::json{{"gate_dist_mm", -1}}); }) ==
        Errc::InvalidArgument);
  CHECK(code_of([] { config_from_json(nlohmann::json{{"gate_dist_mm", "x"}}); }) ==
        Errc::ParseError);
}

TEST_CASE("transform JSON round trip") {
  SimilarityTransform t;
  t.rotation = Eigen::AngleAxisd(0.4, Eigen::Vector3d(1, 1, 0).normalized()).toRotationMatrix();
  t.translation = {1.5, -2, 3};
  t.scale = 91.25;
  const auto j = transform_to_json(t);
  CHECK(j.at("R").size() == 9);
  CHECK(j.at("R")[1] == t.rotation(0, 1));
  const auto back = transform_from_json(j);
  CHECK(back.rotation == t.rotation);
  CHECK(back.translation == t.translation);
  CHECK(back.scale == t.scale);
}

TEST_CASE("clean phantom end to end") {
  PhantomSpec spec;
  spec.t1_noise_sigma = 0;
  spec.ute_noise_sigma = 0;
  const Phantom ph = generate_phantom(spec);
  const auto tpl = default_template();
  PipelineConfig cfg;
  DetectionTrace trace;
  const auto set = detect_electrodes(ph.t1, ph.ute, tpl, cfg, &trace);
  check_set_invariants(set, tpl, trace, cfg);
  const auto report = detection_stats(position_errors(set.points(), ph.truth));
  CHECK(report.accuracy_pct == 100.0);
  CHECK(report.mean_pe_mm <= 1.5);
  for (std::size_t i = 1; i < trace.icp.residual_history.size(); ++i)
    CHECK(trace.icp.residual_history[i] <= trace.icp.residual_history[i - 1] + 1e-9);

  // identical inputs give identical output
  const auto again = detect_electrodes(ph.t1, ph.ute, tpl, cfg);
  CHECK(electrodes_csv(again) == electrodes_csv(set));
  CHECK(electrodes_json(again).dump() == electrodes_json(set).dump());
}

TEST_CASE("phantom with erased electrodes still yields every label") {
  PhantomSpec spec;
  spec.rng_seed = 4;
  Phantom ph = generate_phantom(spec);
  // spread over the cap interior, off the lowest ring
  const std::vector<std::size_t> erased{5, 14, 19, 30, 33, 39, 48, 59};
  erase_electrodes(ph, spec, erased);
  const auto tpl = default_template();
  PipelineConfig cfg;
  DetectionTrace trace;
  const auto set = detect_electrodes(ph.t1, ph.ute, tpl, cfg, &trace);
  check_set_invariants(set, tpl, trace, cfg);
  int hough = 0;
  for (const auto& e : set.electrodes) hough += e.source == ElectrodeSource::Hough;
  CHECK(hough >= 57);
  for (auto w : erased) CHECK(set.electrodes[w].source == ElectrodeSource::LocalMax);
}

TEST_CASE("pipeline errors name their stage") {
  PhantomSpec spec;
  spec.dims = {120, 140, 110};
  spec.head_center = {60, 70, 55};
  spec.semi_axes_mm = {45, 55, 40};
  spec.electrode_radius_mm = 3;
  spec.n_electrodes = 20;
  const Phantom ph = generate_phantom(spec);
  Volume3D flat = ph.ute;
  std::fill(flat.data.begin(), flat.data.end(), 1.0f);
  try {
    detect_electrodes(ph.t1, flat, default_template(), PipelineConfig{});
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::TooFewCandidates);
    CHECK(std::string(e.stage()) == "icp_register");
  }
  Volume3D empty_t1 = ph.t1;
  std::fill(empty_t1.data.begin(), empty_t1.data.end(), 0.0f);
  CHECK(code_of([&] { detect_electrodes(empty_t1, ph.ute, default_template(), PipelineConfig{}); }) ==
        Errc::ConstantVolume);
}

TEST_CASE("output formats") {
  LabeledElectrodeSet set;
  set.electrodes.push_back({"Cz", {1.5, 2, 3}, ElectrodeSource::Hough, 42, 0.25, false});
  set.electrodes.push_back({"Oz", {4, 5, 6}, ElectrodeSource::LocalMax, 200, 3, true});
  CHECK(electrodes_csv(set) ==
        "label,x_mm,y_mm,z_mm,source,score,assign_dist_mm\n"
        "Cz,1.5,2,3,hough,42,0.25\n"
        "Oz,4,5,6,local_max,200,3\n");
  const auto j = electrodes_json(set);
  CHECK(j.at("electrodes")[1].at("fallback") == true);
  CHECK(j.contains("transform"));
  CHECK(j.contains("config"));
  CHECK(candidates_csv({cand(1, 2, 3, 7)}) == "x_mm,y_mm,z_mm,radius_mm,score\n1,2,3,6,7\n");
}
