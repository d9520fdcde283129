#include "eegloc/detection.hpp"

#include "eegloc/csv.hpp"
#include "eegloc/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

namespace eegloc {
namespace {

using nlohmann::json;

void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* where) {
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      throw Error(Errc::ParseError, "config", std::string("unknown key '") + key + "' in " + where);
    }
  }
}

template <typename T>
void overlay(const json& j, const char* key, T& field) {
  if (j.contains(key)) {
    try {
      field = j.at(key).get<T>();
    } catch (const json::exception& e) {
      throw Error(Errc::ParseError, "config", std::string("bad value for '") + key + "': " + e.what());
    }
  }
}

}  // namespace

void PipelineConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(Errc::InvalidArgument, "config", what); };
  if (!(outer_margin_mm >= 0.0) || !(inner_margin_mm >= 0.0)) fail("margins must be >= 0");
  hough.validate();
  if (icp_max_iter <= 0) fail("icp.max_iter must be positive");
  if (!(icp_tol >= 0.0)) fail("icp.tol must be >= 0");
  if (!(gate_dist_mm > 0.0)) fail("gate_dist_mm must be > 0");
  if (!(refine_radius_mm > 0.0)) fail("refine_radius_mm must be > 0");
}

json config_to_json(const PipelineConfig& c) {
  return json{{"outer_margin_mm", c.outer_margin_mm},
              {"inner_margin_mm", c.inner_margin_mm},
              {"hough",
               {{"r_min_mm", c.hough.r_min_mm},
                {"r_max_mm", c.hough.r_max_mm},
                {"r_step_mm", c.hough.r_step_mm},
                {"grad_threshold_frac", c.hough.grad_threshold_frac},
                {"nms_min_dist_mm", c.hough.nms_min_dist_mm},
                {"max_candidates", c.hough.max_candidates},
                {"min_score_frac", c.hough.min_score_frac}}},
              {"icp",
               {{"max_iter", c.icp_max_iter}, {"tol", c.icp_tol}, {"with_scale", c.icp_with_scale}}},
              {"gate_dist_mm", c.gate_dist_mm},
              {"refine_radius_mm", c.refine_radius_mm}};
}

PipelineConfig config_from_json(const json& j, PipelineConfig c) {
  if (!j.is_object()) throw Error(Errc::ParseError, "config", "config must be a JSON object");
  reject_unknown(j,
                 {"outer_margin_mm", "inner_margin_mm", "hough", "icp", "gate_dist_mm",
                  "refine_radius_mm", "workers"},
                 "config");
  overlay(j, "outer_margin_mm", c.outer_margin_mm);
  overlay(j, "inner_margin_mm", c.inner_margin_mm);
  overlay(j, "gate_dist_mm", c.gate_dist_mm);
  overlay(j, "refine_radius_mm", c.refine_radius_mm);
  overlay(j, "workers", c.workers);
  if (j.contains("hough")) {
    const json& h = j.at("hough");
    reject_unknown(h,
                   {"r_min_mm", "r_max_mm", "r_step_mm", "grad_threshold_frac",
                    "nms_min_dist_mm", "max_candidates", "min_score_frac"},
                   "hough");
    overlay(h, "r_min_mm", c.hough.r_min_mm);
    overlay(h, "r_max_mm", c.hough.r_max_mm);
    overlay(h, "r_step_mm", c.hough.r_step_mm);
    overlay(h, "grad_threshold_frac", c.hough.grad_threshold_frac);
    overlay(h, "nms_min_dist_mm", c.hough.nms_min_dist_mm);
    overlay(h, "max_candidates", c.hough.max_candidates);
    overlay(h, "min_score_frac", c.hough.min_score_frac);
  }
  if (j.contains("icp")) {
    const json& i = j.at("icp");
    reject_unknown(i, {"max_iter", "tol", "with_scale"}, "icp");
    overlay(i, "max_iter", c.icp_max_iter);
    overlay(i, "tol", c.icp_tol);
    overlay(i, "with_scale", c.icp_with_scale);
  }
  c.validate();
  return c;
}

const char* source_name(ElectrodeSource s) noexcept {
  return s == ElectrodeSource::Hough ? "hough" : "local_max";
}

LabeledPoints LabeledElectrodeSet::points() const {
  LabeledPoints out;
  out.reserve(electrodes.size());
  for (const auto& e : electrodes) out.push_back({e.label, e.position});
  return out;
}

std::vector<std::optional<std::size_t>> assign_candidates(
    const LabeledPoints& registered, const std::vector<SphereCandidate>& candidates,
    double gate_dist_mm) {
  struct Pair {
    double dist;
    std::size_t label;
    std::size_t cand;
  };
  std::vector<Pair> pairs;
  for (std::size_t l = 0; l < registered.size(); ++l)
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      const double d = (registered[l].position - candidates[c].center).norm();
      if (d <= gate_dist_mm) pairs.push_back({d, l, c});
    }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    return std::tie(a.dist, a.label, a.cand) < std::tie(b.dist, b.label, b.cand);
  });
  std::vector<std::optional<std::size_t>> out(registered.size());
  std::vector<char> taken(candidates.size(), 0);
  for (const auto& p : pairs) {
    if (out[p.label] || taken[p.cand]) continue;
    out[p.label] = p.cand;
    taken[p.cand] = 1;
  }
  return out;
}

RefineResult refine_local_max(const Volume3D& ute, const BinaryMask& voi,
                              const WorldPoint& center, double radius_mm) {
  if (!(radius_mm > 0.0)) {
    throw Error(Errc::InvalidArgument, "refine_local_max", "radius_mm must be > 0");
  }
  if (!(ute.geometry == voi.geometry())) {
    throw Error(Errc::GeometryMismatch, "refine_local_max", "UTE volume and VOI differ in geometry");
  }
  const Geometry& g = ute.geometry;
  // Index-space bounding box of the world-space search ball.
  Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector3d hi = -lo;
  for (int corner = 0; corner < 8; ++corner) {
    const Eigen::Vector3d offset((corner & 1 ? 1 : -1) * radius_mm,
                                 (corner & 2 ? 1 : -1) * radius_mm,
                                 (corner & 4 ? 1 : -1) * radius_mm);
    const Eigen::Vector3d v = g.world_to_voxel(center + offset);
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  std::array<int, 3> from{}, to{};
  for (int a = 0; a < 3; ++a) {
    from[a] = std::max(0, static_cast<int>(std::floor(lo[a])));
    to[a] = std::min(g.dims()[a] - 1, static_cast<int>(std::ceil(hi[a])));
  }
  RefineResult best;
  best.position = center;
  best.fallback = true;
  std::size_t best_idx = 0;
  const double r2 = radius_mm * radius_mm;
  for (int k = from[2]; k <= to[2]; ++k)
    for (int j = from[1]; j <= to[1]; ++j)
      for (int i = from[0]; i <= to[0]; ++i) {
        const std::size_t idx = g.index(i, j, k);
        if (!voi.test(idx)) continue;
        const WorldPoint p = g.voxel_to_world(Eigen::Vector3d(i, j, k));
        if ((p - center).squaredNorm() > r2) continue;
        const double v = ute.data[idx];
        if (best.fallback || v > best.intensity || (v == best.intensity && idx < best_idx)) {
          best = {p, v, false};
          best_idx = idx;
        }
      }
  return best;
}

LabeledPoints place_template(const ElectrodeTemplate& tpl, const SimilarityTransform& t) {
  LabeledPoints out;
  out.reserve(tpl.size());
  for (const auto& c : tpl.channels) out.push_back({c.label, t.apply(c.unit_pos)});
  return out;
}

LabeledElectrodeSet detect_electrodes(const Volume3D& t1, const Volume3D& ute,
                                      const ElectrodeTemplate& tpl, const PipelineConfig& cfg,
                                      DetectionTrace* trace) {
  cfg.validate();
  const MorphologyOptions morph{cfg.workers};
  BinaryMask head = extract_head_mask(t1, morph);
  BinaryMask voi = build_voi_shell(head, cfg.outer_margin_mm, cfg.inner_margin_mm, morph);
  if (!(voi.geometry() == ute.geometry)) voi = resample_nearest(voi, ute.geometry);

  HoughParams hp = cfg.hough;
  hp.workers = cfg.workers;
  const auto candidates = detect_spheres(ute, voi, hp);

  PointList cand_pts;
  cand_pts.reserve(candidates.size());
  for (const auto& c : candidates) cand_pts.push_back(c.center);
  IcpOptions icp;
  icp.max_iter = cfg.icp_max_iter;
  icp.tol = cfg.icp_tol;
  icp.with_scale = cfg.icp_with_scale;
  icp.workers = cfg.workers;
  const auto unit = tpl.unit_positions();
  IcpResult reg = icp_register(unit, cand_pts, icp);

  const LabeledPoints registered = place_template(tpl, reg.transform);
  const auto assignment = assign_candidates(registered, candidates, cfg.gate_dist_mm);

  LabeledElectrodeSet out;
  out.transform = reg.transform;
  out.config = cfg;
  for (std::size_t l = 0; l < registered.size(); ++l) {
    LabeledElectrode e;
    e.label = registered[l].label;
    if (assignment[l]) {
      const auto& c = candidates[*assignment[l]];
      e.position = c.center;
      e.source = ElectrodeSource::Hough;
      e.score = static_cast<double>(c.score);
    } else {
      const auto r = refine_local_max(ute, voi, registered[l].position, cfg.refine_radius_mm);
      e.position = r.position;
      e.source = ElectrodeSource::LocalMax;
      e.score = r.intensity;
      e.fallback = r.fallback;
    }
    e.assign_dist_mm = (e.position - registered[l].position).norm();
    out.electrodes.push_back(std::move(e));
  }

  if (trace) {
    trace->head = std::move(head);
    trace->voi = std::move(voi);
    trace->candidates = candidates;
    trace->icp = std::move(reg);
    trace->registered = registered;
  }
  return out;
}

std::string electrodes_csv(const LabeledElectrodeSet& set) {
  std::string s = "label,x_mm,y_mm,z_mm,source,score,assign_dist_mm\n";
  for (const auto& e : set.electrodes) {
    s += e.label + "," + csv::format_double(e.position.x()) + "," +
         csv::format_double(e.position.y()) + "," + csv::format_double(e.position.z()) + "," +
         source_name(e.source) + "," + csv::format_double(e.score) + "," +
         csv::format_double(e.assign_dist_mm) + "\n";
  }
  return s;
}

json transform_to_json(const SimilarityTransform& t) {
  json r = json::array();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r.push_back(t.rotation(i, j));
  return json{{"R", r},
              {"t", {t.translation.x(), t.translation.y(), t.translation.z()}},
              {"s", t.scale}};
}

SimilarityTransform transform_from_json(const json& j) {
  SimilarityTransform t;
  try {
    const auto r = j.at("R").get<std::vector<double>>();
    const auto tr = j.at("t").get<std::vector<double>>();
    if (r.size() != 9 || tr.size() != 3) throw std::runtime_error("R needs 9 and t needs 3 numbers");
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) t.rotation(i, k) = r[3 * i + k];
    t.translation = Eigen::Vector3d(tr[0], tr[1], tr[2]);
    t.scale = j.at("s").get<double>();
  } catch (const std::exception& e) {
    throw Error(Errc::ParseError, "transform", e.what());
  }
  return t;
}

json electrodes_json(const LabeledElectrodeSet& set) {
  json electrodes = json::array();
  for (const auto& e : set.electrodes) {
    electrodes.push_back({{"label", e.label},
                          {"x_mm", e.position.x()},
                          {"y_mm", e.position.y()},
                          {"z_mm", e.position.z()},
                          {"source", source_name(e.source)},
                          {"score", e.score},
                          {"assign_dist_mm", e.assign_dist_mm},
                          {"fallback", e.fallback}});
  }
  return json{{"electrodes", electrodes},
              {"transform", transform_to_json(set.transform)},
              {"config", config_to_json(set.config)}};
}

std::string candidates_csv(const std::vector<SphereCandidate>& candidates) {
  std::string s = "x_mm,y_mm,z_mm,radius_mm,score\n";
  for (const auto& c : candidates) {
    s += csv::format_double(c.center.x()) + "," + csv::format_double(c.center.y()) + "," +
         csv::format_double(c.center.z()) + "," + csv::format_double(c.radius_mm) + "," +
         std::to_string(c.score) + "\n";
  }
  return s;
}

}  // namespace eegloc
