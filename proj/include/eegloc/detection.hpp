#pragma once

#include "eegloc/electrode_template.hpp"
#include "eegloc/hough.hpp"
#include "eegloc/morphology.hpp"
#include "eegloc/points.hpp"
#include "eegloc/registration.hpp"
#include "eegloc/volume.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace eegloc {

/// Every tunable of the pipeline in one place. JSON field names match the
/// member names; nested `hough` and `icp` objects.
struct PipelineConfig {
  double outer_margin_mm = 15.0;
  double inner_margin_mm = 2.0;
  HoughParams hough;
  int icp_max_iter = 100;
  double icp_tol = 1e-6;
  bool icp_with_scale = true;
  double gate_dist_mm = 15.0;
  double refine_radius_mm = 10.0;
  int workers = 0;

  void validate() const;
};

nlohmann::json config_to_json(const PipelineConfig& cfg);
/// Overlays the fields present in `j` onto `base`; unknown keys are rejected.
PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig base = {});

enum class ElectrodeSource { Hough, LocalMax };
const char* source_name(ElectrodeSource s) noexcept;

struct LabeledElectrode {
  std::string label;
  WorldPoint position = WorldPoint::Zero();
  ElectrodeSource source = ElectrodeSource::Hough;
  double score = 0.0;           // Hough score, or UTE intensity when refined
  double assign_dist_mm = 0.0;  // distance to the registered template position
  bool fallback = false;        // refinement found no VOI voxel in range
};

struct LabeledElectrodeSet {
  std::vector<LabeledElectrode> electrodes;  // template order
  SimilarityTransform transform;
  PipelineConfig config;

  LabeledPoints points() const;
};

/// One-to-one greedy matching on ascending distance (ties: earlier label,
/// then lower candidate index). Pairs farther than gate_dist_mm are never
/// accepted.
std::vector<std::optional<std::size_t>> assign_candidates(
    const LabeledPoints& registered, const std::vector<SphereCandidate>& candidates,
    double gate_dist_mm);

struct RefineResult {
  WorldPoint position = WorldPoint::Zero();
  double intensity = 0.0;
  bool fallback = false;
};

/// Brightest VOI voxel within radius_mm of `center` (ties: lowest linear
/// index). Without any VOI voxel in range, returns `center` with fallback.
RefineResult refine_local_max(const Volume3D& ute, const BinaryMask& voi,
                              const WorldPoint& center, double radius_mm);

/// Intermediate products of detect_electrodes, for inspection.
struct DetectionTrace {
  BinaryMask head;
  BinaryMask voi;  // on the UTE grid
  std::vector<SphereCandidate> candidates;
  IcpResult icp;
  LabeledPoints registered;
};

/// Head mask -> VOI shell -> Hough candidates -> template ICP -> gated
/// assignment -> local-maximum refinement of unmatched labels.
LabeledElectrodeSet detect_electrodes(const Volume3D& t1, const Volume3D& ute,
                                      const ElectrodeTemplate& tpl, const PipelineConfig& cfg,
                                      DetectionTrace* trace = nullptr);

/// Template channels placed by a transform (fiducial baseline output).
LabeledPoints place_template(const ElectrodeTemplate& tpl, const SimilarityTransform& t);

/// `label,x_mm,y_mm,z_mm,source,score,assign_dist_mm`
std::string electrodes_csv(const LabeledElectrodeSet& set);
/// Electrodes plus transform {R row-major, t, s} and config snapshot.
nlohmann::json electrodes_json(const LabeledElectrodeSet& set);

nlohmann::json transform_to_json(const SimilarityTransform& t);
SimilarityTransform transform_from_json(const nlohmann::json& j);

/// `x_mm,y_mm,z_mm,radius_mm,score`
std::string candidates_csv(const std::vector<SphereCandidate>& candidates);

}  // namespace eegloc
