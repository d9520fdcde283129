#include "eegloc/cli.hpp"

#include "eegloc/csv.hpp"
#include "eegloc/error.hpp"
#include "eegloc/evaluation.hpp"
#include "eegloc/morphology.hpp"
#include "eegloc/nifti.hpp"
#include "eegloc/pancake.hpp"
#include "eegloc/phantom.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace eegloc::cli {
namespace {

using nlohmann::json;

json read_json(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(Errc::MissingFile, "read_json", "no such file: " + path.string());
  }
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoFailure, "read_json", "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, "read_json", path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  csv::write_text(path, j.dump(2) + "\n");
}

Eigen::Vector3d parse_triple(const std::string& s, const char* what) {
  std::stringstream ss(s);
  std::string item;
  std::vector<double> v;
  while (std::getline(ss, item, ',')) v.push_back(csv::parse_double(item, what));
  if (v.size() != 3) {
    throw Error(Errc::InvalidArgument, "cli", std::string(what) + " needs three comma-separated numbers");
  }
  return {v[0], v[1], v[2]};
}

ElectrodeTemplate template_or_default(const std::string& path) {
  return path.empty() ? default_template() : load_template(path);
}

}  // namespace

PipelineConfig resolve_config(const std::optional<json>& file, const ConfigOverrides& flags) {
  PipelineConfig cfg;
  if (file) cfg = config_from_json(*file, cfg);
  if (flags.outer_margin_mm) cfg.outer_margin_mm = *flags.outer_margin_mm;
  if (flags.inner_margin_mm) cfg.inner_margin_mm = *flags.inner_margin_mm;
  if (flags.gate_dist_mm) cfg.gate_dist_mm = *flags.gate_dist_mm;
  if (flags.refine_radius_mm) cfg.refine_radius_mm = *flags.refine_radius_mm;
  if (flags.workers) cfg.workers = *flags.workers;
  cfg.validate();
  return cfg;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"EEG electrode localisation from T1 + UTE MR volumes", "eegloc"};
  app.require_subcommand(1);

  // detect
  auto* detect = app.add_subcommand("detect", "Detect and label electrodes");
  std::string t1_path, ute_path, template_path, out_path, json_path, config_path, cand_path;
  ConfigOverrides overrides;
  detect->add_option("--t1", t1_path, "T1 volume (.nii)")->required();
  detect->add_option("--ute", ute_path, "UTE volume (.nii)")->required();
  detect->add_option("--template", template_path, "Template CSV (default: built-in 65 channels)");
  detect->add_option("--out", out_path, "Electrode CSV output")->required();
  detect->add_option("--json", json_path, "JSON output with transform and config");
  detect->add_option("--config", config_path, "Pipeline config JSON");
  detect->add_option("--candidates", cand_path, "Hough candidate CSV output");
  detect->add_option("--outer-margin-mm", overrides.outer_margin_mm,
                     "VOI shell: head-mask dilation (mm)");
  detect->add_option("--inner-margin-mm", overrides.inner_margin_mm,
                     "VOI shell: head-mask erosion (mm)");
  detect->add_option("--gate-mm", overrides.gate_dist_mm,
                     "Max candidate distance from the registered template (mm)");
  detect->add_option("--refine-mm", overrides.refine_radius_mm,
                     "Local-maximum search radius for unmatched labels (mm)");
  detect->add_option("--workers", overrides.workers, "Worker threads (0 = all cores)");

  // phantom
  auto* phantom = app.add_subcommand("phantom", "Generate a synthetic T1/UTE phantom");
  std::string spec_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> phantom_workers;
  phantom->add_option("--spec", spec_path, "Phantom spec JSON (default: built-in)");
  phantom->add_option("--out-dir", out_dir, "Output directory")->required();
  phantom->add_option("--seed", seed, "RNG seed (overrides rng_seed in --spec)");
  phantom->add_option("--template", template_path, "Template CSV");
  phantom->add_option("--workers", phantom_workers, "Worker threads (0 = all cores)");

  // eval
  auto* eval = app.add_subcommand("eval", "Score detections against ground truth");
  std::string detected_path, truth_path, report_path;
  double threshold_mm = 10.0;
  eval->add_option("--detected", detected_path, "Detected electrode CSV")->required();
  eval->add_option("--truth", truth_path, "Ground-truth CSV (label,x_mm,y_mm,z_mm)")->required();
  eval->add_option("--threshold-mm", threshold_mm, "Detection criterion (PE < threshold)");
  eval->add_option("--report", report_path, "Report JSON output")->required();

  // compare
  auto* compare = app.add_subcommand("compare", "Paired comparison of two eval reports");
  std::string a_path, b_path;
  compare->add_option("--a", a_path, "Report of method A (UTE pipeline)")->required();
  compare->add_option("--b", b_path, "Report of method B (baseline)")->required();
  compare->add_option("--report", report_path, "Comparison JSON output")->required();

  // pancake
  auto* pancake = app.add_subcommand("pancake", "2D azimuthal view of electrode positions");
  std::string electrodes_path, pgm_path, coords_path, center_arg, axis_arg;
  int size_px = 512;
  pancake->add_option("--electrodes", electrodes_path, "CSV with label,x_mm,y_mm,z_mm")->required();
  pancake->add_option("--out", pgm_path, "PGM image output")->required();
  pancake->add_option("--coords", coords_path, "Projected coordinates CSV (default: <out>.csv)");
  pancake->add_option("--center", center_arg, "Projection centre x,y,z in mm");
  pancake->add_option("--t1", t1_path, "T1 volume; centre = head-mask centroid");
  pancake->add_option("--vertex-axis", axis_arg, "Vertex direction x,y,z (default 0,0,1)");
  pancake->add_option("--size", size_px, "Image size in pixels")->check(CLI::Range(64, 8192));

  // baseline
  auto* baseline = app.add_subcommand("baseline", "Place the template from five fiducials");
  std::string fiducials_path;
  baseline->add_option("--fiducials", fiducials_path, "CSV with nasion,inion,lpa,rpa,vertex rows")->required();
  baseline->add_option("--template", template_path, "Template CSV");
  baseline->add_option("--out", out_path, "Electrode CSV output")->required();

  // template
  auto* tmpl = app.add_subcommand("template", "Write the built-in template CSV");
  tmpl->add_option("--out", out_path, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    app.exit(e, out, err);
    return 1;
  }

  const char* stage = "cli";
  try {
    if (*detect) {
      stage = "detect";
      std::optional<json> file;
      if (!config_path.empty()) file = read_json(config_path);
      const PipelineConfig cfg = resolve_config(file, overrides);
      const ElectrodeTemplate tpl = template_or_default(template_path);
      const Volume3D t1 = read_nifti(t1_path);
      const Volume3D ute = read_nifti(ute_path);
      DetectionTrace trace;
      const auto set = detect_electrodes(t1, ute, tpl, cfg, &trace);
      csv::write_text(out_path, electrodes_csv(set));
      if (!json_path.empty()) write_json(json_path, electrodes_json(set));
      if (!cand_path.empty()) csv::write_text(cand_path, candidates_csv(trace.candidates));
      int hough = 0;
      for (const auto& e : set.electrodes) hough += e.source == ElectrodeSource::Hough;
      out << "detect: " << set.electrodes.size() << " electrodes (" << hough << " from Hough, "
          << trace.candidates.size() << " candidates, ICP residual "
          << trace.icp.final_residual() << " mm)\n";
    } else if (*phantom) {
      stage = "phantom";
      PhantomSpec spec;
      if (!spec_path.empty()) spec = phantom_spec_from_json(read_json(spec_path));
      if (seed) spec.rng_seed = *seed;
      if (phantom_workers) spec.workers = *phantom_workers;
      const Phantom ph = generate_phantom(spec, template_or_default(template_path));
      write_phantom(ph, spec, out_dir);
      out << "phantom: wrote " << ph.truth.size() << " electrodes to " << out_dir << "\n";
    } else if (*eval) {
      stage = "eval";
      const auto pe = position_errors(read_labeled_points(detected_path), read_labeled_points(truth_path));
      const auto report = detection_stats(pe, threshold_mm);
      write_json(report_path, report_to_json(report));
      out << "eval: accuracy " << report.accuracy_pct << "% (FN " << report.fn_count << "), mean PE "
          << report.mean_pe_mm << " mm\n";
    } else if (*compare) {
      stage = "compare";
      const auto a = report_from_json(read_json(a_path));
      const auto b = report_from_json(read_json(b_path));
      const auto cmp = compare_methods(a.per_label_pe_mm, b.per_label_pe_mm);
      write_json(report_path, comparison_to_json(cmp));
      out << "compare: mean A " << cmp.mean_a_mm << " mm, mean B " << cmp.mean_b_mm
          << " mm, p = " << cmp.ttest.p_two_sided << " (" << cmp.verdict << ")\n";
    } else if (*pancake) {
      stage = "pancake";
      const LabeledPoints pts = read_labeled_points(electrodes_path);
      WorldPoint center;
      if (!center_arg.empty()) {
        center = parse_triple(center_arg, "--center");
      } else if (!t1_path.empty()) {
        center = mask_centroid(extract_head_mask(read_nifti(t1_path)));
      } else {
        center = fit_sphere_center(pts);
      }
      const Eigen::Vector3d axis =
          axis_arg.empty() ? Eigen::Vector3d::UnitZ() : parse_triple(axis_arg, "--vertex-axis");
      const auto proj = project_pancake(pts, center, axis);
      csv::write_text(pgm_path, encode_pgm(rasterize_pancake(proj, size_px)));
      csv::write_text(coords_path.empty() ? pgm_path + ".csv" : coords_path, pancake_csv(proj));
      out << "pancake: " << proj.points.size() << " points\n";
    } else if (*baseline) {
      stage = "baseline";
      const ElectrodeTemplate tpl = template_or_default(template_path);
      const auto fid = fiducials_from_points(read_labeled_points(fiducials_path));
      write_labeled_points(place_template(tpl, fiducial_register(tpl, fid)), out_path);
      out << "baseline: placed " << tpl.size() << " electrodes\n";
    } else if (*tmpl) {
      stage = "template";
      csv::write_text(out_path, template_csv(default_template()));
    }
  } catch (const Error& e) {
    err << "error [" << stage << "/" << e.stage() << "]: " << e.what() << "\n";
    return is_io_error(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error [" << stage << "]: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace eegloc::cli
