#include "helpers.hpp"

#include "eegloc/cli.hpp"
#include "eegloc/csv.hpp"

#include <nlohmann/json.hpp>

using namespace eegloc;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "eegloc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

nlohmann::json load(const std::filesystem::path& p) { return nlohmann::json::parse(testutil::slurp(p)); }

}  // namespace

TEST_CASE("config precedence: flag over file over default") {
  const double dflt = PipelineConfig{}.gate_dist_mm;
  const nlohmann::json file{{"gate_dist_mm", 11.0}, {"refine_radius_mm", 7.0}};
  for (bool has_file : {false, true}) {
    for (bool has_flag : {false, true}) {
      cli::ConfigOverrides flags;
      if (has_flag) flags.gate_dist_mm = 9.0;
      const auto cfg =
          cli::resolve_config(has_file ? std::optional<nlohmann::json>{file} : std::nullopt, flags);
      const double expect = has_flag ? 9.0 : has_file ? 11.0 : dflt;
      CAPTURE(has_file);
      CAPTURE(has_flag);
      CHECK(cfg.gate_dist_mm == expect);
      CHECK(cfg.refine_radius_mm == (has_file ? 7.0 : PipelineConfig{}.refine_radius_mm));
    }
  }
  cli::ConfigOverrides all;
  all.outer_margin_mm = 20;
  all.inner_margin_mm = 1;
  all.refine_radius_mm = 8;
  all.workers = 3;
  const auto cfg = cli::resolve_config(std::optional<nlohmann::json>{file}, all);
  CHECK(cfg.outer_margin_mm == 20);
  CHECK(cfg.inner_margin_mm == 1);
  CHECK(cfg.refine_radius_mm == 8);
  CHECK(cfg.workers == 3);
  CHECK(cfg.gate_dist_mm == 11);
}

TEST_CASE("usage and I/O exit codes") {
  const auto dir = testutil::scratch_dir("cli_codes");
  CHECK(run({}).code == 1);
  CHECK(run({"detect", "--t1", "a.nii", "--out", "x.csv"}).code == 1);  // missing --ute
  CHECK(run({"--help"}).code == 0);
  auto r = run({"detect", "--t1", (dir / "none.nii").string(), "--ute", "u.nii", "--out",
                (dir / "o.csv").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("read_nifti") != std::string::npos);
  r = run({"eval", "--detected", (dir / "none.csv").string(), "--truth", "t.csv", "--report", "r.json"});
  CHECK(r.code == 2);
  csv::write_text(dir / "bad.json", "{\"gate_dist_mm\": -3}");
  r = run({"detect", "--t1", "a.nii", "--ute", "b.nii", "--out", (dir / "o.csv").string(),
           "--config", (dir / "bad.json").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("detect") != std::string::npos);
}

TEST_CASE("phantom, detect, eval, compare, pancake, baseline chain") {
  const auto dir = testutil::scratch_dir("cli_chain");
  const auto p = [&](const char* n) { return (dir / n).string(); };
  REQUIRE(run({"phantom", "--out-dir", p("ph"), "--seed", "3"}).code == 0);
  REQUIRE(run({"detect", "--t1", p("ph/t1.nii"), "--ute", p("ph/ute.nii"), "--out", p("det.csv"),
               "--json", p("det.json"), "--candidates", p("cand.csv")})
              .code == 0);
  REQUIRE(run({"eval", "--detected", p("det.csv"), "--truth", p("ph/truth.csv"), "--report",
               p("rep.json")})
              .code == 0);
  const auto rep = load(p("rep.json"));
  CHECK(rep.at("accuracy_pct").get<double>() >= 95.0);
  CHECK(rep.at("threshold_mm").get<double>() == 10.0);

  REQUIRE(run({"baseline", "--fiducials", p("ph/fiducials.csv"), "--out", p("base.csv")}).code == 0);
  REQUIRE(run({"eval", "--detected", p("base.csv"), "--truth", p("ph/truth.csv"), "--threshold-mm",
               "5", "--report", p("brep.json")})
              .code == 0);
  CHECK(load(p("brep.json")).at("threshold_mm").get<double>() == 5.0);
  REQUIRE(run({"compare", "--a", p("rep.json"), "--b", p("brep.json"), "--report", p("cmp.json")})
              .code == 0);
  CHECK(load(p("cmp.json")).at("verdict") == "a_better");

  REQUIRE(run({"pancake", "--electrodes", p("det.csv"), "--out", p("pan.pgm")}).code == 0);
  CHECK(testutil::slurp(p("pan.pgm")).rfind("P5\n", 0) == 0);
  CHECK(csv::read(p("pan.pgm.csv")).rows.size() == 65);
  REQUIRE(run({"pancake", "--electrodes", p("det.csv"), "--out", p("pan2.pgm"), "--t1",
               p("ph/t1.nii"), "--coords", p("pan2.csv")})
              .code == 0);
  CHECK(run({"pancake", "--electrodes", p("det.csv"), "--out", p("pan3.pgm"), "--center", "1,2"}).code == 1);

  REQUIRE(run({"template", "--out", p("tpl.csv")}).code == 0);
  CHECK(testutil::slurp(p("tpl.csv")) == testutil::slurp(EEGLOC_DATA_DIR "/eeg_template_65.csv"));
}
