#include "helpers.hpp"

#include "eegloc/electrode_template.hpp"

#include <set>

using namespace eegloc;
using testutil::code_of;

TEST_CASE("default template contract") {
  const auto tpl = default_template();
  CHECK(tpl.size() == 65);
  std::set<std::string> labels;
  for (const auto& c : tpl.channels) {
    CHECK(c.unit_pos.norm() == doctest::Approx(1.0).epsilon(1e-6));
    labels.insert(c.label);
  }
  CHECK(labels.size() == 65);
  for (auto f : kAllFiducials) CHECK(tpl.fiducial(f).norm() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(tpl.fiducial(Fiducial::Nasion).y() > 0.99);
  CHECK(tpl.fiducial(Fiducial::Rpa).x() > 0.99);
  CHECK(tpl.fiducial(Fiducial::Vertex).z() > 0.99);
  for (const char* l : {"Cz", "Fpz", "Oz", "T7", "T8", "Fp1", "O2"}) CHECK(labels.count(l) == 1);
}

TEST_CASE("template CSV round trip and shipped asset") {
  const auto tpl = default_template();
  const auto back = parse_template(template_csv(tpl));
  REQUIRE(back.size() == tpl.size());
  for (std::size_t i = 0; i < tpl.size(); ++i) {
    CHECK(back.channels[i].label == tpl.channels[i].label);
    CHECK((back.channels[i].unit_pos - tpl.channels[i].unit_pos).norm() < 1e-12);
  }
  const auto shipped = load_template(EEGLOC_DATA_DIR "/eeg_template_65.csv");
  CHECK(template_csv(shipped) == template_csv(tpl));
}

TEST_CASE("template parse errors") {
  const std::string head = "label,ux,uy,uz,is_fiducial\n";
  const std::string fids =
      "nasion,0,1,0,nasion\ninion,0,-1,0,inion\nlpa,-1,0,0,lpa\nrpa,1,0,0,rpa\nvertex,0,0,1,vertex\n";
  CHECK(parse_template(head + "Cz,0,0,1,\n" + fids).size() == 1);
  CHECK(code_of([&] { parse_template(head + "Cz,0,0,1,\nCz,0,0,1,\n" + fids); }) ==
        Errc::DuplicateLabel);
  CHECK(code_of([&] { parse_template(head + "Cz,0,0,0,\n" + fids); }) == Errc::NonUnitVector);
  CHECK(code_of([&] { parse_template(head + "Cz,0,0,1.2,\n" + fids); }) == Errc::NonUnitVector);
  // small deviations are normalised
  const auto t = parse_template(head + "Cz,0,0,1.03,\n" + fids);
  CHECK(t.channels[0].unit_pos.norm() == doctest::Approx(1.0));
  CHECK(code_of([&] { parse_template(head + "Cz,0,0,1,\nnasion,0,1,0,nasion\n"); }) ==
        Errc::MissingFiducial);
  CHECK(code_of([&] { parse_template("label,ux,uy\nCz,0,0\n"); }) == Errc::ParseError);
  CHECK(code_of([&] { load_template("/nonexistent/template.csv"); }) == Errc::MissingFile);
}
