#include "helpers.hpp"

#include "eegloc/pancake.hpp"
#include "eegloc/phantom.hpp"

#include <numbers>

using namespace eegloc;
using testutil::code_of;

TEST_CASE("projection geometry") {
  const WorldPoint c(10, 20, 30);
  LabeledPoints pts{{"top", c + Eigen::Vector3d(0, 0, 50)},
                    {"right", c + Eigen::Vector3d(50, 0, 0)},
                    {"front", c + Eigen::Vector3d(0, 50, 0)},
                    {"L", c + Eigen::Vector3d(-30, 20, 10)},
                    {"R", c + Eigen::Vector3d(30, 20, 10)}};
  const auto proj = project_pancake(pts, c, Eigen::Vector3d::UnitZ());
  CHECK(proj.points[0].u == doctest::Approx(0.0));
  CHECK(proj.points[0].v == doctest::Approx(0.0));
  CHECK(proj.points[1].u == doctest::Approx(std::numbers::pi / 2));
  CHECK(proj.points[1].v == doctest::Approx(0.0));
  CHECK(proj.points[2].u == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(proj.points[2].v == doctest::Approx(std::numbers::pi / 2));
  // sagittal mirror pair: u negated, v equal
  CHECK(proj.points[3].u == doctest::Approx(-proj.points[4].u));
  CHECK(proj.points[3].v == doctest::Approx(proj.points[4].v));
  // angular distance from the vertex is preserved
  for (const auto& p : proj.points) CHECK(std::hypot(p.u, p.v) <= std::numbers::pi);

  CHECK(code_of([&] { project_pancake({{"c", c}}, c, Eigen::Vector3d::UnitZ()); }) ==
        Errc::DegeneratePoint);
  CHECK(code_of([&] { project_pancake(pts, c, Eigen::Vector3d::Zero()); }) == Errc::InvalidArgument);
}

TEST_CASE("phantom truth projects to distinct points") {
  const PhantomSpec spec;
  const Phantom ph = generate_phantom(spec);
  const auto proj = project_pancake(ph.truth, spec.head_center, Eigen::Vector3d::UnitZ());
  REQUIRE(proj.points.size() == 65);
  double min_d = 1e9;
  for (std::size_t i = 0; i < proj.points.size(); ++i)
    for (std::size_t j = i + 1; j < proj.points.size(); ++j)
      min_d = std::min(min_d, std::hypot(proj.points[i].u - proj.points[j].u,
                                         proj.points[i].v - proj.points[j].v));
  CHECK(min_d > 0.0);
}

TEST_CASE("raster and text outputs") {
  LabeledPoints pts{{"Cz", {0, 0, 1}}, {"Fpz", {0, 1, 0.2}}};
  const auto proj = project_pancake(pts, WorldPoint::Zero(), Eigen::Vector3d::UnitZ());
  const auto img = rasterize_pancake(proj, 128);
  CHECK(img.width == 128);
  CHECK(img.height == 128);
  CHECK(img.pixels[64 * 128 + 64] > 0);  // Cz marker at the centre
  const std::string pgm = encode_pgm(img);
  CHECK(pgm.rfind("P5\n128 128\n255\n", 0) == 0);
  CHECK(pgm.size() == std::string("P5\n128 128\n255\n").size() + 128 * 128);
  CHECK(encode_pgm(rasterize_pancake(proj, 128)) == pgm);
  const std::string csv = pancake_csv(proj);
  CHECK(csv.rfind("label,u,v\nCz,0,0\n", 0) == 0);
}

TEST_CASE("sphere centre fit") {
  LabeledPoints pts;
  const WorldPoint c(5, -3, 12);
  const auto tpl = default_template();
  for (const auto& ch : tpl.channels) pts.push_back({ch.label, c + 80.0 * ch.unit_pos});
  CHECK((fit_sphere_center(pts) - c).norm() < 1e-9);
  CHECK(code_of([] { fit_sphere_center({{"a", {0, 0, 0}}, {"b", {1, 0, 0}}}); }) ==
        Errc::TooFewPoints);
}
