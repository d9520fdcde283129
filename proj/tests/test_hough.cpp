#include "helpers.hpp"

#include "eegloc/hough.hpp"
#include "eegloc/phantom.hpp"

using namespace eegloc;
using testutil::code_of;

namespace {

BinaryMask full_mask(const Geometry& g) { return complement(BinaryMask(g)); }

Volume3D two_spheres(const WorldPoint& a, const WorldPoint& b) {
  Volume3D v = sphere_volume({81, 61, 61}, {1, 1, 1}, a, 6.0, 200.0, 10.0);
  const Volume3D w = sphere_volume({81, 61, 61}, {1, 1, 1}, b, 6.0, 200.0, 10.0);
  for (std::size_t i = 0; i < v.data.size(); ++i) v.data[i] = std::max(v.data[i], w.data[i]);
  return v;
}

// Copies `v` into a larger grid at an integer voxel offset.
Volume3D shifted(const Volume3D& v, std::array<int, 3> off, std::array<int, 3> dims) {
  Volume3D out(Geometry::diagonal(dims, {1, 1, 1}), v.dtype);
  std::fill(out.data.begin(), out.data.end(), v.data[0]);
  const auto& d = v.geometry.dims();
  for (int k = 0; k < d[2]; ++k)
    for (int j = 0; j < d[1]; ++j)
      for (int i = 0; i < d[0]; ++i) out.at(i + off[0], j + off[1], k + off[2]) = v.at(i, j, k);
  return out;
}

BinaryMask shifted(const BinaryMask& m, std::array<int, 3> off, std::array<int, 3> dims) {
  const auto g = Geometry::diagonal(dims, {1, 1, 1});
  BinaryMask out(g);
  const auto& d = m.geometry().dims();
  for (int k = 0; k < d[2]; ++k)
    for (int j = 0; j < d[1]; ++j)
      for (int i = 0; i < d[0]; ++i)
        out.set(g.index(i + off[0], j + off[1], k + off[2]), m.test(i, j, k));
  return out;
}

}  // namespace

TEST_CASE("gradient of ramps") {
  const auto g = Geometry::diagonal({5, 5, 5}, {1, 1, 1});
  Volume3D v(g, DType::F32);
  for (int k = 0; k < 5; ++k)
    for (int j = 0; j < 5; ++j)
      for (int i = 0; i < 5; ++i) v.at(i, j, k) = 2.0f * i;
  auto grad = gradient(v);
  for (std::size_t i = 0; i < grad.size(); ++i) {
    CHECK(grad[i][0] == doctest::Approx(2.0));
    CHECK(grad[i][1] == 0.0f);
    CHECK(grad[i][2] == 0.0f);
  }

  const auto g2 = Geometry::diagonal({5, 5, 5}, {2, 2, 2});
  Volume3D r(g2, DType::F32);
  for (int k = 0; k < 5; ++k)
    for (int j = 0; j < 5; ++j)
      for (int i = 0; i < 5; ++i) r.at(i, j, k) = static_cast<float>(i);
  CHECK(gradient(r)[g2.index(2, 2, 2)][0] == doctest::Approx(0.5));

  Volume3D c(g, DType::F32);
  std::fill(c.data.begin(), c.data.end(), 7.0f);
  for (const auto& x : gradient(c)) CHECK((x[0] == 0.0f && x[1] == 0.0f && x[2] == 0.0f));

  Volume3D tiny(Geometry::diagonal({2, 5, 5}, {1, 1, 1}), DType::F32);
  CHECK(code_of([&] { gradient(tiny); }) == Errc::VolumeTooSmall);
}

TEST_CASE("single sphere is found at its centre and radius") {
  for (double r : {4.0, 5.0, 6.0, 7.0, 8.0}) {
    const WorldPoint c(50, 50, 50);
    const Volume3D v = sphere_volume({101, 101, 101}, {1, 1, 1}, c, r, 200.0, 10.0);
    const auto cands = detect_spheres(v, full_mask(v.geometry), HoughParams{});
    REQUIRE_FALSE(cands.empty());
    CAPTURE(r);
    CHECK((cands[0].center - c).norm() <= 1.0);
    CHECK(std::abs(cands[0].radius_mm - r) <= 1.0);
    for (const auto& s : cands) {
      CHECK(s.score > 0);
      CHECK(s.radius_mm >= 3.0);
      CHECK(s.radius_mm <= 9.0);
    }
  }
}

TEST_CASE("two spheres 30 mm apart give two top candidates") {
  const WorldPoint a(25, 30, 30), b(55, 30, 30);
  const Volume3D v = two_spheres(a, b);
  const auto cands = detect_spheres(v, full_mask(v.geometry), HoughParams{});
  REQUIRE(cands.size() >= 2);
  const bool order1 = (cands[0].center - a).norm() <= 1.0 && (cands[1].center - b).norm() <= 1.0;
  const bool order2 = (cands[0].center - b).norm() <= 1.0 && (cands[1].center - a).norm() <= 1.0;
  CHECK((order1 || order2));
  for (std::size_t i = 0; i < cands.size(); ++i)
    for (std::size_t j = i + 1; j < cands.size(); ++j)
      CHECK((cands[i].center - cands[j].center).norm() >= 10.0);
}

TEST_CASE("hough input errors") {
  const Volume3D v = sphere_volume({31, 31, 31}, {1, 1, 1}, {15, 15, 15}, 6.0, 200.0, 10.0);
  CHECK(code_of([&] { detect_spheres(v, BinaryMask(v.geometry), HoughParams{}); }) ==
        Errc::EmptyVoi);
  const BinaryMask other = full_mask(Geometry::diagonal({30, 31, 31}, {1, 1, 1}));
  CHECK(code_of([&] { detect_spheres(v, other, HoughParams{}); }) == Errc::GeometryMismatch);
  HoughParams bad;
  bad.r_min_mm = 0;
  CHECK(code_of([&] { bad.validate(); }) == Errc::InvalidArgument);
  bad = {};
  bad.grad_threshold_frac = 1.0;
  CHECK(code_of([&] { bad.validate(); }) == Errc::InvalidArgument);
}

TEST_CASE("vote conservation") {
  const Volume3D v = sphere_volume({41, 41, 41}, {1, 1, 1}, {20, 20, 20}, 8.0, 200.0, 10.0);
  // restrict the VOI to one half so that some votes leave the grid near the border
  BinaryMask voi(v.geometry);
  for (std::size_t i = 0; i < voi.size(); ++i) voi.set(i, v.geometry.coords(i)[0] < 25);
  HoughParams p;
  p.r_max_mm = 30;  // long radii push votes out of the grid
  const auto acc = vote_accumulator(v, voi, p);
  CHECK(acc.edge_voxels > 0);
  CHECK(acc.out_of_grid > 0);
  CHECK(acc.total() ==
        static_cast<std::int64_t>(acc.edge_voxels * acc.radius_count * 2 - acc.out_of_grid));
  const auto box = box_sum3(acc.votes, v.geometry);
  std::int64_t interior = 0, box_total = 0;
  for (auto x : box) box_total += x;
  for (std::size_t i = 0; i < acc.votes.size(); ++i) {
    const auto c = v.geometry.coords(i);
    bool in = true;
    for (int a = 0; a < 3; ++a) in = in && c[a] > 0 && c[a] < 40;
    if (in) interior += acc.votes[i];
  }
  // a box sum counts each interior vote 27 times
  CHECK(box_total >= 27 * interior);
}

TEST_CASE("translation equivariance") {
  const Volume3D v = two_spheres({25, 30, 30}, {55, 30, 30});
  const BinaryMask voi = full_mask(v.geometry);
  const std::array<int, 3> off{3, 5, 2};
  const std::array<int, 3> dims{90, 70, 66};
  const Volume3D vs = shifted(v, off, dims);
  BinaryMask voi_s = shifted(voi, off, dims);
  const auto a = detect_spheres(v, voi, HoughParams{});
  const auto b = detect_spheres(vs, voi_s, HoughParams{});
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(b[i].score == a[i].score);
    CHECK(b[i].radius_mm == a[i].radius_mm);
    CHECK((b[i].center - a[i].center - Eigen::Vector3d(3, 5, 2)).norm() < 1e-12);
  }
}

TEST_CASE("hough determinism across worker counts") {
  PhantomSpec spec;
  spec.dims = {120, 140, 110};
  spec.head_center = {60, 70, 55};
  spec.semi_axes_mm = {45, 55, 40};
  spec.electrode_radius_mm = 3;
  spec.n_electrodes = 20;
  const Phantom ph = generate_phantom(spec);
  const BinaryMask voi = build_voi_shell(extract_head_mask(ph.t1), 15, 2);
  HoughParams p;
  p.workers = 1;
  const auto ref = detect_spheres(ph.ute, voi, p);
  for (int w : {2, 3, 8}) {
    p.workers = w;
    const auto got = detect_spheres(ph.ute, voi, p);
    REQUIRE(got.size() == ref.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].voxel == ref[i].voxel);
      CHECK(got[i].score == ref[i].score);
      CHECK(got[i].radius_mm == ref[i].radius_mm);
    }
  }
  // centres stay within the VOI bounding box grown by r_max
  Eigen::Vector3d lo = Eigen::Vector3d::Constant(1e9), hi = -lo;
  for (std::size_t i = 0; i < voi.size(); ++i) {
    if (!voi.test(i)) continue;
    lo = lo.cwiseMin(ph.ute.geometry.voxel_to_world(i));
    hi = hi.cwiseMax(ph.ute.geometry.voxel_to_world(i));
  }
  for (const auto& c : ref) {
    CHECK((c.center.array() >= lo.array() - p.r_max_mm).all());
    CHECK((c.center.array() <= hi.array() + p.r_max_mm).all());
  }
}

TEST_CASE("non-max suppression rules") {
  CHECK(non_max_suppression({}, 10).empty());
  SphereCandidate a{{0, 0, 0}, 6, 10, 0}, b{{5, 0, 0}, 6, 7, 1};
  CHECK(non_max_suppression({a}, 10).size() == 1);
  const auto kept = non_max_suppression({b, a}, 10);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].score == 10);
}

TEST_CASE("non-max suppression matches a brute-force reference") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0, 100);
  std::uniform_int_distribution<int> s(1, 30);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<SphereCandidate> c(100);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = {{u(rng), u(rng), u(rng)}, 5, s(rng), i};
    // reference: repeatedly take the best remaining (earliest on ties),
    // discard everything within range of it
    std::vector<SphereCandidate> pool = c, ref;
    std::vector<bool> gone(pool.size(), false);
    for (;;) {
      int best = -1;
      for (std::size_t i = 0; i < pool.size(); ++i)
        if (!gone[i] && (best < 0 || pool[i].score > pool[best].score)) best = static_cast<int>(i);
      if (best < 0) break;
      gone[best] = true;
      bool blocked = false;
      for (const auto& k : ref) blocked = blocked || (k.center - pool[best].center).norm() < 12.0;
      if (!blocked) ref.push_back(pool[best]);
    }
    const auto got = non_max_suppression(c, 12.0);
    REQUIRE(got.size() == ref.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i].voxel == ref[i].voxel);
    for (std::size_t i = 0; i < got.size(); ++i)
      for (std::size_t j = i + 1; j < got.size(); ++j) {
        CHECK(got[i].score >= got[j].score);
        CHECK((got[i].center - got[j].center).norm() >= 12.0);
      }
  }
}
