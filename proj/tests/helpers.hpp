#pragma once

#include "eegloc/error.hpp"
#include "eegloc/morphology.hpp"
#include "eegloc/volume.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace testutil {

// Fresh per-test scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("eegloc_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline eegloc::Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const eegloc::Error& e) {
    return e.code();
  }
  FAIL("expected an eegloc::Error");
  return eegloc::Errc::InvalidArgument;
}

inline eegloc::BinaryMask ball_mask(const eegloc::Geometry& g, const eegloc::WorldPoint& c,
                                    double r) {
  eegloc::BinaryMask m(g);
  for (std::size_t i = 0; i < g.voxel_count(); ++i)
    if ((g.voxel_to_world(i) - c).norm() <= r) m.set(i, true);
  return m;
}

inline eegloc::BinaryMask random_mask(const eegloc::Geometry& g, std::mt19937_64& rng,
                                      double density) {
  std::bernoulli_distribution coin(density);
  eegloc::BinaryMask m(g);
  for (std::size_t i = 0; i < g.voxel_count(); ++i) m.set(i, coin(rng));
  return m;
}

inline bool subset(const eegloc::BinaryMask& a, const eegloc::BinaryMask& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.test(i) && !b.test(i)) return false;
  return true;
}

}  // namespace testutil
