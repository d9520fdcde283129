#pragma once

#include "eegloc/volume.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace eegloc {

struct LabeledPoint {
  std::string label;
  WorldPoint position = WorldPoint::Zero();
};

using LabeledPoints = std::vector<LabeledPoint>;

/// `label,x_mm,y_mm,z_mm` (extra columns are ignored on read).
LabeledPoints read_labeled_points(const std::filesystem::path& path);
void write_labeled_points(const LabeledPoints& pts, const std::filesystem::path& path);
std::string labeled_points_csv(const LabeledPoints& pts);

}  // namespace eegloc
