#pragma once

#include "eegloc/detection.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <optional>

namespace eegloc::cli {

/// Command-line values that override the config file.
struct ConfigOverrides {
  std::optional<double> outer_margin_mm;
  std::optional<double> inner_margin_mm;
  std::optional<double> gate_dist_mm;
  std::optional<double> refine_radius_mm;
  std::optional<int> workers;
};

/// Built-in defaults, then the config file (if any), then flags.
PipelineConfig resolve_config(const std::optional<nlohmann::json>& file,
                              const ConfigOverrides& flags);

/// Entry point of the `eegloc` tool. Returns 0 on success, 1 for usage and
/// validation errors, 2 for I/O errors.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace eegloc::cli
