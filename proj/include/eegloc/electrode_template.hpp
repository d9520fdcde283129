#pragma once

#include <Eigen/Dense>

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace eegloc {

enum class Fiducial { Nasion, Inion, Lpa, Rpa, Vertex };

inline constexpr std::array<Fiducial, 5> kAllFiducials{
    Fiducial::Nasion, Fiducial::Inion, Fiducial::Lpa, Fiducial::Rpa, Fiducial::Vertex};

/// "nasion", "inion", "lpa", "rpa", "vertex".
const char* fiducial_name(Fiducial f) noexcept;
std::optional<Fiducial> parse_fiducial(std::string_view name) noexcept;

struct TemplateChannel {
  std::string label;
  Eigen::Vector3d unit_pos;
};

/// Labelled electrode layout on the unit sphere plus the five anatomical
/// landmarks used by fiducial registration. Head frame: +x right,
/// +y anterior, +z superior.
struct ElectrodeTemplate {
  std::vector<TemplateChannel> channels;
  std::array<Eigen::Vector3d, 5> fiducials;  // indexed by Fiducial

  std::size_t size() const noexcept { return channels.size(); }
  const Eigen::Vector3d& fiducial(Fiducial f) const {
    return fiducials[static_cast<std::size_t>(f)];
  }
  std::vector<Eigen::Vector3d> unit_positions() const;
  std::vector<std::string> labels() const;
};

/// Built-in 65-channel 10-10 layout.
ElectrodeTemplate default_template();

/// CSV with header `label,ux,uy,uz,is_fiducial`. Rows with a non-empty
/// is_fiducial are landmarks, the rest are channels.
ElectrodeTemplate load_template(const std::filesystem::path& path);
ElectrodeTemplate parse_template(std::string_view text, const std::string& source = "<memory>");
std::string template_csv(const ElectrodeTemplate& tpl);

}  // namespace eegloc
