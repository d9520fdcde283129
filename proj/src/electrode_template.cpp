#include "eegloc/electrode_template.hpp"

#include "eegloc/csv.hpp"
#include "eegloc/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace eegloc {
namespace {

// Colatitude from the vertex and azimuth from anterior, positive towards
// the right ear; both in degrees.
Eigen::Vector3d spherical(double colat_deg, double azimuth_deg) {
  const double t = colat_deg * std::numbers::pi / 180.0;
  const double p = azimuth_deg * std::numbers::pi / 180.0;
  Eigen::Vector3d v(std::sin(t) * std::sin(p), std::sin(t) * std::cos(p), std::cos(t));
  // exact zeros on the axes instead of 1e-17 residue
  for (int i = 0; i < 3; ++i)
    if (std::abs(v[i]) < 1e-12) v[i] = 0.0;
  return v;
}

Eigen::Vector3d slerp(const Eigen::Vector3d& a, const Eigen::Vector3d& b, double f) {
  const double omega = std::acos(std::clamp(a.dot(b), -1.0, 1.0));
  if (omega < 1e-12) return a;
  return ((std::sin((1.0 - f) * omega) * a + std::sin(f * omega) * b) / std::sin(omega))
      .normalized();
}

}  // namespace

const char* fiducial_name(Fiducial f) noexcept {
  switch (f) {
    case Fiducial::Nasion: return "nasion";
    case Fiducial::Inion: return "inion";
    case Fiducial::Lpa: return "lpa";
    case Fiducial::Rpa: return "rpa";
    case Fiducial::Vertex: return "vertex";
  }
  return "";
}

std::optional<Fiducial> parse_fiducial(std::string_view name) noexcept {
  for (Fiducial f : kAllFiducials)
    if (name == fiducial_name(f)) return f;
  return std::nullopt;
}

std::vector<Eigen::Vector3d> ElectrodeTemplate::unit_positions() const {
  std::vector<Eigen::Vector3d> out;
  out.reserve(channels.size());
  for (const auto& c : channels) out.push_back(c.unit_pos);
  return out;
}

std::vector<std::string> ElectrodeTemplate::labels() const {
  std::vector<std::string> out;
  out.reserve(channels.size());
  for (const auto& c : channels) out.push_back(c.label);
  return out;
}

ElectrodeTemplate default_template() {
  // 10-10 positions on a sphere: nasion, inion and the preauricular points
  // sit on the equator; the Fpz-T7-Oz-T8 ring is 18 degrees above it.
  // Intermediate rows are interpolated along the arc from the midline
  // electrode to the row's "7"/"8" electrode on that ring. The channel set
  // carries PO9/PO10 but no FT9/FT10 so the layout is not symmetric under
  // a half-turn about the vertical axis.
  struct Row {
    const char* prefix;
    double mid_colat;
    double mid_azimuth;
    double lateral_azimuth;
    bool full;  // 1/3/5 electrodes, otherwise only 3
  };
  const Row rows[] = {{"AF", 54, 0, 36, false}, {"F", 36, 0, 54, true},
                      {"FC", 18, 0, 72, true},  {"C", 0, 0, 90, true},
                      {"CP", 18, 180, 108, true}, {"P", 36, 180, 126, true},
                      {"PO", 54, 180, 144, false}};

  std::map<std::string, Eigen::Vector3d> pos;
  const std::pair<const char*, double> ring[] = {
      {"Fp", 18}, {"AF", 36}, {"F", 54}, {"FT", 72}, {"T", 90},
      {"TP", 108}, {"P", 126}, {"PO", 144}, {"O", 162}};
  for (const auto& [prefix, az] : ring) {
    const bool edge = std::string(prefix) == "Fp" || std::string(prefix) == "O";
    pos[std::string(prefix) + (edge ? "1" : "7")] = spherical(72, -az);
    pos[std::string(prefix) + (edge ? "2" : "8")] = spherical(72, az);
  }
  pos["Fpz"] = spherical(72, 0);
  pos["Oz"] = spherical(72, 180);
  for (const auto& r : rows) {
    const std::string p = r.prefix;
    const Eigen::Vector3d mid = spherical(r.mid_colat, r.mid_azimuth);
    pos[p + "z"] = mid;
    const Eigen::Vector3d left = spherical(72, -r.lateral_azimuth);
    const Eigen::Vector3d right = spherical(72, r.lateral_azimuth);
    if (r.full) {
      const std::pair<int, double> steps[] = {{1, 0.25}, {3, 0.5}, {5, 0.75}};
      for (const auto& [n, f] : steps) {
        pos[p + std::to_string(n)] = slerp(mid, left, f);
        pos[p + std::to_string(n + 1)] = slerp(mid, right, f);
      }
    } else {
      pos[p + "3"] = slerp(mid, left, 0.5);
      pos[p + "4"] = slerp(mid, right, 0.5);
    }
  }
  pos["TP9"] = spherical(90, -108);
  pos["TP10"] = spherical(90, 108);
  pos["PO9"] = spherical(90, -144);
  pos["PO10"] = spherical(90, 144);

  const char* order[] = {
      "Fp1", "Fpz", "Fp2", "AF7", "AF3", "AFz", "AF4", "AF8", "F7",  "F5",  "F3",
      "F1",  "Fz",  "F2",  "F4",  "F6",  "F8",  "FT7", "FC5", "FC3", "FC1", "FCz",
      "FC2", "FC4", "FC6", "FT8", "T7",  "C5",  "C3",  "C1",  "Cz",  "C2",  "C4",
      "C6",  "T8",  "TP9", "TP7", "CP5", "CP3", "CP1", "CPz", "CP2", "CP4", "CP6",
      "TP8", "TP10", "P7", "P5",  "P3",  "P1",  "Pz",  "P2",  "P4",  "P6",  "P8",
      "PO9", "PO7", "PO3", "POz", "PO4", "PO8", "PO10", "O1", "Oz",  "O2"};

  ElectrodeTemplate tpl;
  for (const char* label : order) tpl.channels.push_back({label, pos.at(label)});
  tpl.fiducials[static_cast<std::size_t>(Fiducial::Nasion)] = spherical(90, 0);
  tpl.fiducials[static_cast<std::size_t>(Fiducial::Inion)] = spherical(90, 180);
  tpl.fiducials[static_cast<std::size_t>(Fiducial::Lpa)] = spherical(90, -90);
  tpl.fiducials[static_cast<std::size_t>(Fiducial::Rpa)] = spherical(90, 90);
  tpl.fiducials[static_cast<std::size_t>(Fiducial::Vertex)] = Eigen::Vector3d::UnitZ();
  return tpl;
}

ElectrodeTemplate parse_template(std::string_view text, const std::string& source) {
  const char* stage = "load_template";
  const auto table = csv::parse(text, source);
  csv::require_columns(table, {"label", "ux", "uy", "uz", "is_fiducial"}, source);
  const int cl = table.column("label"), cx = table.column("ux"), cy = table.column("uy"),
            cz = table.column("uz"), cf = table.column("is_fiducial");

  ElectrodeTemplate tpl;
  std::set<std::string> labels;
  std::array<bool, 5> seen{};
  for (const auto& row : table.rows) {
    const std::string& label = row[cl];
    if (!labels.insert(label).second) {
      throw Error(Errc::DuplicateLabel, stage, source + ": label '" + label + "' repeated");
    }
    Eigen::Vector3d v(csv::parse_double(row[cx], source), csv::parse_double(row[cy], source),
                      csv::parse_double(row[cz], source));
    const double norm = v.norm();
    if (!std::isfinite(norm) || std::abs(norm - 1.0) > 0.05) {
      throw Error(Errc::NonUnitVector, stage,
                  source + ": '" + label + "' has norm " + csv::format_double(norm));
    }
    if (std::abs(norm - 1.0) > 1e-15) v /= norm;
    const std::string& fid = row[cf];
    if (fid.empty()) {
      tpl.channels.push_back({label, v});
      continue;
    }
    const auto f = parse_fiducial(fid);
    if (!f) {
      throw Error(Errc::ParseError, stage, source + ": unknown fiducial '" + fid + "'");
    }
    const auto slot = static_cast<std::size_t>(*f);
    if (seen[slot]) {
      throw Error(Errc::DuplicateLabel, stage, source + ": fiducial '" + fid + "' repeated");
    }
    seen[slot] = true;
    tpl.fiducials[slot] = v;
  }
  for (Fiducial f : kAllFiducials) {
    if (!seen[static_cast<std::size_t>(f)]) {
      throw Error(Errc::MissingFiducial, stage,
                  source + ": no row with is_fiducial=" + fiducial_name(f));
    }
  }
  if (tpl.channels.empty()) {
    throw Error(Errc::EmptyInput, stage, source + ": template has no channels");
  }
  return tpl;
}

ElectrodeTemplate load_template(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(Errc::MissingFile, "load_template", "no such file: " + path.string());
  }
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_template(ss.str(), path.string());
}

std::string template_csv(const ElectrodeTemplate& tpl) {
  std::string s = "label,ux,uy,uz,is_fiducial\n";
  auto row = [&](const std::string& label, const Eigen::Vector3d& v, const char* fid) {
    s += label + "," + csv::format_double(v.x()) + "," + csv::format_double(v.y()) + "," +
         csv::format_double(v.z()) + "," + fid + "\n";
  };
  for (const auto& c : tpl.channels) row(c.label, c.unit_pos, "");
  for (Fiducial f : kAllFiducials) row(fiducial_name(f), tpl.fiducial(f), fiducial_name(f));
  return s;
}

}  // namespace eegloc
