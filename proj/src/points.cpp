#include "eegloc/points.hpp"

#include "eegloc/csv.hpp"

namespace eegloc {

LabeledPoints read_labeled_points(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  const std::string src = path.string();
  csv::require_columns(table, {"label", "x_mm", "y_mm", "z_mm"}, src);
  const int cl = table.column("label"), cx = table.column("x_mm"),
            cy = table.column("y_mm"), cz = table.column("z_mm");
  LabeledPoints out;
  for (const auto& row : table.rows) {
    out.push_back({row[cl], WorldPoint(csv::parse_double(row[cx], src),
                                       csv::parse_double(row[cy], src),
                                       csv::parse_double(row[cz], src))});
  }
  return out;
}

std::string labeled_points_csv(const LabeledPoints& pts) {
  std::string s = "label,x_mm,y_mm,z_mm\n";
  for (const auto& p : pts) {
    s += p.label + "," + csv::format_double(p.position.x()) + "," +
         csv::format_double(p.position.y()) + "," + csv::format_double(p.position.z()) + "\n";
  }
  return s;
}

void write_labeled_points(const LabeledPoints& pts, const std::filesystem::path& path) {
  csv::write_text(path, labeled_points_csv(pts));
}

}  // namespace eegloc
