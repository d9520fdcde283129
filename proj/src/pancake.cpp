#include "eegloc/pancake.hpp"

#include "eegloc/csv.hpp"
#include "eegloc/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <numbers>

namespace eegloc {
namespace {

// 3x5 glyphs, one row per entry, bit 2 = leftmost column.
struct Glyph {
  char c;
  std::array<unsigned char, 5> rows;
};

constexpr Glyph kFont[] = {
    {'0', {7, 5, 5, 5, 7}}, {'1', {2, 6, 2, 2, 7}}, {'2', {7, 1, 7, 4, 7}},
    {'3', {7, 1, 7, 1, 7}}, {'4', {5, 5, 7, 1, 1}}, {'5', {7, 4, 7, 1, 7}},
    {'6', {7, 4, 7, 5, 7}}, {'7', {7, 1, 1, 1, 1}}, {'8', {7, 5, 7, 5, 7}},
    {'9', {7, 5, 7, 1, 7}}, {'A', {2, 5, 7, 5, 5}}, {'B', {6, 5, 6, 5, 6}},
    {'C', {3, 4, 4, 4, 3}}, {'D', {6, 5, 5, 5, 6}}, {'E', {7, 4, 6, 4, 7}},
    {'F', {7, 4, 6, 4, 4}}, {'G', {3, 4, 5, 5, 3}}, {'H', {5, 5, 7, 5, 5}},
    {'I', {7, 2, 2, 2, 7}}, {'J', {1, 1, 1, 5, 2}}, {'K', {5, 5, 6, 5, 5}},
    {'L', {4, 4, 4, 4, 7}}, {'M', {5, 7, 7, 5, 5}}, {'N', {6, 5, 5, 5, 5}},
    {'O', {2, 5, 5, 5, 2}}, {'P', {6, 5, 6, 4, 4}}, {'Q', {2, 5, 5, 6, 3}},
    {'R', {6, 5, 6, 5, 5}}, {'S', {3, 4, 2, 1, 6}}, {'T', {7, 2, 2, 2, 2}},
    {'U', {5, 5, 5, 5, 7}}, {'V', {5, 5, 5, 5, 2}}, {'W', {5, 5, 7, 7, 5}},
    {'X', {5, 5, 2, 5, 5}}, {'Y', {5, 5, 2, 2, 2}}, {'Z', {7, 1, 2, 4, 7}},
};

const Glyph* find_glyph(char c) {
  const char up = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (const auto& g : kFont)
    if (g.c == up) return &g;
  return nullptr;
}

void draw_text(GrayImage& img, int x, int y, const std::string& text, int scale,
               unsigned char value) {
  for (char ch : text) {
    if (const Glyph* g = find_glyph(ch)) {
      for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 3; ++c)
          if (g->rows[r] & (4 >> c))
            for (int dy = 0; dy < scale; ++dy)
              for (int dx = 0; dx < scale; ++dx)
                img.set(x + c * scale + dx, y + r * scale + dy, value);
    }
    x += 4 * scale;
  }
}

}  // namespace

PancakeProjection project_pancake(const LabeledPoints& points, const WorldPoint& center,
                                  const Eigen::Vector3d& vertex_axis) {
  const char* stage = "render_pancake";
  if (!(vertex_axis.norm() > 0.0)) {
    throw Error(Errc::InvalidArgument, stage, "vertex axis must be non-zero");
  }
  const Eigen::Vector3d axis = vertex_axis.normalized();
  Eigen::Vector3d ref = Eigen::Vector3d::UnitX();
  if (std::abs(axis.dot(ref)) > 1.0 - 1e-9) ref = Eigen::Vector3d::UnitY();
  const Eigen::Vector3d e1 = (ref - ref.dot(axis) * axis).normalized();
  const Eigen::Vector3d e2 = axis.cross(e1);

  PancakeProjection proj;
  proj.center = center;
  proj.vertex_axis = axis;
  for (const auto& p : points) {
    const Eigen::Vector3d r = p.position - center;
    if (!(r.norm() > 1e-9)) {
      throw Error(Errc::DegeneratePoint, stage, "'" + p.label + "' coincides with the centre");
    }
    const Eigen::Vector3d d = r.normalized();
    const double theta = std::atan2(d.cross(axis).norm(), d.dot(axis));
    const double phi = std::atan2(d.dot(e2), d.dot(e1));
    proj.points.push_back({p.label, theta * std::cos(phi), theta * std::sin(phi)});
  }
  return proj;
}

GrayImage rasterize_pancake(const PancakeProjection& proj, int size_px) {
  GrayImage img{size_px, size_px, std::vector<unsigned char>(
                                      static_cast<std::size_t>(size_px) * size_px, 0)};
  double extent = std::numbers::pi / 2.0;
  for (const auto& p : proj.points) extent = std::max(extent, std::hypot(p.u, p.v));
  const double half = 0.5 * size_px;
  const double scale = (half - 8.0) / (1.1 * extent);
  auto to_px = [&](double u, double v) {
    return std::array<int, 2>{static_cast<int>(std::lround(half + u * scale)),
                              static_cast<int>(std::lround(half - v * scale))};
  };

  const int outline_steps = 4 * size_px;
  for (int s = 0; s < outline_steps; ++s) {
    const double a = 2.0 * std::numbers::pi * s / outline_steps;
    const auto px = to_px(std::numbers::pi / 2.0 * std::cos(a), std::numbers::pi / 2.0 * std::sin(a));
    img.set(px[0], px[1], 96);
  }
  // Nose tick at the anterior end.
  const auto nose = to_px(0.0, std::numbers::pi / 2.0);
  for (int d = 1; d <= 6; ++d) img.set(nose[0], nose[1] - d, 96);

  for (const auto& p : proj.points) {
    const auto px = to_px(p.u, p.v);
    for (int dy = -3; dy <= 3; ++dy)
      for (int dx = -3; dx <= 3; ++dx)
        if (dx * dx + dy * dy <= 9) img.set(px[0] + dx, px[1] + dy, 255);
    draw_text(img, px[0] + 5, px[1] - 5, p.label, 1, 200);
  }
  return img;
}

std::string encode_pgm(const GrayImage& img) {
  std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.pixels.data()), img.pixels.size());
  return out;
}

std::string pancake_csv(const PancakeProjection& proj) {
  std::string s = "label,u,v\n";
  for (const auto& p : proj.points)
    s += p.label + "," + csv::format_double(p.u) + "," + csv::format_double(p.v) + "\n";
  return s;
}

WorldPoint fit_sphere_center(const LabeledPoints& points) {
  if (points.size() < 4) {
    throw Error(Errc::TooFewPoints, "fit_sphere_center", "need at least 4 points");
  }
  Eigen::MatrixXd a(points.size(), 4);
  Eigen::VectorXd b(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i].position;
    a.row(i) << 2.0 * p.x(), 2.0 * p.y(), 2.0 * p.z(), 1.0;
    b(i) = p.squaredNorm();
  }
  const auto qr = a.colPivHouseholderQr();
  if (qr.rank() < 4) {
    throw Error(Errc::DegenerateConfiguration, "fit_sphere_center", "points are coplanar");
  }
  const Eigen::Vector4d x = qr.solve(b);
  return x.head<3>();
}

}  // namespace eegloc
