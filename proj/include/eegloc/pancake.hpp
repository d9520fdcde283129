#pragma once

#include "eegloc/points.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace eegloc {

struct PancakePoint {
  std::string label;
  double u = 0.0;  // towards the right ear (radians of arc)
  double v = 0.0;  // towards the nose
};

/// Azimuthal-equidistant projection of the scalp around `vertex_axis`.
struct PancakeProjection {
  std::vector<PancakePoint> points;
  WorldPoint center = WorldPoint::Zero();
  Eigen::Vector3d vertex_axis = Eigen::Vector3d::UnitZ();
};

/// For d = unit(p - center): theta = angle(d, vertex_axis), phi = azimuth
/// in the plane normal to the axis measured from the projected +x (right)
/// direction towards +y (anterior); (u, v) = (theta cos phi, theta sin phi).
/// With an axis parallel to x, the reference direction becomes +y.
PancakeProjection project_pancake(const LabeledPoints& points, const WorldPoint& center,
                                  const Eigen::Vector3d& vertex_axis);

/// 8-bit grayscale image.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<unsigned char> pixels;

  void set(int x, int y, unsigned char value) {
    if (x >= 0 && y >= 0 && x < width && y < height) pixels[y * width + x] = value;
  }
};

/// Disc markers with text labels; the head outline is drawn at theta = pi/2.
GrayImage rasterize_pancake(const PancakeProjection& proj, int size_px = 512);

/// Binary PGM (P5).
std::string encode_pgm(const GrayImage& img);

/// `label,u,v`
std::string pancake_csv(const PancakeProjection& proj);

/// Least-squares sphere centre through the points (needs 4 non-coplanar).
WorldPoint fit_sphere_center(const LabeledPoints& points);

}  // namespace eegloc
