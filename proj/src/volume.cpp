#include "eegloc/volume.hpp"

#include "eegloc/error.hpp"

#include <cmath>
#include <cstring>
#include <string>

namespace eegloc {

Geometry::Geometry(std::array<int, 3> dims, const Affine& affine)
    : dims_(dims), affine_(affine) {
  for (int d : dims_) {
    if (d <= 0) {
      throw Error(Errc::InvalidArgument, "geometry",
                  "dimensions must be positive, got " + std::to_string(d));
    }
  }
  const Eigen::Matrix3d block = affine_.topLeftCorner<3, 3>();
  if (!block.allFinite() || !affine_.col(3).allFinite() ||
      std::abs(block.determinant()) <= 1e-12) {
    throw Error(Errc::InvalidArgument, "geometry",
                "affine 3x3 block is singular or non-finite");
  }
  affine_.row(3) << 0.0, 0.0, 0.0, 1.0;
  inverse_ = affine_.inverse();
  for (int c = 0; c < 3; ++c) spacing_[c] = block.col(c).norm();
}

Geometry Geometry::diagonal(std::array<int, 3> dims,
                            std::array<double, 3> spacing,
                            const Eigen::Vector3d& origin) {
  Affine a = Affine::Identity();
  for (int c = 0; c < 3; ++c) a(c, c) = spacing[c];
  a.block<3, 1>(0, 3) = origin;
  return Geometry(dims, a);
}

WorldPoint Geometry::voxel_to_world(const Eigen::Vector3d& ijk) const {
  return affine_.topLeftCorner<3, 3>() * ijk + affine_.block<3, 1>(0, 3);
}

WorldPoint Geometry::voxel_to_world(std::size_t idx) const {
  const auto c = coords(idx);
  return voxel_to_world(Eigen::Vector3d(c[0], c[1], c[2]));
}

Eigen::Vector3d Geometry::world_to_voxel(const WorldPoint& p) const {
  return inverse_.topLeftCorner<3, 3>() * p + inverse_.block<3, 1>(0, 3);
}

bool Geometry::operator==(const Geometry& other) const {
  return dims_ == other.dims_ && affine_ == other.affine_;
}

Volume3D::Volume3D(Geometry geom, DType type)
    : geometry(std::move(geom)), dtype(type), data(geometry.voxel_count(), 0.0f) {}

Volume3D::Volume3D(Geometry geom, DType type, std::vector<float> values)
    : geometry(std::move(geom)), dtype(type), data(std::move(values)) {
  if (data.size() != geometry.voxel_count()) {
    throw Error(Errc::InvalidArgument, "volume",
                "data length " + std::to_string(data.size()) +
                    " does not match voxel count " +
                    std::to_string(geometry.voxel_count()));
  }
}

bool Volume3D::operator==(const Volume3D& other) const {
  return geometry == other.geometry && dtype == other.dtype &&
         data.size() == other.data.size() &&
         (data.empty() ||
          std::memcmp(data.data(), other.data.data(), data.size() * sizeof(float)) == 0);
}

}  // namespace eegloc
