#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace eegloc {

using WorldPoint = Eigen::Vector3d;
using Affine = Eigen::Matrix4d;

enum class DType : std::int16_t { U8 = 2, I16 = 4, F32 = 16 };

/// Grid shape plus voxel-index -> world-mm mapping. Shared by volumes and
/// masks; spacing is derived from the affine column norms.
class Geometry {
 public:
  Geometry() = default;
  Geometry(std::array<int, 3> dims, const Affine& affine);

  static Geometry diagonal(std::array<int, 3> dims,
                           std::array<double, 3> spacing,
                           const Eigen::Vector3d& origin = Eigen::Vector3d::Zero());

  const std::array<int, 3>& dims() const noexcept { return dims_; }
  int nx() const noexcept { return dims_[0]; }
  int ny() const noexcept { return dims_[1]; }
  int nz() const noexcept { return dims_[2]; }
  std::size_t voxel_count() const noexcept {
    return static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
  }

  const Affine& affine() const noexcept { return affine_; }
  const std::array<double, 3>& spacing() const noexcept { return spacing_; }

  // x-fastest linear index
  std::size_t index(int i, int j, int k) const noexcept {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims_[0]) *
               (static_cast<std::size_t>(j) +
                static_cast<std::size_t>(dims_[1]) * static_cast<std::size_t>(k));
  }
  std::array<int, 3> coords(std::size_t idx) const noexcept {
    const auto nx = static_cast<std::size_t>(dims_[0]);
    const auto ny = static_cast<std::size_t>(dims_[1]);
    return {static_cast<int>(idx % nx), static_cast<int>((idx / nx) % ny),
            static_cast<int>(idx / (nx * ny))};
  }
  bool contains(int i, int j, int k) const noexcept {
    return i >= 0 && j >= 0 && k >= 0 && i < dims_[0] && j < dims_[1] &&
           k < dims_[2];
  }

  WorldPoint voxel_to_world(const Eigen::Vector3d& ijk) const;
  WorldPoint voxel_to_world(std::size_t idx) const;
  Eigen::Vector3d world_to_voxel(const WorldPoint& p) const;

  /// Same dims and affine entries (exact comparison).
  bool operator==(const Geometry& other) const;

 private:
  std::array<int, 3> dims_{0, 0, 0};
  Affine affine_ = Affine::Identity();
  Affine inverse_ = Affine::Identity();
  std::array<double, 3> spacing_{1.0, 1.0, 1.0};
};

/// Scalar voxel grid. Data is always held as f32; `dtype` remembers the
/// on-disk type used when writing.
struct Volume3D {
  Geometry geometry;
  DType dtype = DType::F32;
  std::vector<float> data;

  Volume3D() = default;
  Volume3D(Geometry geom, DType type);
  Volume3D(Geometry geom, DType type, std::vector<float> values);

  float at(int i, int j, int k) const { return data[geometry.index(i, j, k)]; }
  float& at(int i, int j, int k) { return data[geometry.index(i, j, k)]; }

  bool operator==(const Volume3D& other) const;
};

}  // namespace eegloc
