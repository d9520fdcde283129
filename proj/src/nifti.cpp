#include "eegloc/nifti.hpp"

#include "eegloc/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

namespace eegloc {
namespace {

constexpr std::size_t kHeaderSize = 348;
constexpr std::size_t kVoxOffset = 352;

// Byte offsets into the NIfTI-1 header.
namespace off {
constexpr std::size_t sizeof_hdr = 0;
constexpr std::size_t dim = 40;
constexpr std::size_t datatype = 70;
constexpr std::size_t bitpix = 72;
constexpr std::size_t pixdim = 76;
constexpr std::size_t vox_offset = 108;
constexpr std::size_t scl_slope = 112;
constexpr std::size_t scl_inter = 116;
constexpr std::size_t xyzt_units = 123;
constexpr std::size_t descrip = 148;
constexpr std::size_t qform_code = 252;
constexpr std::size_t sform_code = 254;
constexpr std::size_t quatern_b = 256;
constexpr std::size_t qoffset_x = 268;
constexpr std::size_t srow_x = 280;
constexpr std::size_t magic = 344;
}  // namespace off

template <typename T>
T load(const char* buf, std::size_t offset) {
  T v;
  std::memcpy(&v, buf + offset, sizeof(T));
  return v;
}

template <typename T>
void store(char* buf, std::size_t offset, T v) {
  std::memcpy(buf + offset, &v, sizeof(T));
}

int bytes_per_voxel(DType t) {
  switch (t) {
    case DType::U8: return 1;
    case DType::I16: return 2;
    case DType::F32: return 4;
  }
  return 0;
}

Affine qform_affine(const char* hdr) {
  const double b = load<float>(hdr, off::quatern_b);
  const double c = load<float>(hdr, off::quatern_b + 4);
  const double d = load<float>(hdr, off::quatern_b + 8);
  const double a = std::sqrt(std::max(0.0, 1.0 - (b * b + c * c + d * d)));
  double qfac = load<float>(hdr, off::pixdim);
  if (qfac == 0.0) qfac = 1.0;
  const double dx = load<float>(hdr, off::pixdim + 4);
  const double dy = load<float>(hdr, off::pixdim + 8);
  const double dz = load<float>(hdr, off::pixdim + 12) * (qfac < 0 ? -1.0 : 1.0);

  Eigen::Matrix3d r;
  r << a * a + b * b - c * c - d * d, 2 * (b * c - a * d), 2 * (b * d + a * c),
      2 * (b * c + a * d), a * a + c * c - b * b - d * d, 2 * (c * d - a * b),
      2 * (b * d - a * c), 2 * (c * d + a * b), a * a + d * d - c * c - b * b;

  Affine m = Affine::Identity();
  m.block<3, 1>(0, 0) = r.col(0) * dx;
  m.block<3, 1>(0, 1) = r.col(1) * dy;
  m.block<3, 1>(0, 2) = r.col(2) * dz;
  for (int i = 0; i < 3; ++i) m(i, 3) = load<float>(hdr, off::qoffset_x + 4 * i);
  return m;
}

}  // namespace

Volume3D read_nifti(const std::filesystem::path& path) {
  const std::string stage = "read_nifti";
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(Errc::MissingFile, stage, "no such file: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, stage, "cannot open " + path.string());

  std::array<char, kHeaderSize> hdr{};
  in.read(hdr.data(), kHeaderSize);
  if (static_cast<std::size_t>(in.gcount()) != kHeaderSize) {
    throw Error(Errc::TruncatedData, stage,
                "file shorter than the 348-byte header: " + path.string());
  }
  const char* h = hdr.data();

  if (load<std::int32_t>(h, off::sizeof_hdr) != 348) {
    throw Error(Errc::BadMagic, stage,
                "sizeof_hdr is not 348 (not little-endian NIfTI-1)");
  }
  if (std::memcmp(h + off::magic, "n+1\0", 4) != 0) {
    throw Error(Errc::BadMagic, stage,
                "magic is not \"n+1\" (only single-file .nii is supported)");
  }

  std::array<std::int16_t, 8> dim{};
  for (int i = 0; i < 8; ++i) dim[i] = load<std::int16_t>(h, off::dim + 2 * i);
  if (dim[0] != 3) {
    throw Error(Errc::InvalidArgument, stage,
                "dim[0] must be 3, got " + std::to_string(dim[0]));
  }
  const std::array<int, 3> dims{dim[1], dim[2], dim[3]};

  const auto code = load<std::int16_t>(h, off::datatype);
  DType dtype;
  switch (code) {
    case 2: dtype = DType::U8; break;
    case 4: dtype = DType::I16; break;
    case 16: dtype = DType::F32; break;
    default:
      throw Error(Errc::UnsupportedDatatype, stage,
                  "datatype " + std::to_string(code) +
                      " (supported: 2 u8, 4 i16, 16 f32)");
  }

  Affine affine = Affine::Identity();
  if (load<std::int16_t>(h, off::sform_code) > 0) {
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 4; ++c)
        affine(r, c) = load<float>(h, off::srow_x + 16 * r + 4 * c);
  } else if (load<std::int16_t>(h, off::qform_code) > 0) {
    affine = qform_affine(h);
  } else {
    for (int c = 0; c < 3; ++c) {
      const double s = load<float>(h, off::pixdim + 4 * (c + 1));
      affine(c, c) = s > 0 ? s : 1.0;
    }
  }

  Geometry geom(dims, affine);
  const auto vox_offset = static_cast<std::streamoff>(load<float>(h, off::vox_offset));
  const std::size_t n = geom.voxel_count();
  const std::size_t nbytes = n * bytes_per_voxel(dtype);

  std::vector<char> raw(nbytes);
  in.seekg(vox_offset, std::ios::beg);
  in.read(raw.data(), static_cast<std::streamsize>(nbytes));
  if (!in || static_cast<std::size_t>(in.gcount()) != nbytes) {
    throw Error(Errc::TruncatedData, stage,
                "expected " + std::to_string(nbytes) + " data bytes at offset " +
                    std::to_string(vox_offset));
  }

  std::vector<float> data(n);
  switch (dtype) {
    case DType::U8:
      for (std::size_t i = 0; i < n; ++i)
        data[i] = static_cast<float>(static_cast<unsigned char>(raw[i]));
      break;
    case DType::I16:
      for (std::size_t i = 0; i < n; ++i)
        data[i] = static_cast<float>(load<std::int16_t>(raw.data(), 2 * i));
      break;
    case DType::F32:
      std::memcpy(data.data(), raw.data(), nbytes);
      break;
  }

  const float slope = load<float>(h, off::scl_slope);
  const float inter = load<float>(h, off::scl_inter);
  if (slope != 0.0f && std::isfinite(slope) && !(slope == 1.0f && inter == 0.0f)) {
    for (auto& v : data) v = v * slope + inter;
  }

  return Volume3D(std::move(geom), dtype, std::move(data));
}

void write_nifti(const Volume3D& vol, const std::filesystem::path& path) {
  const std::string stage = "write_nifti";
  const Geometry& g = vol.geometry;
  if (vol.data.size() != g.voxel_count()) {
    throw Error(Errc::InvalidArgument, stage, "data length does not match dims");
  }
  for (int d : g.dims()) {
    if (d > std::numeric_limits<std::int16_t>::max()) {
      throw Error(Errc::InvalidArgument, stage, "dimension exceeds NIfTI-1 limit");
    }
  }

  std::array<char, kVoxOffset> hdr{};
  char* h = hdr.data();
  store<std::int32_t>(h, off::sizeof_hdr, 348);
  std::array<std::int16_t, 8> dim{3, static_cast<std::int16_t>(g.nx()),
                                  static_cast<std::int16_t>(g.ny()),
                                  static_cast<std::int16_t>(g.nz()), 1, 1, 1, 1};
  for (int i = 0; i < 8; ++i) store<std::int16_t>(h, off::dim + 2 * i, dim[i]);
  store<std::int16_t>(h, off::datatype, static_cast<std::int16_t>(vol.dtype));
  store<std::int16_t>(h, off::bitpix,
                      static_cast<std::int16_t>(8 * bytes_per_voxel(vol.dtype)));
  store<float>(h, off::pixdim, 1.0f);
  for (int c = 0; c < 3; ++c)
    store<float>(h, off::pixdim + 4 * (c + 1), static_cast<float>(g.spacing()[c]));
  for (int c = 3; c < 7; ++c) store<float>(h, off::pixdim + 4 * (c + 1), 1.0f);
  store<float>(h, off::vox_offset, static_cast<float>(kVoxOffset));
  store<float>(h, off::scl_slope, 0.0f);
  store<float>(h, off::scl_inter, 0.0f);
  h[off::xyzt_units] = 2;  // mm
  std::strncpy(h + off::descrip, "eegloc", 79);
  store<std::int16_t>(h, off::qform_code, 0);
  store<std::int16_t>(h, off::sform_code, 1);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c)
      store<float>(h, off::srow_x + 16 * r + 4 * c,
                   static_cast<float>(g.affine()(r, c)));
  std::memcpy(h + off::magic, "n+1\0", 4);

  const std::size_t n = vol.data.size();
  std::vector<char> raw(n * bytes_per_voxel(vol.dtype));
  switch (vol.dtype) {
    case DType::U8:
      for (std::size_t i = 0; i < n; ++i) {
        const float v = std::clamp(std::nearbyint(vol.data[i]), 0.0f, 255.0f);
        raw[i] = static_cast<char>(static_cast<unsigned char>(v));
      }
      break;
    case DType::I16:
      for (std::size_t i = 0; i < n; ++i) {
        const float v = std::clamp(std::nearbyint(vol.data[i]), -32768.0f, 32767.0f);
        store<std::int16_t>(raw.data(), 2 * i, static_cast<std::int16_t>(v));
      }
      break;
    case DType::F32:
      std::memcpy(raw.data(), vol.data.data(), raw.size());
      break;
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoFailure, stage, "cannot open for writing: " + path.string());
  out.write(hdr.data(), static_cast<std::streamsize>(hdr.size()));
  out.write(raw.data(), static_cast<std::streamsize>(raw.size()));
  if (!out) throw Error(Errc::IoFailure, stage, "write failed: " + path.string());
}

}  // namespace eegloc
