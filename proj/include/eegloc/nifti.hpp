#pragma once

#include "eegloc/volume.hpp"

#include <filesystem>

namespace eegloc {

/// Reads a single-file, uncompressed, little-endian NIfTI-1 volume (.nii).
/// Supported datatypes: u8 (2), i16 (4), f32 (16). Geometry comes from the
/// sform when sform_code > 0, else the qform, else pixdim on the diagonal.
/// scl_slope/scl_inter are applied when the slope is nonzero.
Volume3D read_nifti(const std::filesystem::path& path);

/// Writes `vol` with sizeof_hdr = 348, vox_offset = 352, sform_code = 1.
/// Values are converted to the volume's dtype (rounded and clamped for the
/// integer types).
void write_nifti(const Volume3D& vol, const std::filesystem::path& path);

}  // namespace eegloc
