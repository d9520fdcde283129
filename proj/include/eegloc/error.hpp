#pragma once

#include <stdexcept>
#include <string>

namespace eegloc {

enum class Errc {
  MissingFile,
  BadMagic,
  UnsupportedDatatype,
  TruncatedData,
  IoFailure,
  InvalidArgument,
  ConstantVolume,
  NoForeground,
  NegativeRadius,
  EmptyHeadMask,
  VolumeTooSmall,
  EmptyVoi,
  GeometryMismatch,
  DuplicateLabel,
  NonUnitVector,
  MissingFiducial,
  TooFewPoints,
  DegenerateConfiguration,
  TooFewCandidates,
  LabelMismatch,
  EmptyInput,
  LengthMismatch,
  ZeroVariance,
  ElectrodeOverlap,
  DegeneratePoint,
  ParseError,
};

const char* errc_name(Errc code) noexcept;

/// True for errors that come from the filesystem rather than from the data.
bool is_io_error(Errc code) noexcept;

/// Library exception. `stage` names the pipeline step that failed
/// ("read_nifti", "detect_spheres", ...).
class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string stage, const std::string& what);

  Errc code() const noexcept { return code_; }
  const std::string& stage() const noexcept { return stage_; }

 private:
  Errc code_;
  std::string stage_;
};

}  // namespace eegloc
