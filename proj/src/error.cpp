#include "eegloc/error.hpp"

namespace eegloc {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::MissingFile: return "MissingFile";
    case Errc::BadMagic: return "BadMagic";
    case Errc::UnsupportedDatatype: return "UnsupportedDatatype";
    case Errc::TruncatedData: return "TruncatedData";
    case Errc::IoFailure: return "IoFailure";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::ConstantVolume: return "ConstantVolume";
    case Errc::NoForeground: return "NoForeground";
    case Errc::NegativeRadius: return "NegativeRadius";
    case Errc::EmptyHeadMask: return "EmptyHeadMask";
    case Errc::VolumeTooSmall: return "VolumeTooSmall";
    case Errc::EmptyVoi: return "EmptyVoi";
    case Errc::GeometryMismatch: return "GeometryMismatch";
    case Errc::DuplicateLabel: return "DuplicateLabel";
    case Errc::NonUnitVector: return "NonUnitVector";
    case Errc::MissingFiducial: return "MissingFiducial";
    case Errc::TooFewPoints: return "TooFewPoints";
    case Errc::DegenerateConfiguration: return "DegenerateConfiguration";
    case Errc::TooFewCandidates: return "TooFewCandidates";
    case Errc::LabelMismatch: return "LabelMismatch";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::ZeroVariance: return "ZeroVariance";
    case Errc::ElectrodeOverlap: return "ElectrodeOverlap";
    case Errc::DegeneratePoint: return "DegeneratePoint";
    case Errc::ParseError: return "ParseError";
  }
  return "Unknown";
}

bool is_io_error(Errc code) noexcept {
  return code == Errc::MissingFile || code == Errc::IoFailure ||
         code == Errc::TruncatedData;
}

Error::Error(Errc code, std::string stage, const std::string& what)
    : std::runtime_error(stage + ": " + errc_name(code) + ": " + what),
      code_(code),
      stage_(std::move(stage)) {}

}  // namespace eegloc
