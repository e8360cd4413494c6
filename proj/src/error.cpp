#include "zcam/error.hpp"

namespace zcam {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::UnknownMagic: return "UnknownMagic";
    case Errc::UnsupportedLinkType: return "UnsupportedLinkType";
    case Errc::Truncated: return "Truncated";
    case Errc::MalformedHeader: return "MalformedHeader";
    case Errc::ClockRegression: return "ClockRegression";
    case Errc::SchemaMismatch: return "SchemaMismatch";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::AllConstant: return "AllConstant";
    case Errc::ZeroStd: return "ZeroStd";
    case Errc::TooFewRows: return "TooFewRows";
    case Errc::SingleClass: return "SingleClass";
    case Errc::KTooLarge: return "KTooLarge";
    case Errc::EmptyData: return "EmptyData";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::EmptyScores: return "EmptyScores";
    case Errc::MissingDataset: return "MissingDataset";
    case Errc::NonPositiveNu: return "NonPositiveNu";
    case Errc::WidthMismatch: return "WidthMismatch";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::TooLarge: return "TooLarge";
    case Errc::VersionMismatch: return "VersionMismatch";
    case Errc::CorruptPayload: return "CorruptPayload";
    case Errc::Io: return "Io";
    case Errc::Usage: return "Usage";
  }
  return "Unknown";
}

int exit_status(Errc code) noexcept {
  switch (code) {
    case Errc::Usage:
      return 1;
    case Errc::NonPositiveNu:
    case Errc::WidthMismatch:
    case Errc::InvalidArgument:
    case Errc::TooLarge:
    case Errc::VersionMismatch:
    case Errc::CorruptPayload:
      return 3;
    default:
      return 2;
  }
}

}  // namespace zcam
