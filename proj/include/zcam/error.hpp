#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace zcam {

enum class Errc {
  // capture input
  UnknownMagic,
  UnsupportedLinkType,
  Truncated,
  MalformedHeader,
  ClockRegression,
  // tabular data
  SchemaMismatch,
  EmptyDataset,
  AllConstant,
  ZeroStd,
  TooFewRows,
  SingleClass,
  KTooLarge,
  EmptyData,
  DimensionMismatch,
  LengthMismatch,
  EmptyScores,
  MissingDataset,
  // models
  NonPositiveNu,
  WidthMismatch,
  InvalidArgument,
  TooLarge,
  VersionMismatch,
  CorruptPayload,
  // plumbing
  Io,
  Usage,
};

std::string_view errc_name(Errc code) noexcept;

/// Exit status category for an error code: 1 usage, 2 data, 3 model.
int exit_status(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code), message_(what) {}

  Errc code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }

 private:
  Errc code_;
  std::string message_;  // without the code prefix
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace zcam
