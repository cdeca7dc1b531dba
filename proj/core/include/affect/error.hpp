#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace affect {

enum class Errc {
  MissingChannel,
  RateMismatch,
  DurationMismatch,
  ParseError,
  IoError,
  NoBaselineData,
  RecordingTooShort,
  AllMissing,
  EmptyWindow,
  UnmappableLabel,
  DegenerateClassDistribution,
  EmptyLabeledSet,
  ShapeMismatch,
  NoForwardRecorded,
  EmptyTrainSet,
  EmptyBatch,
  LengthMismatch,
  SingleClass,
  InvalidArgument,
  NoSubjects,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the Errc codes so
/// callers (the CLI in particular) can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace affect
