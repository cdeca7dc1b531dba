#include "affect/error.hpp"

namespace affect {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::MissingChannel: return "MissingChannel";
    case Errc::RateMismatch: return "RateMismatch";
    case Errc::DurationMismatch: return "DurationMismatch";
    case Errc::ParseError: return "ParseError";
    case Errc::IoError: return "IoError";
    case Errc::NoBaselineData: return "NoBaselineData";
    case Errc::RecordingTooShort: return "RecordingTooShort";
    case Errc::AllMissing: return "AllMissing";
    case Errc::EmptyWindow: return "EmptyWindow";
    case Errc::UnmappableLabel: return "UnmappableLabel";
    case Errc::DegenerateClassDistribution: return "DegenerateClassDistribution";
    case Errc::EmptyLabeledSet: return "EmptyLabeledSet";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::NoForwardRecorded: return "NoForwardRecorded";
    case Errc::EmptyTrainSet: return "EmptyTrainSet";
    case Errc::EmptyBatch: return "EmptyBatch";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::SingleClass: return "SingleClass";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::NoSubjects: return "NoSubjects";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace affect
