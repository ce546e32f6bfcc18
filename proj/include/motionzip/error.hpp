#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace motionzip {

enum class Errc {
  MalformedHeader,
  UnsupportedColorspace,
  TruncatedFrame,
  MalformedFrameMarker,
  DimensionMismatch,
  SinkUnavailable,
  SourceUnavailable,
  SpawnFailure,
  NonZeroExit,
  BrokenPipe,
  StageFailure,
  MalformedRow,
  NonMonotonicIndex,
  ZeroInput,
  TooFewFrames,
  SidecarMismatch,
  MissingReference,
  InvalidArgument,
};

constexpr std::string_view category_name(Errc code) {
  switch (code) {
    case Errc::MalformedHeader: return "malformed_header";
    case Errc::UnsupportedColorspace: return "unsupported_colorspace";
    case Errc::TruncatedFrame: return "truncated_frame";
    case Errc::MalformedFrameMarker: return "malformed_frame_marker";
    case Errc::DimensionMismatch: return "dimension_mismatch";
    case Errc::SinkUnavailable: return "sink_unavailable";
    case Errc::SourceUnavailable: return "source_unavailable";
    case Errc::SpawnFailure: return "spawn_failure";
    case Errc::NonZeroExit: return "non_zero_exit";
    case Errc::BrokenPipe: return "broken_pipe";
    case Errc::StageFailure: return "stage_failure";
    case Errc::MalformedRow: return "malformed_row";
    case Errc::NonMonotonicIndex: return "non_monotonic_index";
    case Errc::ZeroInput: return "zero_input";
    case Errc::TooFewFrames: return "too_few_frames";
    case Errc::SidecarMismatch: return "sidecar_mismatch";
    case Errc::MissingReference: return "missing_reference";
    case Errc::InvalidArgument: return "invalid_argument";
  }
  return "unknown";
}

/// Every failure raised by the library. `code()` is the category; for
/// StageFailure, `cause()` is the category of the error that tore the
/// pipeline down.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(detail), code_(code), cause_(code) {}
  Error(Errc code, Errc cause, const std::string& detail)
      : std::runtime_error(detail), code_(code), cause_(cause) {}

  Errc code() const noexcept { return code_; }
  Errc cause() const noexcept { return cause_; }

 private:
  Errc code_;
  Errc cause_;
};

}  // namespace motionzip
