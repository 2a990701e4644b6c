#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pcg {

// Every failure the pipeline can surface. Per-record failures are reported
// by name in the CLI logs, so keep to_string() in sync.
enum class Errc {
  MalformedWav,
  UnsupportedFormat,
  BadLabel,
  DuplicateRecordId,
  NonMonotonicIndex,
  BrokenStateCycle,
  SchemaMismatch,
  BandOutOfRange,
  InvalidArgument,
  TooShort,
  NoFeasiblePath,
  IndexOutOfRange,
  NoCompleteBeat,
  InsufficientBeats,
  DegenerateEnergy,
  NoPeakInRange,
  SegmentTooShort,
  TooFewBeats,
  DegenerateSignal,
  TooFewVectors,
  SingularSystem,
  DegenerateData,
  NoCrossing,
  NoPositives,
  NoNegatives,
  Io,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace pcg
