#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "pcg/types.hpp"

namespace pcg {

struct DurationBounds {
  double min_s{0.0};
  double max_s{0.0};
};

struct SegmentationConfig {
  double envelope_lowpass_hz{20.0};
  // Indexed by HeartState.
  std::array<DurationBounds, kNumStates> state_duration_bounds{{
      {0.05, 0.25},  // S1
      {0.10, 0.50},  // Sys
      {0.04, 0.20},  // S2
      {0.15, 1.50},  // Dia
  }};
  double hr_low_bpm{30.0};
  double hr_high_bpm{200.0};
  // Rate of the observation lattice the Viterbi runs on.
  double frame_rate_hz{50.0};
  // Hard-EM refits of the emission Gaussians.
  int emission_iterations{3};

  void validate() const;
};

// Hilbert magnitude, zero-phase low-passed, clipped at 0. Same length as
// the input.
std::vector<double> compute_envelope(const PcgRecording& rec, double lowpass_hz = 20.0);

// Duration-constrained four-state Viterbi over envelope observations.
// Emission Gaussians are fitted on the recording itself; duration
// distributions are centred on the recording's autocorrelation heart rate.
// Throws Errc::TooShort below two cardiac cycles and Errc::NoFeasiblePath
// when the duration bounds cannot tile the recording.
StateSequence segment(const PcgRecording& rec, const SegmentationConfig& cfg);

// Piecewise-constant expansion. Samples before the first event take the
// state preceding it in the cycle.
StateSequence from_annotation(const StateAnnotation& ann, std::size_t n_samples, double rate_hz);

// Run-length encoding of the labels; inverse of from_annotation for
// sequences whose first run starts at 0.
StateAnnotation to_annotation(const StateSequence& seq);

struct StateRun {
  HeartState state{HeartState::S1};
  std::size_t begin{0};
  std::size_t end{0};
};

std::vector<StateRun> run_lengths(const std::vector<HeartState>& labels);

// One row per S1 -> Sys -> S2 -> Dia cycle closed by the next S1 onset.
// A leading cycle is used only if the sequence starts at an S1 onset.
// Throws Errc::NoCompleteBeat when none exists.
BeatTable to_beats(const StateSequence& seq);

}  // namespace pcg
