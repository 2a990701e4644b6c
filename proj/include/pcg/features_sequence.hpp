#pragma once

#include <vector>

#include "pcg/feature_block.hpp"
#include "pcg/types.hpp"

namespace pcg {

inline constexpr std::size_t kSequenceFeatureCount = 57;
inline constexpr double kSequenceRateHz = 2.0;
inline constexpr std::size_t kSequenceMinFft = 256;

// Beat-to-beat durations anchored at S1 onsets (seconds).
struct BeatSequence {
  std::vector<double> times;
  std::vector<double> values;
};

// 0.05, 0.10, ..., 0.95 Hz.
const std::vector<double>& sequence_grid();

// Natural cubic spline through the sequence sampled at uniform_rate from
// the first to the last anchor. Needs at least four beats.
std::vector<double> cubic_resample(const BeatSequence& seq, double uniform_rate_hz);

struct SequenceSpectrum {
  std::vector<double> magnitude;  // one per sequence_grid() point
  std::vector<double> power;
};

// Spline-resampled at 2 Hz, mean removed, Hann windowed and zero padded to
// at least 256 points.
SequenceSpectrum sequence_spectrum(const BeatSequence& seq);

struct SequenceFeatures {
  FeatureBlock spectrum{kSequenceFeatureCount};  // HR, Sys, Dia
  FeatureBlock psd{kSequenceFeatureCount};
};

// RR, systole and diastole sequences of the beat table. Throws
// Errc::TooFewBeats below four beats.
SequenceFeatures sequence_features(const BeatTable& beats, double rate_hz);

}  // namespace pcg
