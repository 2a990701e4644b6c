#pragma once

#include <span>
#include <vector>

#include "pcg/feature_block.hpp"
#include "pcg/types.hpp"

namespace pcg {

inline constexpr std::size_t kSpectrumFeatureCount = 82;
inline constexpr std::size_t kMinSegmentSamples = 8;

// 10..120 Hz for S1 and S2, 10..290 Hz for systole and diastole, 10 Hz steps.
const std::vector<double>& heart_sound_grid();
const std::vector<double>& interval_grid();

// Hann-windowed |DFT| of a segment zero-padded to the next power of two
// >= 4x its length, normalized by the window sum and read off at each grid
// frequency by linear interpolation. Throws Errc::SegmentTooShort below 8
// samples.
std::vector<double> segment_spectrum_at(std::span<const double> seg, double rate_hz, std::span<const double> grid_hz);

// Same estimator as a one-sided periodogram density.
std::vector<double> segment_psd_at(std::span<const double> seg, double rate_hz, std::span<const double> grid_hz);

// Per-beat spectra of the S1, S2, Sys and Dia segments averaged over beats
// (12 + 12 + 29 + 29 values). Beats whose segment is too short are left out
// of that state's average; a state with no usable beat is marked missing.
FeatureBlock spectrum_features(const BeatTable& beats, const PcgRecording& rec);
FeatureBlock psd_features(const BeatTable& beats, const PcgRecording& rec);

}  // namespace pcg
