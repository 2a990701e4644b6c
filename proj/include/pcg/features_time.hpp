#pragma once

#include <optional>
#include <span>
#include <vector>

#include "pcg/feature_block.hpp"
#include "pcg/types.hpp"

namespace pcg {

inline constexpr std::size_t kIntervalFeatureCount = 22;
inline constexpr std::size_t kEnergyFeatureCount = 10;
inline constexpr std::size_t kHeartRateFeatureCount = 2;

// Per-beat durations in seconds. Every beat is closed by the next S1
// onset, so rr has one entry per beat.
struct IntervalSeries {
  std::vector<double> rr;
  std::vector<double> s1;
  std::vector<double> sys;
  std::vector<double> s2;
  std::vector<double> dia;
};

IntervalSeries interval_series(const BeatTable& beats, double rate_hz);

// Features 1-22 of the interval group (means and sample SDs of durations,
// duration ratios and amplitude ratios). Needs at least two beats.
FeatureBlock interval_features(const BeatTable& beats, const PcgRecording& rec);

// Recording-level heart-sound energy/magnitude ratios followed by per-beat
// energy ratios. Throws Errc::DegenerateEnergy on a vanishing denominator.
FeatureBlock energy_features(const StateSequence& seq, const PcgRecording& rec);

struct HeartRateConfig {
  double window_s{10.0};
  double overlap{0.5};
  double min_period_s{0.3};
  double max_period_s{2.0};
  double envelope_lowpass_hz{20.0};
  // Normalized autocorrelation a peak must reach to count as a beat period.
  double min_peak_correlation{0.25};
};

struct HeartRateEstimate {
  double m_hr{0.0};  // mean cycle period, seconds
  double sd_hr{0.0};
  std::size_t windows{0};
};

// Cycle period from autocorrelation peaks of the envelope, averaged over
// overlapping windows. Independent of any segmentation.
HeartRateEstimate heart_rate_features(const PcgRecording& rec, const HeartRateConfig& cfg = {});

// Mean-removed unbiased autocorrelation normalized to 1 at lag 0, for lags
// 0..max_lag.
std::vector<double> unbiased_autocorrelation(std::span<const double> x, std::size_t max_lag);

// Dominant period (seconds) of an envelope within [min_s, max_s]: the
// largest local autocorrelation maximum, replaced by a local maximum near
// an integer fraction of its lag when that one is nearly as strong.
std::optional<double> dominant_period(std::span<const double> envelope, double rate_hz, double min_s, double max_s,
                                      double min_peak_correlation);

}  // namespace pcg
