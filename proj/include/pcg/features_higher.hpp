#pragma once

#include <span>
#include <vector>

#include "pcg/feature_block.hpp"
#include "pcg/types.hpp"

namespace pcg {

inline constexpr std::size_t kKurtosisFeatureCount = 8;
inline constexpr std::size_t kCycloFeatureCount = 4;

// E[x^4] / E[x^2]^2 with raw (non-central) moments. Throws
// Errc::DegenerateSignal when E[x^2] <= 1e-24.
double kurtosis(std::span<const double> x);

// Mean and SD over beats of the S1, S2, Sys and Dia segment kurtosis.
// Degenerate segments are left out of their state's statistics.
FeatureBlock kurtosis_features(const BeatTable& beats, const PcgRecording& rec);

struct CycloConfig {
  double subsequence_len_s{5.0};
  double max_cycle_freq_hz{3.0};  // beta
  double envelope_cutoff_hz{20.0};
  // Band searched for the basic cycle frequency.
  double min_cycle_freq_hz{0.5};

  void validate() const;
};

struct CycleSpectrum {
  std::vector<double> alpha_hz;  // DFT bins in (0, beta]
  std::vector<double> gamma;
};

// |DFT| of the Hann-windowed, mean-removed squared envelope of x (Hilbert
// magnitude low-passed at envelope_cutoff_hz),
// zero padded to a power of two >= 4x its length, on the bins in (0, beta].
CycleSpectrum cycle_freq_spectral_density(std::span<const double> x, double rate_hz, double beta_hz,
                                          double envelope_cutoff_hz = 20.0);

// Index into gamma of the basic cycle frequency: the first local maximum in
// [min_hz, beta] that clears both 3x the median and a quarter of the
// largest value in that band, else the band's largest value.
std::size_t basic_cycle_index(const CycleSpectrum& cs, double min_hz);

struct CycloMeasures {
  double degree{0.0};     // gamma(eta) / trapezoid integral of gamma, unit grid step
  double sharpness{0.0};  // max(gamma) / median(gamma)
  double eta_hz{0.0};
};

CycloMeasures cyclo_measures(const CycleSpectrum& cs, double min_hz);

// Mean and SD of both measures over equal subsequences of the recording;
// a trailing partial subsequence is dropped. Throws Errc::TooShort when the
// recording holds no full subsequence. With a single subsequence the SDs
// are marked missing.
FeatureBlock cyclostationarity_features(const PcgRecording& rec, const CycloConfig& cfg = {});

}  // namespace pcg
