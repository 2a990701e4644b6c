#include "pcg/features_higher.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "pcg/error.hpp"
#include "pcg/fft.hpp"
#include "pcg/segmentation.hpp"
#include "pcg/signal.hpp"
#include "pcg/stats.hpp"

namespace pcg {

namespace {

void put_mean_sd(FeatureBlock& block, std::size_t slot, const std::vector<double>& values) {
  if (values.empty()) {
    block.mark_missing(slot);
    block.mark_missing(slot + 1);
    return;
  }
  block.set(slot, stats::mean(values));
  if (values.size() >= 2) {
    block.set(slot + 1, stats::sample_sd(values));
  } else {
    block.mark_missing(slot + 1);
  }
}

}  // namespace

double kurtosis(std::span<const double> x) {
  if (x.empty()) throw Error(Errc::DegenerateSignal, "kurtosis of an empty segment");
  // Scale to unit peak first: the ratio is scale free, the moments cannot
  // overflow, and a constant segment gives exactly 1.
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  if (!(peak > 0.0)) throw Error(Errc::DegenerateSignal, "segment has no power");
  double m2 = 0.0;
  double m4 = 0.0;
  for (double v : x) {
    const double u = v / peak;
    const double u2 = u * u;
    m2 += u2;
    m4 += u2 * u2;
  }
  const double n = static_cast<double>(x.size());
  m2 /= n;
  m4 /= n;
  return m4 / (m2 * m2);
}

FeatureBlock kurtosis_features(const BeatTable& beats, const PcgRecording& rec) {
  if (beats.empty()) throw Error(Errc::NoCompleteBeat, "no complete beat for kurtosis features");
  const std::span<const double> x(rec.samples);
  const std::array<std::pair<std::size_t Beat::*, std::size_t Beat::*>, 4> states{{
      {&Beat::s1_start, &Beat::s1_end},
      {&Beat::sys_end, &Beat::s2_end},
      {&Beat::s1_end, &Beat::sys_end},
      {&Beat::s2_end, &Beat::dia_end},
  }};
  FeatureBlock block(kKurtosisFeatureCount);
  for (std::size_t s = 0; s < states.size(); ++s) {
    std::vector<double> values;
    for (const Beat& b : beats) {
      const std::size_t begin = b.*states[s].first;
      const std::size_t end = b.*states[s].second;
      if (end > x.size() || end < begin) throw Error(Errc::InvalidArgument, "beat outside recording");
      try {
        values.push_back(kurtosis(x.subspan(begin, end - begin)));
      } catch (const Error& e) {
        if (e.code() != Errc::DegenerateSignal) throw;
      }
    }
    put_mean_sd(block, 2 * s, values);
  }
  return block;
}

void CycloConfig::validate() const {
  if (!(subsequence_len_s > 0.0)) throw Error(Errc::InvalidArgument, "subsequence length must be positive");
  if (!(max_cycle_freq_hz > min_cycle_freq_hz && min_cycle_freq_hz > 0.0)) {
    throw Error(Errc::InvalidArgument, "cycle frequency band must satisfy 0 < min < beta");
  }
  if (!(envelope_cutoff_hz > max_cycle_freq_hz)) {
    throw Error(Errc::InvalidArgument, "envelope cutoff must exceed beta");
  }
  if (subsequence_len_s * min_cycle_freq_hz < 2.0) {
    throw Error(Errc::InvalidArgument, "subsequence must span two periods of the slowest cycle frequency");
  }
}

CycleSpectrum cycle_freq_spectral_density(std::span<const double> x, double rate_hz, double beta_hz,
                                          double envelope_cutoff_hz) {
  if (x.size() < 2 || !(rate_hz > 0.0) || !(beta_hz > 0.0)) {
    throw Error(Errc::InvalidArgument, "cycle spectrum needs a signal and positive rates");
  }
  PcgRecording tmp;
  tmp.samples.assign(x.begin(), x.end());
  tmp.sample_rate_hz = rate_hz;
  std::vector<double> e = compute_envelope(tmp, envelope_cutoff_hz);
  for (double& v : e) v *= v;
  const double mu = stats::mean(e);
  for (double& v : e) v -= mu;

  const std::size_t n_fft = fft::next_pow2(4 * e.size());
  const signal::WindowedSpectrum s = signal::windowed_spectrum(e, rate_hz, n_fft);
  const double df = rate_hz / static_cast<double>(n_fft);
  CycleSpectrum out;
  for (std::size_t k = 1; k < s.magnitude.size() && static_cast<double>(k) * df <= beta_hz; ++k) {
    out.alpha_hz.push_back(static_cast<double>(k) * df);
    out.gamma.push_back(s.magnitude[k]);
  }
  if (out.gamma.empty()) throw Error(Errc::InvalidArgument, "beta below the cycle-frequency resolution");
  return out;
}

std::size_t basic_cycle_index(const CycleSpectrum& cs, double min_hz) {
  const std::vector<double>& g = cs.gamma;
  std::size_t lo = 0;
  while (lo < g.size() && cs.alpha_hz[lo] < min_hz) ++lo;
  if (lo == g.size()) lo = 0;
  const auto band_max = std::max_element(g.begin() + static_cast<std::ptrdiff_t>(lo), g.end());
  const double floor = std::max(3.0 * stats::median(g), 0.25 * *band_max);
  for (std::size_t k = std::max<std::size_t>(lo, 1); k + 1 < g.size(); ++k) {
    if (g[k] > floor && g[k] >= g[k - 1] && g[k] > g[k + 1]) return k;
  }
  return static_cast<std::size_t>(band_max - g.begin());
}

CycloMeasures cyclo_measures(const CycleSpectrum& cs, double min_hz) {
  const std::vector<double>& g = cs.gamma;
  CycloMeasures m;
  const std::size_t eta = basic_cycle_index(cs, min_hz);
  m.eta_hz = cs.alpha_hz[eta];
  double integral = 0.0;
  for (std::size_t k = 1; k < g.size(); ++k) integral += 0.5 * (g[k - 1] + g[k]);
  if (g.size() == 1) integral = g.front();
  const double med = stats::median(g);
  const double peak = *std::max_element(g.begin(), g.end());
  m.degree = integral > 0.0 ? g[eta] / integral : 0.0;
  m.sharpness = med > 0.0 ? peak / med : 0.0;
  return m;
}

FeatureBlock cyclostationarity_features(const PcgRecording& rec, const CycloConfig& cfg) {
  cfg.validate();
  const auto len = static_cast<std::size_t>(std::llround(cfg.subsequence_len_s * rec.sample_rate_hz));
  const std::size_t count = len > 0 ? rec.samples.size() / len : 0;
  if (count == 0) throw Error(Errc::TooShort, "recording shorter than one cyclostationarity subsequence");

  std::vector<double> degree, sharpness;
  const std::span<const double> x(rec.samples);
  for (std::size_t i = 0; i < count; ++i) {
    const CycleSpectrum cs = cycle_freq_spectral_density(x.subspan(i * len, len), rec.sample_rate_hz,
                                                         cfg.max_cycle_freq_hz, cfg.envelope_cutoff_hz);
    const CycloMeasures m = cyclo_measures(cs, cfg.min_cycle_freq_hz);
    degree.push_back(m.degree);
    sharpness.push_back(m.sharpness);
  }
  FeatureBlock block(kCycloFeatureCount);
  put_mean_sd(block, 0, degree);
  put_mean_sd(block, 2, sharpness);
  return block;
}

}  // namespace pcg
