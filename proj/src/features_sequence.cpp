#include "pcg/features_sequence.hpp"

#include <algorithm>
#include <cmath>

#include "pcg/error.hpp"
#include "pcg/fft.hpp"
#include "pcg/features_time.hpp"
#include "pcg/signal.hpp"
#include "pcg/stats.hpp"

namespace pcg {

namespace {

// Second derivatives of the natural spline (zero at both ends), Thomas
// algorithm on the usual tridiagonal system.
std::vector<double> spline_moments(const std::vector<double>& t, const std::vector<double>& y) {
  const std::size_t n = t.size();
  std::vector<double> m(n, 0.0);
  if (n < 3) return m;
  const std::size_t k = n - 2;
  std::vector<double> diag(k), upper(k), rhs(k);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = t[i] - t[i - 1];
    const double h1 = t[i + 1] - t[i];
    diag[i - 1] = 2.0 * (h0 + h1);
    upper[i - 1] = h1;
    rhs[i - 1] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
  }
  for (std::size_t i = 1; i < k; ++i) {
    const double lower = t[i + 1] - t[i];  // h of row i, equal to upper[i-1]
    const double w = lower / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  m[k] = rhs[k - 1] / diag[k - 1];
  for (std::size_t i = k - 1; i-- > 0;) m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
  return m;
}

void check_sequence(const BeatSequence& seq) {
  if (seq.times.size() != seq.values.size()) throw Error(Errc::InvalidArgument, "times and values differ in length");
  if (seq.times.size() < 4) {
    throw Error(Errc::TooFewBeats, "cubic resampling needs 4 beats, got " + std::to_string(seq.times.size()));
  }
  for (std::size_t i = 1; i < seq.times.size(); ++i) {
    if (!(seq.times[i] > seq.times[i - 1])) throw Error(Errc::InvalidArgument, "beat times must increase");
  }
}

FeatureBlock concat(const std::vector<std::vector<double>>& parts) {
  FeatureBlock block;
  for (const auto& p : parts) {
    FeatureBlock b(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) b.set(i, p[i]);
    block.append(b);
  }
  return block;
}

}  // namespace

const std::vector<double>& sequence_grid() {
  static const std::vector<double> g = [] {
    std::vector<double> v;
    for (int k = 1; k <= 19; ++k) v.push_back(k * 0.05);
    return v;
  }();
  return g;
}

std::vector<double> cubic_resample(const BeatSequence& seq, double uniform_rate_hz) {
  check_sequence(seq);
  if (!(uniform_rate_hz > 0.0)) throw Error(Errc::InvalidArgument, "resampling rate must be positive");
  const std::vector<double>& t = seq.times;
  const std::vector<double>& y = seq.values;
  const std::vector<double> m = spline_moments(t, y);

  const double span = t.back() - t.front();
  const auto count = static_cast<std::size_t>(std::floor(span * uniform_rate_hz + 1e-9)) + 1;
  std::vector<double> out(count);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double tk = std::min(t.front() + static_cast<double>(k) / uniform_rate_hz, t.back());
    while (seg + 2 < t.size() && tk > t[seg + 1]) ++seg;
    const double h = t[seg + 1] - t[seg];
    const double a = (t[seg + 1] - tk) / h;
    const double b = (tk - t[seg]) / h;
    // Written around y[seg] so a constant sequence comes back exactly.
    out[k] = y[seg] + b * (y[seg + 1] - y[seg]) +
             ((a * a * a - a) * m[seg] + (b * b * b - b) * m[seg + 1]) * h * h / 6.0;
  }
  return out;
}

SequenceSpectrum sequence_spectrum(const BeatSequence& seq) {
  std::vector<double> u = cubic_resample(seq, kSequenceRateHz);
  const bool constant = std::all_of(u.begin(), u.end(), [&](double v) { return v == u.front(); });
  const double mu = stats::mean(u);
  for (double& v : u) v = constant ? 0.0 : v - mu;

  const std::size_t n_fft = std::max(kSequenceMinFft, fft::next_pow2(u.size()));
  const signal::WindowedSpectrum s = signal::windowed_spectrum(u, kSequenceRateHz, n_fft);
  SequenceSpectrum out;
  for (double f : sequence_grid()) {
    out.magnitude.push_back(signal::interpolate_bins(s.magnitude, f, kSequenceRateHz, n_fft));
    out.power.push_back(signal::interpolate_bins(s.power, f, kSequenceRateHz, n_fft));
  }
  return out;
}

SequenceFeatures sequence_features(const BeatTable& beats, double rate_hz) {
  if (beats.size() < 4) {
    throw Error(Errc::TooFewBeats, "sequence features need 4 beats, got " + std::to_string(beats.size()));
  }
  const IntervalSeries iv = interval_series(beats, rate_hz);
  std::vector<double> times;
  for (const Beat& b : beats) times.push_back(static_cast<double>(b.s1_start) / rate_hz);

  std::vector<std::vector<double>> mags, pows;
  for (const std::vector<double>* values : {&iv.rr, &iv.sys, &iv.dia}) {
    const SequenceSpectrum s = sequence_spectrum({times, *values});
    mags.push_back(s.magnitude);
    pows.push_back(s.power);
  }
  return {concat(mags), concat(pows)};
}

}  // namespace pcg
