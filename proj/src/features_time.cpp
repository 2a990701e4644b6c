#include "pcg/features_time.hpp"

#include <algorithm>
#include <cmath>

#include "pcg/error.hpp"
#include "pcg/fft.hpp"
#include "pcg/segmentation.hpp"
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

double mean_abs(const std::vector<double>& x, std::size_t begin, std::size_t end) {
  if (end <= begin) return 0.0;
  double s = 0.0;
  for (std::size_t i = begin; i < end; ++i) s += std::abs(x[i]);
  return s / static_cast<double>(end - begin);
}

double energy(const std::vector<double>& x, std::size_t begin, std::size_t end) {
  double s = 0.0;
  for (std::size_t i = begin; i < end; ++i) s += x[i] * x[i];
  return s;
}

bool degenerate(double denominator, std::size_t count) {
  return count == 0 || denominator <= 1e-12 * static_cast<double>(count);
}

void check_beats_fit(const BeatTable& beats, std::size_t n) {
  for (const Beat& b : beats) {
    if (!(b.s1_start < b.s1_end && b.s1_end < b.sys_end && b.sys_end < b.s2_end && b.s2_end < b.dia_end) ||
        b.dia_end > n) {
      throw Error(Errc::InvalidArgument, "beat boundaries inconsistent with recording");
    }
  }
}

}  // namespace

IntervalSeries interval_series(const BeatTable& beats, double rate_hz) {
  IntervalSeries out;
  const auto seconds = [rate_hz](std::size_t a, std::size_t b) { return static_cast<double>(b - a) / rate_hz; };
  for (const Beat& b : beats) {
    out.rr.push_back(seconds(b.s1_start, b.dia_end));
    out.s1.push_back(seconds(b.s1_start, b.s1_end));
    out.sys.push_back(seconds(b.s1_end, b.sys_end));
    out.s2.push_back(seconds(b.sys_end, b.s2_end));
    out.dia.push_back(seconds(b.s2_end, b.dia_end));
  }
  return out;
}

FeatureBlock interval_features(const BeatTable& beats, const PcgRecording& rec) {
  if (beats.size() < 2) throw Error(Errc::InsufficientBeats, "interval features need at least two beats");
  check_beats_fit(beats, rec.samples.size());
  const IntervalSeries iv = interval_series(beats, rec.sample_rate_hz);

  std::vector<double> sys_rr, dia_rr, sys_dia, amp_sys_s1, amp_dia_s2, s1_s2;
  for (std::size_t i = 0; i < beats.size(); ++i) {
    const Beat& b = beats[i];
    sys_rr.push_back(iv.sys[i] / iv.rr[i]);
    dia_rr.push_back(iv.dia[i] / iv.rr[i]);
    sys_dia.push_back(iv.sys[i] / iv.dia[i]);
    s1_s2.push_back(iv.s1[i] / iv.s2[i]);
    const double a_s1 = mean_abs(rec.samples, b.s1_start, b.s1_end);
    const double a_sys = mean_abs(rec.samples, b.s1_end, b.sys_end);
    const double a_s2 = mean_abs(rec.samples, b.sys_end, b.s2_end);
    const double a_dia = mean_abs(rec.samples, b.s2_end, b.dia_end);
    if (a_s1 > 0.0) amp_sys_s1.push_back(a_sys / a_s1);
    if (a_s2 > 0.0) amp_dia_s2.push_back(a_dia / a_s2);
  }

  FeatureBlock block(kIntervalFeatureCount);
  put_mean_sd(block, 0, iv.rr);
  put_mean_sd(block, 2, iv.s1);
  put_mean_sd(block, 4, iv.s2);
  put_mean_sd(block, 6, iv.sys);
  put_mean_sd(block, 8, iv.dia);
  put_mean_sd(block, 10, sys_rr);
  put_mean_sd(block, 12, dia_rr);
  put_mean_sd(block, 14, sys_dia);
  put_mean_sd(block, 16, amp_sys_s1);
  put_mean_sd(block, 18, amp_dia_s2);
  put_mean_sd(block, 20, s1_s2);
  return block;
}

FeatureBlock energy_features(const StateSequence& seq, const PcgRecording& rec) {
  const std::vector<double>& x = rec.samples;
  if (seq.labels.size() != x.size()) throw Error(Errc::InvalidArgument, "labels and samples differ in length");

  double e_hs = 0.0, e_rem = 0.0, m_hs = 0.0, m_rem = 0.0;
  std::size_t n_hs = 0, n_rem = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const HeartState s = seq.labels[i];
    if (s == HeartState::S1 || s == HeartState::S2) {
      e_hs += x[i] * x[i];
      m_hs += std::abs(x[i]);
      ++n_hs;
    } else {
      e_rem += x[i] * x[i];
      m_rem += std::abs(x[i]);
      ++n_rem;
    }
  }
  const double e_tot = e_hs + e_rem;
  const double m_tot = m_hs + m_rem;
  const std::size_t n_tot = x.size();
  if (degenerate(e_tot, n_tot) || degenerate(m_tot, n_tot)) {
    throw Error(Errc::DegenerateEnergy, "recording has no energy");
  }
  if (degenerate(e_rem, n_rem) || degenerate(m_rem, n_rem)) {
    throw Error(Errc::DegenerateEnergy, "no energy outside the heart sounds");
  }

  FeatureBlock block(kEnergyFeatureCount);
  block.set(0, e_hs / e_tot);
  block.set(1, m_hs / m_tot);
  block.set(2, e_hs / e_rem);
  block.set(3, m_hs / m_rem);

  std::vector<double> sys_cycle, dia_cycle, hs_cycle;
  BeatTable beats;
  try {
    beats = to_beats(seq);
  } catch (const Error& e) {
    if (e.code() != Errc::NoCompleteBeat) throw;
  }
  for (const Beat& b : beats) {
    const double e_cycle = energy(x, b.s1_start, b.dia_end);
    if (degenerate(e_cycle, b.length())) continue;
    const double e_s1 = energy(x, b.s1_start, b.s1_end);
    const double e_sys = energy(x, b.s1_end, b.sys_end);
    const double e_s2 = energy(x, b.sys_end, b.s2_end);
    const double e_dia = energy(x, b.s2_end, b.dia_end);
    sys_cycle.push_back(e_sys / e_cycle);
    dia_cycle.push_back(e_dia / e_cycle);
    hs_cycle.push_back((e_s1 + e_s2) / e_cycle);
  }
  put_mean_sd(block, 4, sys_cycle);
  put_mean_sd(block, 6, dia_cycle);
  put_mean_sd(block, 8, hs_cycle);
  return block;
}

std::vector<double> unbiased_autocorrelation(std::span<const double> x, std::size_t max_lag) {
  const std::size_t n = x.size();
  std::vector<double> out(max_lag + 1, 0.0);
  if (n == 0) return out;
  const double m = stats::mean(x);
  const std::size_t n_fft = fft::next_pow2(2 * n);
  std::vector<fft::cplx> buf(n_fft, 0.0);
  for (std::size_t i = 0; i < n; ++i) buf[i] = x[i] - m;
  std::vector<fft::cplx> spec = fft::forward(buf);
  for (auto& v : spec) v = std::norm(v);
  const std::vector<fft::cplx> raw = fft::inverse(spec);
  const double r0 = raw[0].real() / static_cast<double>(n);
  if (!(r0 > 0.0)) return out;
  for (std::size_t k = 0; k <= max_lag && k < n; ++k) {
    out[k] = raw[k].real() / static_cast<double>(n - k) / r0;
  }
  return out;
}

std::optional<double> dominant_period(std::span<const double> envelope, double rate_hz, double min_s, double max_s,
                                      double min_peak_correlation) {
  const std::size_t n = envelope.size();
  if (n < 4) return std::nullopt;
  const auto min_lag = static_cast<std::size_t>(std::max(1.0, std::ceil(min_s * rate_hz)));
  const std::size_t max_lag = std::min(static_cast<std::size_t>(std::floor(max_s * rate_hz)), n - 2);
  if (min_lag >= max_lag) return std::nullopt;
  const std::vector<double> ac = unbiased_autocorrelation(envelope, max_lag + 1);
  if (!(ac[0] > 0.0)) return std::nullopt;

  std::vector<std::size_t> peaks;
  for (std::size_t k = min_lag; k <= max_lag; ++k) {
    if (ac[k] > ac[k - 1] && ac[k] >= ac[k + 1]) peaks.push_back(k);
  }
  if (peaks.empty()) return std::nullopt;
  std::size_t best = peaks.front();
  for (std::size_t k : peaks) {
    if (ac[k] > ac[best]) best = k;
  }
  if (ac[best] < min_peak_correlation) return std::nullopt;

  // The unbiased estimate weights multiples of the period almost equally;
  // fall back to the fundamental when it is nearly as strong.
  for (bool moved = true; moved;) {
    moved = false;
    for (int divisor = 2; divisor <= 3 && !moved; ++divisor) {
      const double target = static_cast<double>(best) / divisor;
      for (std::size_t k : peaks) {
        if (std::abs(static_cast<double>(k) - target) <= 0.08 * target && ac[k] >= 0.9 * ac[best]) {
          best = k;
          moved = true;
          break;
        }
      }
    }
  }

  const double a = ac[best - 1];
  const double b = ac[best];
  const double c = ac[best + 1];
  const double curvature = a - 2.0 * b + c;
  const double offset = curvature < 0.0 ? 0.5 * (a - c) / curvature : 0.0;
  return (static_cast<double>(best) + offset) / rate_hz;
}

HeartRateEstimate heart_rate_features(const PcgRecording& rec, const HeartRateConfig& cfg) {
  if (rec.samples.empty() || !(rec.sample_rate_hz > 0.0)) throw Error(Errc::InvalidArgument, "empty recording");
  const std::vector<double> env = compute_envelope(rec, cfg.envelope_lowpass_hz);
  const std::size_t n = env.size();
  const auto win = static_cast<std::size_t>(std::llround(cfg.window_s * rec.sample_rate_hz));
  const std::size_t hop = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(
                                                       static_cast<double>(win) * (1.0 - cfg.overlap))));

  std::vector<std::pair<std::size_t, std::size_t>> windows;
  if (n <= win) {
    windows.emplace_back(0, n);
  } else {
    for (std::size_t start = 0; start + win <= n; start += hop) windows.emplace_back(start, start + win);
  }

  std::vector<double> periods;
  for (const auto& [begin, end] : windows) {
    std::span<const double> view(env.data() + begin, end - begin);
    if (auto p = dominant_period(view, rec.sample_rate_hz, cfg.min_period_s, cfg.max_period_s,
                                 cfg.min_peak_correlation)) {
      periods.push_back(*p);
    }
  }
  if (periods.empty()) throw Error(Errc::NoPeakInRange, "no autocorrelation peak in the heart-rate range");

  HeartRateEstimate est;
  est.m_hr = stats::mean(periods);
  est.sd_hr = stats::sample_sd(periods);
  est.windows = periods.size();
  return est;
}

}  // namespace pcg
