#include "pcg/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <string>

#include "pcg/error.hpp"
#include "pcg/iir.hpp"

namespace pcg {

namespace {

struct Ratio {
  std::int64_t up{1};
  std::int64_t down{1};
};

// Integer rates give an exact ratio; otherwise both are taken in
// milli-hertz.
Ratio rational_ratio(double from_hz, double to_hz) {
  const auto is_integral = [](double hz) { return std::abs(hz - std::round(hz)) < 1e-9; };
  const double scale = is_integral(from_hz) && is_integral(to_hz) ? 1.0 : 1000.0;
  const std::int64_t a = std::llround(from_hz * scale);
  const std::int64_t b = std::llround(to_hz * scale);
  const std::int64_t g = std::gcd(a, b);
  return {b / g, a / g};
}

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

std::vector<double> design_antialias(std::int64_t up, std::int64_t down) {
  const std::int64_t half_len = 10 * std::max(up, down);
  const std::size_t len = static_cast<std::size_t>(2 * half_len + 1);
  // Cutoff as a fraction of the upsampled Nyquist.
  const double cutoff = 0.9 / static_cast<double>(std::max(up, down));
  constexpr double beta = 5.0;
  const double i0_beta = std::cyl_bessel_i(0.0, beta);
  std::vector<double> h(len);
  for (std::size_t k = 0; k < len; ++k) {
    const double m = static_cast<double>(k) - static_cast<double>(half_len);
    const double r = m / static_cast<double>(half_len);
    const double kaiser = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
    h[k] = static_cast<double>(up) * cutoff * sinc(cutoff * m) * kaiser;
  }
  return h;
}

}  // namespace

void PreprocessConfig::validate() const {
  if (!(working_rate_hz > 0.0)) throw Error(Errc::BandOutOfRange, "working rate must be positive");
  if (!(band_low_hz > 0.0 && band_low_hz < band_high_hz && band_high_hz < working_rate_hz / 2.0)) {
    throw Error(Errc::BandOutOfRange, "need 0 < band_low < band_high < working_rate/2, got [" +
                                          std::to_string(band_low_hz) + ", " + std::to_string(band_high_hz) +
                                          "] at " + std::to_string(working_rate_hz) + " Hz");
  }
  if (filter_order < 1) throw Error(Errc::BandOutOfRange, "filter order must be >= 1");
  if (edge_pad_s < 0.0) throw Error(Errc::InvalidArgument, "edge padding must be >= 0");
}

PcgRecording resample(const PcgRecording& rec, double target_rate_hz) {
  if (rec.samples.empty() || !(rec.sample_rate_hz > 0.0)) {
    throw Error(Errc::InvalidArgument, "resample: empty recording or bad rate");
  }
  if (!(target_rate_hz > 0.0)) throw Error(Errc::InvalidArgument, "resample: target rate must be positive");
  if (target_rate_hz == rec.sample_rate_hz) return rec;

  const Ratio ratio = rational_ratio(rec.sample_rate_hz, target_rate_hz);
  const std::int64_t up = ratio.up;
  const std::int64_t down = ratio.down;
  const std::vector<double> h = design_antialias(up, down);
  const auto taps = static_cast<std::int64_t>(h.size());
  const std::int64_t delay = (taps - 1) / 2;
  const auto n_in = static_cast<std::int64_t>(rec.samples.size());
  const std::int64_t n_out = (n_in * up + down - 1) / down;

  PcgRecording out;
  out.record_id = rec.record_id;
  out.sample_rate_hz = target_rate_hz;
  out.samples.assign(static_cast<std::size_t>(n_out), 0.0);
  for (std::int64_t m = 0; m < n_out; ++m) {
    // Position in the zero-stuffed stream, delayed to centre the filter.
    const std::int64_t t = m * down + delay;
    double acc = 0.0;
    for (std::int64_t k = t % up; k < taps; k += up) {
      const std::int64_t idx = (t - k) / up;
      if (idx < 0) break;
      if (idx < n_in) acc += h[static_cast<std::size_t>(k)] * rec.samples[static_cast<std::size_t>(idx)];
    }
    out.samples[static_cast<std::size_t>(m)] = acc;
  }
  return out;
}

PcgRecording bandpass_zero_phase(const PcgRecording& rec, const PreprocessConfig& cfg) {
  cfg.validate();
  if (std::abs(rec.sample_rate_hz - cfg.working_rate_hz) > 1e-9) {
    throw Error(Errc::InvalidArgument, "bandpass: recording is not at the working rate");
  }
  const iir::Sos sos = iir::butter_bandpass(cfg.filter_order, cfg.band_low_hz, cfg.band_high_hz, cfg.working_rate_hz);
  const auto pad = static_cast<std::size_t>(std::llround(cfg.edge_pad_s * cfg.working_rate_hz));
  PcgRecording out;
  out.record_id = rec.record_id;
  out.sample_rate_hz = rec.sample_rate_hz;
  out.samples = iir::filtfilt(sos, rec.samples, pad);
  return out;
}

PcgRecording preprocess(const PcgRecording& rec, const PreprocessConfig& cfg) {
  cfg.validate();
  return bandpass_zero_phase(resample(rec, cfg.working_rate_hz), cfg);
}

}  // namespace pcg
