#include "pcg/signal.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pcg/fft.hpp"

namespace pcg::signal {

std::vector<double> hann(std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  const double denom = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / denom);
  }
  return w;
}

std::vector<double> hilbert_magnitude(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  std::vector<fft::cplx> buf(x.begin(), x.end());
  std::vector<fft::cplx> spec = fft::forward(buf);
  // Analytic signal: keep DC (and Nyquist for even n), double positive
  // frequencies, zero negative ones.
  const std::size_t half = n / 2;
  for (std::size_t k = 1; k < n; ++k) {
    if (k < (n + 1) / 2) {
      spec[k] *= 2.0;
    } else if (!(n % 2 == 0 && k == half)) {
      spec[k] = 0.0;
    }
  }
  std::vector<fft::cplx> analytic = fft::inverse(spec);
  std::vector<double> mag(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) mag[i] = std::abs(analytic[i]) * inv_n;
  return mag;
}

double interpolate_bins(std::span<const double> bins, double f_hz, double fs_hz, std::size_t n_fft) {
  if (bins.empty()) throw std::invalid_argument("interpolate_bins: empty spectrum");
  const double pos = f_hz * static_cast<double>(n_fft) / fs_hz;
  if (pos <= 0.0) return bins.front();
  const std::size_t k = static_cast<std::size_t>(std::floor(pos));
  if (k + 1 >= bins.size()) return bins.back();
  const double t = pos - static_cast<double>(k);
  return bins[k] + t * (bins[k + 1] - bins[k]);
}

WindowedSpectrum windowed_spectrum(std::span<const double> x, double fs_hz, std::size_t n_fft) {
  const std::vector<double> w = hann(x.size());
  std::vector<double> xw(x.size());
  double sum_w = 0.0;
  double sum_w2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xw[i] = x[i] * w[i];
    sum_w += w[i];
    sum_w2 += w[i] * w[i];
  }
  const std::vector<fft::cplx> spec = fft::rfft(xw, n_fft);

  WindowedSpectrum out;
  out.n_fft = n_fft;
  out.magnitude.resize(spec.size());
  out.power.resize(spec.size());
  const double mag_scale = sum_w > 0.0 ? 1.0 / sum_w : 0.0;
  const double pow_scale = sum_w2 > 0.0 ? 1.0 / (fs_hz * sum_w2) : 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double a = std::abs(spec[k]);
    out.magnitude[k] = a * mag_scale;
    const bool edge = (k == 0) || (n_fft % 2 == 0 && k == n_fft / 2);
    out.power[k] = (edge ? 1.0 : 2.0) * a * a * pow_scale;
  }
  return out;
}

}  // namespace pcg::signal
