#include "pcg/iir.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace pcg::iir {

namespace {

using cplx = std::complex<double>;

std::vector<cplx> analog_prototype(int order) {
  std::vector<cplx> poles;
  poles.reserve(static_cast<std::size_t>(order));
  for (int k = 0; k < order; ++k) {
    const double theta = std::numbers::pi * (2.0 * k + order + 1) / (2.0 * order);
    poles.emplace_back(std::cos(theta), std::sin(theta));
  }
  return poles;
}

double prewarp(double f_hz, double fs_hz) {
  return 2.0 * fs_hz * std::tan(std::numbers::pi * f_hz / fs_hz);
}

cplx bilinear(cplx s, double fs_hz) {
  const double k = 2.0 * fs_hz;
  return (k + s) / (k - s);
}

// Pairs digital poles into second-order denominators. Complex poles go with
// their conjugate; leftover real poles are paired with each other, and a
// final unpaired real pole yields a first-order section.
std::vector<std::vector<cplx>> pair_poles(std::vector<cplx> poles) {
  constexpr double tol = 1e-10;
  std::vector<cplx> complex_upper;
  std::vector<double> reals;
  for (const cplx& p : poles) {
    if (std::abs(p.imag()) <= tol) {
      reals.push_back(p.real());
    } else if (p.imag() > 0.0) {
      complex_upper.push_back(p);
    }
  }
  std::sort(complex_upper.begin(), complex_upper.end(),
            [](const cplx& a, const cplx& b) { return std::abs(a) < std::abs(b); });
  std::sort(reals.begin(), reals.end());
  std::vector<std::vector<cplx>> groups;
  for (const cplx& p : complex_upper) groups.push_back({p, std::conj(p)});
  for (std::size_t i = 0; i < reals.size(); i += 2) {
    if (i + 1 < reals.size()) {
      groups.push_back({cplx(reals[i]), cplx(reals[i + 1])});
    } else {
      groups.push_back({cplx(reals[i])});
    }
  }
  return groups;
}

void set_denominator(Biquad& q, const std::vector<cplx>& group) {
  if (group.size() == 2) {
    q.a1 = -(group[0] + group[1]).real();
    q.a2 = (group[0] * group[1]).real();
  } else {
    q.a1 = -group[0].real();
    q.a2 = 0.0;
  }
}

cplx section_response(const Biquad& q, cplx z_inv) {
  const cplx num = q.b0 + q.b1 * z_inv + q.b2 * z_inv * z_inv;
  const cplx den = 1.0 + q.a1 * z_inv + q.a2 * z_inv * z_inv;
  return num / den;
}

void normalize_gain(Sos& sos, double f_ref_hz, double fs_hz) {
  const double g = magnitude_at(sos, f_ref_hz, fs_hz);
  if (!(g > 0.0) || !std::isfinite(g)) throw std::runtime_error("butterworth: degenerate gain");
  sos.front().b0 /= g;
  sos.front().b1 /= g;
  sos.front().b2 /= g;
}

}  // namespace

Sos butter_lowpass(int order, double cutoff_hz, double fs_hz) {
  if (order < 1) throw std::invalid_argument("butter_lowpass: order must be >= 1");
  if (!(cutoff_hz > 0.0 && cutoff_hz < fs_hz / 2.0)) {
    throw std::invalid_argument("butter_lowpass: cutoff outside (0, fs/2)");
  }
  const double wc = prewarp(cutoff_hz, fs_hz);
  std::vector<cplx> digital;
  for (const cplx& p : analog_prototype(order)) digital.push_back(bilinear(wc * p, fs_hz));

  Sos sos;
  for (const auto& group : pair_poles(digital)) {
    Biquad q;
    set_denominator(q, group);
    if (group.size() == 2) {
      q.b0 = 1.0;  // zeros at z = -1 (double)
      q.b1 = 2.0;
      q.b2 = 1.0;
    } else {
      q.b0 = 1.0;
      q.b1 = 1.0;
      q.b2 = 0.0;
    }
    sos.push_back(q);
  }
  normalize_gain(sos, 0.0, fs_hz);
  return sos;
}

Sos butter_bandpass(int order, double low_hz, double high_hz, double fs_hz) {
  if (order < 1) throw std::invalid_argument("butter_bandpass: order must be >= 1");
  if (!(low_hz > 0.0 && low_hz < high_hz && high_hz < fs_hz / 2.0)) {
    throw std::invalid_argument("butter_bandpass: need 0 < low < high < fs/2");
  }
  const double w1 = prewarp(low_hz, fs_hz);
  const double w2 = prewarp(high_hz, fs_hz);
  const double w0 = std::sqrt(w1 * w2);
  const double bw = w2 - w1;

  std::vector<cplx> digital;
  for (const cplx& p : analog_prototype(order)) {
    const cplx half = p * bw / 2.0;
    const cplx root = std::sqrt(half * half - w0 * w0);
    digital.push_back(bilinear(half + root, fs_hz));
    digital.push_back(bilinear(half - root, fs_hz));
  }

  Sos sos;
  for (const auto& group : pair_poles(digital)) {
    Biquad q;
    set_denominator(q, group);
    q.b0 = 1.0;  // one zero at z = 1 and one at z = -1 per section
    q.b1 = 0.0;
    q.b2 = -1.0;
    sos.push_back(q);
  }
  // Centre frequency of the digital band (image of the analog w0).
  const double f0 = fs_hz / std::numbers::pi * std::atan(w0 / (2.0 * fs_hz));
  normalize_gain(sos, f0, fs_hz);
  return sos;
}

double magnitude_at(const Sos& sos, double f_hz, double fs_hz) {
  const double w = 2.0 * std::numbers::pi * f_hz / fs_hz;
  const cplx z_inv = std::polar(1.0, -w);
  cplx h = 1.0;
  for (const Biquad& q : sos) h *= section_response(q, z_inv);
  return std::abs(h);
}

std::vector<double> sosfilt(const Sos& sos, std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  for (const Biquad& q : sos) {
    double z1 = 0.0;
    double z2 = 0.0;
    for (double& v : y) {
      const double in = v;
      const double out = q.b0 * in + z1;
      z1 = q.b1 * in - q.a1 * out + z2;
      z2 = q.b2 * in - q.a2 * out;
      v = out;
    }
  }
  return y;
}

std::vector<double> filtfilt(const Sos& sos, std::span<const double> x, std::size_t pad) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  pad = std::min(pad, n - 1);

  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  std::vector<double> y = sosfilt(sos, ext);
  std::reverse(y.begin(), y.end());
  y = sosfilt(sos, y);
  std::reverse(y.begin(), y.end());
  return {y.begin() + static_cast<std::ptrdiff_t>(pad),
          y.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

}  // namespace pcg::iir
