#pragma once

#include <complex>
#include <span>
#include <vector>

namespace pcg::signal {

// Symmetric Hann window of length n (n == 1 gives {1}).
std::vector<double> hann(std::size_t n);

// |analytic signal| computed with a full-length DFT.
std::vector<double> hilbert_magnitude(std::span<const double> x);

// One-sided spectrum sampled at arbitrary frequencies by linear
// interpolation between neighbouring DFT bins of an n_fft-point transform.
double interpolate_bins(std::span<const double> bins, double f_hz, double fs_hz, std::size_t n_fft);

// Hann-windowed, zero-padded magnitude and power spectra. Magnitude is
// |X(f)| / sum(w); power is the one-sided periodogram
// c |X(f)|^2 / (fs * sum(w^2)) with c = 2 away from DC and Nyquist.
struct WindowedSpectrum {
  std::vector<double> magnitude;
  std::vector<double> power;
  std::size_t n_fft{0};
};

WindowedSpectrum windowed_spectrum(std::span<const double> x, double fs_hz, std::size_t n_fft);

}  // namespace pcg::signal
