#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pcg::iir {

// y[n] = b0 x[n] + b1 x[n-1] + b2 x[n-2] - a1 y[n-1] - a2 y[n-2]
struct Biquad {
  double b0{1.0}, b1{0.0}, b2{0.0};
  double a1{0.0}, a2{0.0};
};

using Sos = std::vector<Biquad>;

// Digital Butterworth designs via the bilinear transform with prewarping.
// A band-pass of order N has 2N poles (N biquads), matching the usual
// butter(N, [lo, hi], 'bandpass') convention.
Sos butter_lowpass(int order, double cutoff_hz, double fs_hz);
Sos butter_bandpass(int order, double low_hz, double high_hz, double fs_hz);

// Magnitude response at a single frequency.
double magnitude_at(const Sos& sos, double f_hz, double fs_hz);

// Causal cascade, zero initial state.
std::vector<double> sosfilt(const Sos& sos, std::span<const double> x);

// Forward pass then time-reversed pass of the same cascade. The signal is
// extended by odd reflection of pad samples at both ends (clamped to
// x.size() - 1) and the extension is dropped afterwards.
std::vector<double> filtfilt(const Sos& sos, std::span<const double> x, std::size_t pad);

}  // namespace pcg::iir
