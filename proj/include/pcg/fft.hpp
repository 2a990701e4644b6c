#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

// Thin FFTW front end. Planning is serialized internally so these may be
// called from worker threads.
namespace pcg::fft {

using cplx = std::complex<double>;

std::size_t next_pow2(std::size_t n);

// One-sided spectrum of x zero-padded to n_fft (n_fft >= x.size()).
// Returns n_fft/2 + 1 bins.
std::vector<cplx> rfft(std::span<const double> x, std::size_t n_fft);

// Unnormalized complex transforms; inverse(forward(x)) == n * x.
std::vector<cplx> forward(std::span<const cplx> x);
std::vector<cplx> inverse(std::span<const cplx> x);

}  // namespace pcg::fft
