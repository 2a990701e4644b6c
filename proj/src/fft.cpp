#include "pcg/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <stdexcept>

namespace pcg::fft {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::vector<cplx> complex_transform(std::span<const cplx> x, int sign) {
  const int n = static_cast<int>(x.size());
  std::vector<cplx> out(x.size());
  if (n == 0) return out;
  std::vector<cplx> in(x.begin(), x.end());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(in.data()),
                            reinterpret_cast<fftw_complex*>(out.data()), sign, FFTW_ESTIMATE);
  }
  if (plan == nullptr) throw std::runtime_error("fft: planning failed");
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

}  // namespace

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<cplx> rfft(std::span<const double> x, std::size_t n_fft) {
  if (n_fft < x.size() || n_fft == 0) throw std::invalid_argument("rfft: n_fft smaller than input");
  std::vector<double> in(n_fft, 0.0);
  std::copy(x.begin(), x.end(), in.begin());
  std::vector<cplx> out(n_fft / 2 + 1);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n_fft), in.data(),
                                reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
  }
  if (plan == nullptr) throw std::runtime_error("rfft: planning failed");
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

std::vector<cplx> forward(std::span<const cplx> x) { return complex_transform(x, FFTW_FORWARD); }

std::vector<cplx> inverse(std::span<const cplx> x) { return complex_transform(x, FFTW_BACKWARD); }

}  // namespace pcg::fft
