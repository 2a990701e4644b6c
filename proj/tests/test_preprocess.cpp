#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "pcg/error.hpp"
#include "pcg/preprocess.hpp"

namespace pcg {
namespace {

PcgRecording sine(double f, double rate, std::size_t n, double amp = 1.0) {
  PcgRecording r;
  r.record_id = "sine";
  r.sample_rate_hz = rate;
  r.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) r.samples[i] = amp * std::sin(2.0 * M_PI * f * static_cast<double>(i) / rate);
  return r;
}

// Naive DFT magnitude argmax over bins 1..n/2, independent of FFTW.
std::size_t dft_peak(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::size_t best = 1;
  double best_mag = -1.0;
  for (std::size_t k = 1; k <= n / 2; ++k) {
    std::complex<double> acc;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * std::polar(1.0, -2.0 * M_PI * double(k * i % n) / double(n));
    if (std::abs(acc) > best_mag) {
      best_mag = std::abs(acc);
      best = k;
    }
  }
  return best;
}

double rms(const std::vector<double>& x, std::size_t a, std::size_t b) {
  double s = 0.0;
  for (std::size_t i = a; i < b; ++i) s += x[i] * x[i];
  return std::sqrt(s / static_cast<double>(b - a));
}

TEST(Resample, HalvesLength) {
  PcgRecording r = sine(50.0, 2000.0, 4000);
  const PcgRecording out = resample(r, 1000.0);
  EXPECT_EQ(out.sample_rate_hz, 1000.0);
  EXPECT_EQ(out.samples.size(), 2000u);
  EXPECT_EQ(out.record_id, "sine");
}

TEST(Resample, DurationWithinOneSample) {
  for (double src : {2000.0, 4000.0, 8000.0, 2205.0, 44100.0, 500.0}) {
    const PcgRecording r = sine(30.0, src, static_cast<std::size_t>(src * 1.37));
    const PcgRecording out = resample(r, 1000.0);
    EXPECT_NEAR(out.duration_s(), r.duration_s(), 1.0 / 1000.0) << src;
  }
}

TEST(Resample, SameRateIsIdentity) {
  const PcgRecording r = sine(37.0, 1000.0, 1234);
  EXPECT_EQ(resample(r, 1000.0).samples, r.samples);
}

TEST(Resample, SineKeepsDominantBin) {
  const PcgRecording r = sine(50.0, 2000.0, 2000);
  const PcgRecording out = resample(r, 1000.0);
  ASSERT_EQ(out.samples.size(), 1000u);
  // 1 s of signal puts 50 Hz at bin 50 for both rates.
  EXPECT_EQ(dft_peak(out.samples), 50u);
  EXPECT_EQ(dft_peak(r.samples), 50u);
  EXPECT_NEAR(rms(out.samples, 100, 900), std::sqrt(0.5), 0.02);
}

TEST(Resample, RejectsBadRate) {
  EXPECT_THROW(resample(sine(50.0, 2000.0, 100), 0.0), Error);
  EXPECT_THROW(resample(sine(50.0, 2000.0, 100), -5.0), Error);
}

TEST(Bandpass, KeepsInBandTone) {
  const PcgRecording r = sine(60.0, 1000.0, 4000);
  const PcgRecording out = bandpass_zero_phase(r, PreprocessConfig{});
  ASSERT_EQ(out.samples.size(), r.samples.size());
  const double ratio = rms(out.samples, 500, 3500) / rms(r.samples, 500, 3500);
  EXPECT_NEAR(ratio, 1.0, 0.05);
}

TEST(Bandpass, AttenuatesOutOfBandTone) {
  // 500 Hz is the Nyquist frequency at 1 kHz, so check 300 and 450 Hz there
  // and 500 Hz itself at a 2 kHz working rate.
  for (double f : {300.0, 450.0}) {
    const PcgRecording s = sine(f, 1000.0, 4000);
    const PcgRecording out = bandpass_zero_phase(s, PreprocessConfig{});
    const double db = 20.0 * std::log10(rms(out.samples, 500, 3500) / rms(s.samples, 500, 3500));
    EXPECT_LE(db, -20.0) << f;
  }
  const PcgRecording high = sine(500.0, 2000.0, 8000);
  PreprocessConfig cfg;
  cfg.working_rate_hz = 2000.0;
  const PcgRecording out = bandpass_zero_phase(high, cfg);
  EXPECT_LE(20.0 * std::log10(rms(out.samples, 1000, 7000) / rms(high.samples, 1000, 7000)), -20.0);
}

TEST(Bandpass, ImpulseResponseIsSymmetric) {
  PcgRecording r;
  r.sample_rate_hz = 1000.0;
  r.samples.assign(4001, 0.0);
  r.samples[2000] = 1.0;
  const PcgRecording out = bandpass_zero_phase(r, PreprocessConfig{});
  const double peak = *std::max_element(out.samples.begin(), out.samples.end());
  for (std::size_t k = 1; k < 1000; ++k) EXPECT_NEAR(out.samples[2000 - k], out.samples[2000 + k], 1e-9 * peak) << k;
  EXPECT_EQ(std::max_element(out.samples.begin(), out.samples.end()) - out.samples.begin(), 2000);
}

TEST(Bandpass, ZeroLagAgainstInput) {
  const PcgRecording r = sine(45.0, 1000.0, 3000);
  const PcgRecording out = bandpass_zero_phase(r, PreprocessConfig{});
  int best_lag = 0;
  double best = -1e300;
  for (int lag = -20; lag <= 20; ++lag) {
    double c = 0.0;
    for (int i = 500; i < 2500; ++i) c += r.samples[static_cast<std::size_t>(i)] * out.samples[static_cast<std::size_t>(i + lag)];
    if (c > best) {
      best = c;
      best_lag = lag;
    }
  }
  EXPECT_EQ(best_lag, 0);
}

TEST(Bandpass, Linear) {
  const PcgRecording x = sine(40.0, 1000.0, 2500, 0.7);
  PcgRecording y = sine(95.0, 1000.0, 2500, 0.3);
  for (std::size_t i = 0; i < y.samples.size(); ++i) y.samples[i] += 0.1 * std::cos(0.013 * double(i * i % 977));
  const double a = 1.7, b = -0.45;
  PcgRecording mix = x;
  for (std::size_t i = 0; i < mix.samples.size(); ++i) mix.samples[i] = a * x.samples[i] + b * y.samples[i];

  const PreprocessConfig cfg;
  const auto fx = bandpass_zero_phase(x, cfg).samples;
  const auto fy = bandpass_zero_phase(y, cfg).samples;
  const auto fm = bandpass_zero_phase(mix, cfg).samples;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < fm.size(); ++i) {
    const double expect = a * fx[i] + b * fy[i];
    num += (fm[i] - expect) * (fm[i] - expect);
    den += expect * expect;
  }
  EXPECT_LE(std::sqrt(num / den), 1e-9);
}

TEST(Bandpass, LengthPreservedForShortInput) {
  const PcgRecording r = sine(60.0, 1000.0, 50);
  EXPECT_EQ(bandpass_zero_phase(r, PreprocessConfig{}).samples.size(), 50u);
}

TEST(Bandpass, BandOutOfRange) {
  const PcgRecording r = sine(60.0, 1000.0, 1000);
  const auto expect_band_error = [&](PreprocessConfig cfg) {
    try {
      bandpass_zero_phase(r, cfg);
      ADD_FAILURE() << "accepted " << cfg.band_low_hz << ".." << cfg.band_high_hz;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::BandOutOfRange);
    }
  };
  PreprocessConfig cfg;
  cfg.band_low_hz = 130.0;
  expect_band_error(cfg);
  cfg = PreprocessConfig{};
  cfg.band_high_hz = 600.0;
  expect_band_error(cfg);
  cfg = PreprocessConfig{};
  cfg.band_low_hz = 0.0;
  expect_band_error(cfg);
  cfg = PreprocessConfig{};
  cfg.band_high_hz = 500.0;
  expect_band_error(cfg);
}

TEST(Preprocess, ResamplesThenFilters) {
  const PcgRecording r = sine(60.0, 4000.0, 12000);
  const PcgRecording out = preprocess(r, PreprocessConfig{});
  EXPECT_EQ(out.sample_rate_hz, 1000.0);
  EXPECT_EQ(out.samples.size(), 3000u);
  EXPECT_NEAR(rms(out.samples, 500, 2500), std::sqrt(0.5), 0.05 * std::sqrt(0.5));
}

}  // namespace
}  // namespace pcg
