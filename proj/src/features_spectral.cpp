#include "pcg/features_spectral.hpp"

#include <array>

#include "pcg/error.hpp"
#include "pcg/fft.hpp"
#include "pcg/signal.hpp"

namespace pcg {

namespace {

std::vector<double> grid_up_to(int top_hz) {
  std::vector<double> g;
  for (int f = 10; f <= top_hz; f += 10) g.push_back(f);
  return g;
}

enum class Estimator { Magnitude, Power };

std::vector<double> spectrum_at(std::span<const double> seg, double rate_hz, std::span<const double> grid_hz,
                                Estimator est) {
  if (seg.size() < kMinSegmentSamples) {
    throw Error(Errc::SegmentTooShort, "segment of " + std::to_string(seg.size()) + " samples");
  }
  for (double f : grid_hz) {
    if (!(f >= 0.0 && f < rate_hz / 2.0)) throw Error(Errc::InvalidArgument, "grid frequency above Nyquist");
  }
  const std::size_t n_fft = fft::next_pow2(4 * seg.size());
  const signal::WindowedSpectrum s = signal::windowed_spectrum(seg, rate_hz, n_fft);
  const std::vector<double>& bins = est == Estimator::Magnitude ? s.magnitude : s.power;
  std::vector<double> out;
  out.reserve(grid_hz.size());
  for (double f : grid_hz) out.push_back(signal::interpolate_bins(bins, f, rate_hz, n_fft));
  return out;
}

FeatureBlock beat_averaged(const BeatTable& beats, const PcgRecording& rec, Estimator est) {
  if (beats.empty()) throw Error(Errc::NoCompleteBeat, "no complete beat for spectral features");
  struct StateSlice {
    std::size_t Beat::*begin;
    std::size_t Beat::*end;
    const std::vector<double>* grid;
  };
  const std::array<StateSlice, 4> states{{
      {&Beat::s1_start, &Beat::s1_end, &heart_sound_grid()},
      {&Beat::sys_end, &Beat::s2_end, &heart_sound_grid()},
      {&Beat::s1_end, &Beat::sys_end, &interval_grid()},
      {&Beat::s2_end, &Beat::dia_end, &interval_grid()},
  }};

  FeatureBlock block;
  const std::span<const double> x(rec.samples);
  for (const StateSlice& st : states) {
    std::vector<double> sum(st.grid->size(), 0.0);
    std::size_t used = 0;
    for (const Beat& b : beats) {
      const std::size_t begin = b.*st.begin;
      const std::size_t end = b.*st.end;
      if (end > x.size() || end < begin) throw Error(Errc::InvalidArgument, "beat outside recording");
      if (end - begin < kMinSegmentSamples) continue;
      const std::vector<double> s = spectrum_at(x.subspan(begin, end - begin), rec.sample_rate_hz, *st.grid, est);
      for (std::size_t i = 0; i < s.size(); ++i) sum[i] += s[i];
      ++used;
    }
    FeatureBlock part(st.grid->size());
    for (std::size_t i = 0; i < sum.size(); ++i) {
      if (used == 0) {
        part.mark_missing(i);
      } else {
        part.set(i, sum[i] / static_cast<double>(used));
      }
    }
    block.append(part);
  }
  return block;
}

}  // namespace

const std::vector<double>& heart_sound_grid() {
  static const std::vector<double> g = grid_up_to(120);
  return g;
}

const std::vector<double>& interval_grid() {
  static const std::vector<double> g = grid_up_to(290);
  return g;
}

std::vector<double> segment_spectrum_at(std::span<const double> seg, double rate_hz, std::span<const double> grid_hz) {
  return spectrum_at(seg, rate_hz, grid_hz, Estimator::Magnitude);
}

std::vector<double> segment_psd_at(std::span<const double> seg, double rate_hz, std::span<const double> grid_hz) {
  return spectrum_at(seg, rate_hz, grid_hz, Estimator::Power);
}

FeatureBlock spectrum_features(const BeatTable& beats, const PcgRecording& rec) {
  return beat_averaged(beats, rec, Estimator::Magnitude);
}

FeatureBlock psd_features(const BeatTable& beats, const PcgRecording& rec) {
  return beat_averaged(beats, rec, Estimator::Power);
}

}  // namespace pcg
