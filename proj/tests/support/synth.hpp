#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "pcg/types.hpp"

namespace pcg::testing {

// Deterministic PCG-like signal with known state labels. Heart sounds are
// tapered tone bursts filling their labelled span; systole and diastole are
// silent unless a murmur is requested.
struct SynthConfig {
  double rate_hz{1000.0};
  double duration_s{10.0};
  double lead_in_s{0.3};  // diastole before the first S1
  double rr_s{0.8};
  double s1_s{0.10};
  double sys_s{0.25};
  double s2_s{0.08};
  double s1_hz{50.0};
  double s2_hz{70.0};
  double s1_amp{1.0};
  double s2_amp{0.7};
  // RR_i = rr_s + rr_mod_depth_s * sin(2 pi rr_mod_hz t_i); diastole absorbs it.
  double rr_mod_depth_s{0.0};
  double rr_mod_hz{0.0};
  // Band-limited 100-250 Hz noise inside systole, relative to s1_amp.
  double murmur_amp{0.0};
  // White noise at this SNR (dB) relative to the mean clean-signal power;
  // disabled when noise_snr_db is infinite.
  double noise_snr_db{std::numeric_limits<double>::infinity()};
  std::uint64_t seed{1};
};

struct SynthPcg {
  PcgRecording rec;
  StateSequence truth;
  BeatTable beats;  // closed beats only
};

SynthPcg make_pcg(const SynthConfig& cfg);

// Standard normal draws from a seeded engine, portable across libraries.
std::vector<double> gaussian_noise(std::size_t n, std::uint64_t seed);

}  // namespace pcg::testing
