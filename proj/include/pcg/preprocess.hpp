#pragma once

#include "pcg/types.hpp"

namespace pcg {

struct PreprocessConfig {
  double working_rate_hz{1000.0};
  double band_low_hz{20.0};
  double band_high_hz{120.0};
  int filter_order{2};
  // Odd-reflection padding added at each end before forward/backward
  // filtering, removed afterwards.
  double edge_pad_s{1.0};

  // Throws Errc::BandOutOfRange unless 0 < low < high < working_rate / 2.
  void validate() const;
};

// Polyphase rational resampling with a Kaiser-windowed sinc anti-aliasing
// filter cut at 0.9 of the lower Nyquist. Output length is
// ceil(n * target / source); equal rates return the input unchanged.
PcgRecording resample(const PcgRecording& rec, double target_rate_hz);

// Band-pass applied forward and then backward (zero phase, squared
// magnitude response). rec must already be at cfg.working_rate_hz.
PcgRecording bandpass_zero_phase(const PcgRecording& rec, const PreprocessConfig& cfg);

// resample to the working rate, then bandpass_zero_phase.
PcgRecording preprocess(const PcgRecording& rec, const PreprocessConfig& cfg);

}  // namespace pcg
