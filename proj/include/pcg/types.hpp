#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pcg {

struct PcgRecording {
  std::string record_id;
  std::vector<double> samples;  // dimensionless, nominally in [-1, 1]
  double sample_rate_hz{0.0};

  double duration_s() const {
    return sample_rate_hz > 0.0 ? static_cast<double>(samples.size()) / sample_rate_hz : 0.0;
  }
};

enum class Label : int { Normal = -1, Abnormal = 1 };

struct ReferenceLabel {
  std::string record_id;
  Label label{Label::Normal};
};

// The four cardiac states, in grammar order.
enum class HeartState : std::uint8_t { S1 = 0, Sys = 1, S2 = 2, Dia = 3 };

inline constexpr int kNumStates = 4;

inline constexpr HeartState next_state(HeartState s) {
  return static_cast<HeartState>((static_cast<int>(s) + 1) % kNumStates);
}

std::string_view state_name(HeartState s);
std::optional<HeartState> parse_state(std::string_view name);

struct StateEvent {
  std::size_t sample_index{0};
  HeartState state{HeartState::S1};

  bool operator==(const StateEvent&) const = default;
};

// Onsets of state runs. Sample indices are at the working rate.
struct StateAnnotation {
  std::string record_id;
  std::vector<StateEvent> events;
};

struct StateSequence {
  std::string record_id;
  std::vector<HeartState> labels;  // one per sample
  double sample_rate_hz{0.0};
  // True when the first run is known to be cut off by the recording start.
  bool leading_run_partial{false};
};

// One complete cardiac cycle. Half-open sample ranges:
//   S1  [s1_start, s1_end)   Sys [s1_end, sys_end)
//   S2  [sys_end, s2_end)    Dia [s2_end, dia_end)
// dia_end is the onset of the following S1, so every beat closes an RR interval.
struct Beat {
  std::size_t s1_start{0};
  std::size_t s1_end{0};
  std::size_t sys_end{0};
  std::size_t s2_end{0};
  std::size_t dia_end{0};

  std::size_t length() const { return dia_end - s1_start; }
};

using BeatTable = std::vector<Beat>;

}  // namespace pcg
