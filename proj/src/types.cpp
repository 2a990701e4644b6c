#include "pcg/types.hpp"

namespace pcg {

std::string_view state_name(HeartState s) {
  switch (s) {
    case HeartState::S1: return "S1";
    case HeartState::Sys: return "Sys";
    case HeartState::S2: return "S2";
    case HeartState::Dia: return "Dia";
  }
  return "?";
}

std::optional<HeartState> parse_state(std::string_view name) {
  if (name == "S1") return HeartState::S1;
  if (name == "Sys") return HeartState::Sys;
  if (name == "S2") return HeartState::S2;
  if (name == "Dia") return HeartState::Dia;
  return std::nullopt;
}

}  // namespace pcg
