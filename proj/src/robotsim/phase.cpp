#include "dollhouse/robotsim/phase.hpp"

#include <algorithm>

namespace dollhouse {

std::string_view to_string(MissionPhase phase) {
  switch (phase) {
    case MissionPhase::idle: return "idle";
    case MissionPhase::localizing: return "localizing";
    case MissionPhase::planning: return "planning";
    case MissionPhase::navigating_to_object: return "navigating_to_object";
    case MissionPhase::grasping: return "grasping";
    case MissionPhase::navigating_to_destination: return "navigating_to_destination";
    case MissionPhase::placing: return "placing";
    case MissionPhase::returning: return "returning";
  }
  return "unknown";
}

std::optional<MissionPhase> parse_phase(std::string_view name) {
  for (auto p : kPhaseOrder) {
    if (to_string(p) == name) return p;
  }
  return std::nullopt;
}

bool transition_allowed(MissionPhase from, MissionPhase to) {
  if (to == MissionPhase::idle) return true;
  const auto it = std::find(kPhaseOrder.begin(), kPhaseOrder.end(), from);
  return it + 1 != kPhaseOrder.end() && *(it + 1) == to;
}

}  // namespace dollhouse
