#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace dollhouse {

/// Stages of one pick-and-place mission, in execution order.
enum class MissionPhase {
  idle,
  localizing,
  planning,
  navigating_to_object,
  grasping,
  navigating_to_destination,
  placing,
  returning,
};

inline constexpr std::array<MissionPhase, 8> kPhaseOrder{
    MissionPhase::idle,     MissionPhase::localizing,
    MissionPhase::planning, MissionPhase::navigating_to_object,
    MissionPhase::grasping, MissionPhase::navigating_to_destination,
    MissionPhase::placing,  MissionPhase::returning,
};

std::string_view to_string(MissionPhase phase);
std::optional<MissionPhase> parse_phase(std::string_view name);

/// Allowed moves: one step forward in kPhaseOrder, returning -> idle, or
/// anything -> idle (abort).
bool transition_allowed(MissionPhase from, MissionPhase to);

}  // namespace dollhouse
