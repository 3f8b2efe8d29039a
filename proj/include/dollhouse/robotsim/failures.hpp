#pragma once

#include <array>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>

#include "dollhouse/robotsim/phase.hpp"

namespace dollhouse {

/// Injected failure modes, listed in the order a mission can hit them.
enum class FailureMode {
  collision_on_navigation,
  object_not_found,
  empty_grasp,
  collision_during_grasp,
  collision_on_destination,
};

inline constexpr std::array<FailureMode, 5> kFailureModes{
    FailureMode::collision_on_navigation, FailureMode::object_not_found, FailureMode::empty_grasp,
    FailureMode::collision_during_grasp, FailureMode::collision_on_destination,
};

std::string_view to_tag(FailureMode mode);
std::optional<FailureMode> parse_failure_mode(std::string_view tag);

/// Phase in which a mode is rolled.
MissionPhase phase_of(FailureMode mode);

/// Per-mode probability, conditional on the mission reaching the mode's draw.
struct FailureRates {
  std::array<double, 5> p{};  // indexed like kFailureModes

  double& operator[](FailureMode m) { return p[static_cast<std::size_t>(m)]; }
  double operator[](FailureMode m) const { return p[static_cast<std::size_t>(m)]; }
};

struct FailureConfig {
  FailureRates defaults;
  std::map<std::string, FailureRates> per_label;

  const FailureRates& for_label(const std::string& label) const;
  /// Throws invalid_spec when a probability is outside [0, 1].
  void validate() const;
};

/// Draws each mode of `phase` in kFailureModes order; the first hit is returned.
std::optional<FailureMode> roll_failures(const FailureConfig& config, const std::string& label, MissionPhase phase,
                                         std::mt19937_64& rng);

/// Sequential rates giving overall failure probability 1 - success_rate split
/// across modes by `shares` (normalized). Mode i gets
/// p_i = F s_i / (1 - F * sum_{j<i} s_j), so that P(mission ends in mode i) = F s_i.
/// Throws invalid_spec on rates outside [0, 1] or shares that are all zero or negative.
FailureRates calibrate_rates(double success_rate, const std::array<double, 5>& shares);

}  // namespace dollhouse
