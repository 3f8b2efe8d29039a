#include "dollhouse/robotsim/failures.hpp"

#include <cmath>

#include "dollhouse/error.hpp"

namespace dollhouse {

std::string_view to_tag(FailureMode mode) {
  switch (mode) {
    case FailureMode::collision_on_navigation: return "collision_on_navigation";
    case FailureMode::object_not_found: return "object_not_found";
    case FailureMode::empty_grasp: return "empty_grasp";
    case FailureMode::collision_during_grasp: return "collision_during_grasp";
    case FailureMode::collision_on_destination: return "collision_on_destination";
  }
  return "unknown";
}

std::optional<FailureMode> parse_failure_mode(std::string_view tag) {
  for (auto m : kFailureModes) {
    if (to_tag(m) == tag) return m;
  }
  return std::nullopt;
}

MissionPhase phase_of(FailureMode mode) {
  switch (mode) {
    case FailureMode::collision_on_navigation: return MissionPhase::navigating_to_object;
    case FailureMode::collision_on_destination: return MissionPhase::navigating_to_destination;
    default: return MissionPhase::grasping;
  }
}

const FailureRates& FailureConfig::for_label(const std::string& label) const {
  const auto it = per_label.find(label);
  return it == per_label.end() ? defaults : it->second;
}

void FailureConfig::validate() const {
  auto check = [](const FailureRates& r, const std::string& where) {
    for (auto m : kFailureModes) {
      if (!(r[m] >= 0.0 && r[m] <= 1.0)) {
        throw Error(ErrorKind::invalid_spec, where + ": " + std::string(to_tag(m)) + " probability outside [0, 1]");
      }
    }
  };
  check(defaults, "defaults");
  for (const auto& [label, rates] : per_label) check(rates, label);
}

std::optional<FailureMode> roll_failures(const FailureConfig& config, const std::string& label, MissionPhase phase,
                                         std::mt19937_64& rng) {
  const FailureRates& rates = config.for_label(label);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto m : kFailureModes) {
    if (phase_of(m) != phase) continue;
    // Always draw so the stream position does not depend on the rates.
    if (u(rng) < rates[m]) return m;
  }
  return std::nullopt;
}

FailureRates calibrate_rates(double success_rate, const std::array<double, 5>& shares) {
  if (!(success_rate >= 0.0 && success_rate <= 1.0)) throw Error(ErrorKind::invalid_spec, "success rate outside [0, 1]");
  double total = 0.0;
  for (double s : shares) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw Error(ErrorKind::invalid_spec, "failure shares must be >= 0");
    total += s;
  }
  if (total <= 0.0) throw Error(ErrorKind::invalid_spec, "failure shares are all zero");
  const double f = 1.0 - success_rate;
  FailureRates rates;
  double consumed = 0.0;
  for (std::size_t i = 0; i < shares.size(); ++i) {
    const double s = shares[i] / total;
    const double remaining = 1.0 - f * consumed;
    rates.p[i] = remaining > 0.0 ? std::min(1.0, f * s / remaining) : 0.0;
    consumed += s;
  }
  return rates;
}

}  // namespace dollhouse
