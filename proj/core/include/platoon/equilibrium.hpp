#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "platoon/game.hpp"

namespace platoon {

struct AgentId {
  enum class Kind { Car, Truck };

  Kind kind = Kind::Car;
  std::size_t index = 0;

  static constexpr AgentId car(std::size_t i) { return {Kind::Car, i}; }
  static constexpr AgentId truck(std::size_t j) { return {Kind::Truck, j}; }

  friend constexpr bool operator==(AgentId, AgentId) = default;
};

std::string to_string(AgentId agent);

Interval current_action(const ActionProfile& profile, AgentId agent);

/// Utility of `agent` if it moved to `candidate` with everyone else fixed.
double utility_if_moved(const FrozenRoad& road, const ActionProfile& profile, const Population& pop, AgentId agent,
                        Interval candidate);

/// Argmax over 1..R of the agent's counterfactual utility; ties go to the smallest interval.
Interval best_response(const FrozenRoad& road, const ActionProfile& profile, const Population& pop, AgentId agent);
Interval best_response(AgentId agent, const ActionProfile& profile, const GameConfig& cfg, const Population& pop,
                       const RoadConditions& conditions = {});

struct Deviation {
  AgentId agent;
  Interval to;
  double gain = 0.0;  // strictly positive
};

struct NashCertificate {
  bool is_nash = false;
  /// First strictly improving unilateral deviation, scanning cars then trucks, each
  /// over intervals 1..R.
  std::optional<Deviation> witness;

  explicit operator bool() const { return is_nash; }
};

NashCertificate is_nash(const FrozenRoad& road, const ActionProfile& profile, const Population& pop);
NashCertificate is_nash(const ActionProfile& profile, const GameConfig& cfg, const Population& pop,
                        const RoadConditions& conditions = {});

}  // namespace platoon
