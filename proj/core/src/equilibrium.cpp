#include "platoon/equilibrium.hpp"

#include <string>

#include "platoon/error.hpp"

namespace platoon {

std::string to_string(AgentId agent) {
  return std::string(agent.kind == AgentId::Kind::Car ? "car " : "truck ") + std::to_string(agent.index + 1);
}

Interval current_action(const ActionProfile& profile, AgentId agent) {
  return agent.kind == AgentId::Kind::Car ? profile.cars.at(agent.index) : profile.trucks.at(agent.index);
}

double utility_if_moved(const FrozenRoad& road, const ActionProfile& profile, const Population& pop, AgentId agent,
                        Interval candidate) {
  if (agent.kind == AgentId::Kind::Car) {
    return road.car_utility(pop.cars.at(agent.index), profile.cars.at(agent.index), candidate);
  }
  return road.truck_utility(pop.trucks.at(agent.index), profile.trucks.at(agent.index), candidate);
}

Interval best_response(const FrozenRoad& road, const ActionProfile& profile, const Population& pop, AgentId agent) {
  Interval best(1);
  double best_utility = utility_if_moved(road, profile, pop, agent, best);
  for (int r = 2; r <= road.intervals(); ++r) {
    const double u = utility_if_moved(road, profile, pop, agent, Interval(r));
    if (u > best_utility) {
      best_utility = u;
      best = Interval(r);
    }
  }
  return best;
}

Interval best_response(AgentId agent, const ActionProfile& profile, const GameConfig& cfg, const Population& pop,
                       const RoadConditions& conditions) {
  const FrozenRoad road(cfg, occupancy(profile, cfg.intervals), conditions);
  return best_response(road, profile, pop, agent);
}

namespace {

std::optional<Deviation> first_improvement(const FrozenRoad& road, const ActionProfile& profile,
                                           const Population& pop, AgentId agent) {
  const Interval current = current_action(profile, agent);
  const double incumbent = utility_if_moved(road, profile, pop, agent, current);
  for (int r = 1; r <= road.intervals(); ++r) {
    const Interval candidate(r);
    if (candidate == current) continue;
    const double u = utility_if_moved(road, profile, pop, agent, candidate);
    if (u > incumbent) return Deviation{agent, candidate, u - incumbent};
  }
  return std::nullopt;
}

}  // namespace

NashCertificate is_nash(const FrozenRoad& road, const ActionProfile& profile, const Population& pop) {
  if (profile.cars.size() != pop.cars.size() || profile.trucks.size() != pop.trucks.size()) {
    throw InvalidProfile("profile does not match the population");
  }
  for (std::size_t i = 0; i < profile.cars.size(); ++i) {
    if (auto d = first_improvement(road, profile, pop, AgentId::car(i))) return {false, d};
  }
  for (std::size_t j = 0; j < profile.trucks.size(); ++j) {
    if (auto d = first_improvement(road, profile, pop, AgentId::truck(j))) return {false, d};
  }
  return {true, std::nullopt};
}

NashCertificate is_nash(const ActionProfile& profile, const GameConfig& cfg, const Population& pop,
                        const RoadConditions& conditions) {
  const FrozenRoad road(cfg, occupancy(profile, cfg.intervals), conditions);
  return is_nash(road, profile, pop);
}

}  // namespace platoon
