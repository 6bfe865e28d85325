#include "platoon/learning.hpp"

#include <algorithm>
#include <string>

#include "platoon/error.hpp"

namespace platoon {

double forgetting_weight(const ForgettingSchedule& schedule, long t) {
  if (const auto* c = std::get_if<ConstantForgetting>(&schedule)) return c->lambda;
  return 1.0 / static_cast<double>(t + 1);
}

std::string to_string(Algorithm algorithm) { return algorithm == Algorithm::Jsfp ? "jsfp" : "asfp"; }

void LearnerParams::validate(int intervals) const {
  if (!(inertia.p > 0.0 && inertia.p < 1.0)) throw ValidationError("inertia p must lie strictly inside (0, 1)");
  if (const auto* c = std::get_if<ConstantForgetting>(&forgetting); c && !(c->lambda > 0.0 && c->lambda < 1.0)) {
    throw ValidationError("forgetting factor lambda must lie strictly inside (0, 1)");
  }
  if (algorithm == Algorithm::Asfp && !std::holds_alternative<ConstantForgetting>(forgetting)) {
    throw ValidationError("average strategy fictitious play needs a constant forgetting factor");
  }
  if (max_iterations < 0) throw ValidationError("max_iterations must be nonnegative");
  if (stability_window < 1) throw ValidationError("stability_window must be at least 1");
  for (const auto& p : perturbations) {
    if (!(p.velocity_divisor > 0.0)) throw ValidationError("perturbation velocity divisor must be positive");
    if (p.iteration < 0) throw ValidationError("perturbation iteration must be nonnegative");
    for (Interval r : p.intervals) {
      if (r.value() < 1 || r.value() > intervals) throw ValidationError("perturbation interval out of range");
    }
  }
}

Interval argmax(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t s = 1; s < row.size(); ++s) {
    if (row[s] > row[best]) best = s;
  }
  return Interval::from_slot(best);
}

void TruckHistory::record(const std::vector<int>& trucks) {
  ++recorded_;
  if (delay_ <= 0) return;
  window_.push_back(trucks);
  if (window_.size() > static_cast<std::size_t>(delay_)) window_.pop_front();
}

std::vector<int> TruckHistory::announced_for(long t) const {
  if (delay_ <= 0 || t <= delay_) return {};
  // window_ holds iterations recorded_-|window|..recorded_-1; iteration t-delay is wanted.
  const long first = recorded_ - static_cast<long>(window_.size());
  const long wanted = t - delay_;
  if (wanted < first || wanted >= recorded_) {
    throw ValidationError("truck history does not cover iteration " + std::to_string(wanted));
  }
  return window_[static_cast<std::size_t>(wanted - first)];
}

RoadConditions conditions_at(long t, const GameConfig& cfg, std::span<const Perturbation> perturbations,
                             const TruckHistory& history) {
  RoadConditions conditions;
  for (const auto& p : perturbations) {
    if (p.iteration != t) continue;
    if (conditions.velocity_divisor.empty()) {
      conditions.velocity_divisor.assign(static_cast<std::size_t>(cfg.intervals), 1.0);
    }
    for (Interval r : p.intervals) conditions.velocity_divisor[r.slot()] *= p.velocity_divisor;
  }
  if (std::holds_alternative<CarTaxDelayed>(cfg.policy)) conditions.announced_trucks = history.announced_for(t);
  return conditions;
}

namespace {

// Convex update clamped to its endpoints, so rounding never leaves [min, max].
double blend(double old_value, double new_value, double lambda) {
  const double mixed = (1.0 - lambda) * old_value + lambda * new_value;
  return std::clamp(mixed, std::min(old_value, new_value), std::max(old_value, new_value));
}

void check_profile(const ActionProfile& profile, const Population& pop, int intervals) {
  if (profile.cars.size() != pop.cars.size() || profile.trucks.size() != pop.trucks.size()) {
    throw InvalidProfile("initial profile does not match the population");
  }
  occupancy(profile, intervals);
}

TruckHistory history_for(const GameConfig& cfg) {
  if (const auto* d = std::get_if<CarTaxDelayed>(&cfg.policy)) return TruckHistory(d->delay);
  return TruckHistory();
}

// Shared accept/switch rule: a candidate replaces the incumbent only if it is strictly better
// against the previous profile, and then only with probability p.
template <class Propose>
StepReport decide(const FrozenRoad& previous, const ActionProfile& profile, const Population& pop, double p,
                  const CounterRng& rng, long t, Propose&& propose, ActionProfile& next, Occupancy& next_occ) {
  StepReport report;
  const std::size_t n_cars = pop.cars.size();
  for (std::size_t i = 0; i < n_cars; ++i) {
    const Interval current = profile.cars[i];
    const Interval candidate = propose(AgentId::car(i));
    if (candidate == current) continue;
    const CarAgent& car = pop.cars[i];
    if (previous.car_utility(car, current, candidate) <= previous.car_utility(car, current, current)) continue;
    if (rng.uniform(static_cast<std::uint64_t>(t), i) < p) {
      next.cars[i] = candidate;
      next_occ.move_car(current, candidate);
      ++report.cars_switched;
    }
  }
  for (std::size_t j = 0; j < pop.trucks.size(); ++j) {
    const Interval current = profile.trucks[j];
    const Interval candidate = propose(AgentId::truck(j));
    if (candidate == current) continue;
    const TruckAgent& truck = pop.trucks[j];
    if (previous.truck_utility(truck, current, candidate) <= previous.truck_utility(truck, current, current)) continue;
    if (rng.uniform(static_cast<std::uint64_t>(t), n_cars + j) < p) {
      next.trucks[j] = candidate;
      next_occ.move_truck(current, candidate);
      ++report.trucks_switched;
    }
  }
  return report;
}

}  // namespace

JsfpState jsfp_init(const GameConfig& cfg, const Population& pop, ActionProfile initial) {
  check_profile(initial, pop, cfg.intervals);
  const auto slots = static_cast<std::size_t>(cfg.intervals);
  JsfpState state;
  state.car_memory = Matrix(pop.cars.size(), slots);
  state.truck_memory = Matrix(pop.trucks.size(), slots);
  for (std::size_t i = 0; i < pop.cars.size(); ++i) {
    for (std::size_t s = 0; s < slots; ++s) {
      state.car_memory(i, s) = pop.cars[i].penalty(Interval::from_slot(s), pop.cars[i].preferred);
    }
  }
  for (std::size_t j = 0; j < pop.trucks.size(); ++j) {
    for (std::size_t s = 0; s < slots; ++s) {
      state.truck_memory(j, s) = pop.trucks[j].penalty(Interval::from_slot(s), pop.trucks[j].preferred);
    }
  }
  state.occupancy = occupancy(initial, cfg.intervals);
  state.profile = std::move(initial);
  state.t = 0;
  state.history = history_for(cfg);
  return state;
}

StepReport jsfp_step(JsfpState& state, const GameConfig& cfg, const Population& pop, const LearnerParams& params,
                     const CounterRng& rng) {
  const long t = state.t;
  const RoadConditions conditions = conditions_at(t, cfg, params.perturbations, state.history);
  const FrozenRoad previous(cfg, state.occupancy, conditions);

  ActionProfile next = state.profile;
  Occupancy next_occ = state.occupancy;
  auto propose = [&](AgentId agent) {
    return agent.kind == AgentId::Kind::Car ? argmax(state.car_memory.row(agent.index))
                                            : argmax(state.truck_memory.row(agent.index));
  };
  const StepReport report = decide(previous, state.profile, pop, params.inertia.p, rng, t, propose, next, next_occ);

  const double lambda = forgetting_weight(params.forgetting, t);
  const FrozenRoad realized(cfg, next_occ, conditions);
  const auto slots = static_cast<std::size_t>(cfg.intervals);
  for (std::size_t i = 0; i < pop.cars.size(); ++i) {
    auto row = state.car_memory.row(i);
    for (std::size_t s = 0; s < slots; ++s) {
      row[s] = blend(row[s], realized.car_utility(pop.cars[i], next.cars[i], Interval::from_slot(s)), lambda);
    }
  }
  for (std::size_t j = 0; j < pop.trucks.size(); ++j) {
    auto row = state.truck_memory.row(j);
    for (std::size_t s = 0; s < slots; ++s) {
      row[s] = blend(row[s], realized.truck_utility(pop.trucks[j], next.trucks[j], Interval::from_slot(s)), lambda);
    }
  }

  state.profile = std::move(next);
  state.occupancy = std::move(next_occ);
  state.history.record(state.occupancy.trucks);
  ++state.t;
  return report;
}

AsfpState asfp_init(const GameConfig& cfg, const Population& pop, ActionProfile initial) {
  if (std::holds_alternative<CarTaxDelayed>(cfg.policy)) {
    throw PolicyError("average strategy fictitious play needs pricing that depends only on the current interval "
                      "counts; car_tax_delayed depends on past counts");
  }
  check_profile(initial, pop, cfg.intervals);
  const auto slots = static_cast<std::size_t>(cfg.intervals);
  AsfpState state;
  state.occupancy = occupancy(initial, cfg.intervals);
  state.car_flow.resize(slots);
  state.truck_flow.resize(slots);
  for (std::size_t s = 0; s < slots; ++s) {
    state.car_flow[s] = state.occupancy.vehicles[s] - state.occupancy.trucks[s];
    state.truck_flow[s] = state.occupancy.trucks[s];
  }
  state.car_choices = Matrix(pop.cars.size(), slots);
  state.truck_choices = Matrix(pop.trucks.size(), slots);
  for (std::size_t i = 0; i < pop.cars.size(); ++i) state.car_choices(i, initial.cars[i].slot()) = 1.0;
  for (std::size_t j = 0; j < pop.trucks.size(); ++j) state.truck_choices(j, initial.trucks[j].slot()) = 1.0;
  state.profile = std::move(initial);
  state.t = 1;
  return state;
}

double forecast_car_utility(const GameConfig& cfg, const CarAgent& car, Interval r, double car_flow,
                            double truck_flow, double own_share) {
  const double vehicles = car_flow + truck_flow - own_share + 1.0;
  double tax = 0.0;
  if (std::holds_alternative<CarTax>(cfg.policy)) {
    tax = cfg.velocity.a * cfg.beta * cfg.benefit.cumulative_at(truck_flow) / car.value_of_time;
  }
  return car.penalty(r, car.preferred) + cfg.velocity.at(vehicles) + tax;
}

double forecast_truck_utility(const GameConfig& cfg, const TruckAgent& truck, Interval r, double car_flow,
                              double truck_flow, double own_share) {
  const double vehicles = car_flow + truck_flow - own_share + 1.0;
  const double trucks = truck_flow - own_share + 1.0;
  const double v = cfg.velocity.at(vehicles);
  double subsidy = 0.0;
  if (const auto* s = std::get_if<TruckSubsidy>(&cfg.policy)) subsidy = cfg.beta * (s->v0 - v) * trucks;
  return truck.penalty(r, truck.preferred) + v + subsidy + cfg.beta * v * cfg.benefit.at(trucks);
}

StepReport asfp_step(AsfpState& state, const GameConfig& cfg, const Population& pop, const LearnerParams& params,
                     const CounterRng& rng) {
  const auto* forgetting = std::get_if<ConstantForgetting>(&params.forgetting);
  if (!forgetting) throw ValidationError("average strategy fictitious play needs a constant forgetting factor");
  if (std::holds_alternative<CarTaxDelayed>(cfg.policy)) {
    throw PolicyError("average strategy fictitious play does not support car_tax_delayed");
  }
  const double lambda = forgetting->lambda;
  const long t = state.t;
  const auto slots = static_cast<std::size_t>(cfg.intervals);

  const RoadConditions conditions = conditions_at(t, cfg, params.perturbations, TruckHistory());
  const FrozenRoad previous(cfg, state.occupancy, conditions);

  auto propose = [&](AgentId agent) {
    std::size_t best = 0;
    double best_value = 0.0;
    for (std::size_t s = 0; s < slots; ++s) {
      const Interval r = Interval::from_slot(s);
      const double value =
          agent.kind == AgentId::Kind::Car
              ? forecast_car_utility(cfg, pop.cars[agent.index], r, state.car_flow[s], state.truck_flow[s],
                                     state.car_choices(agent.index, s))
              : forecast_truck_utility(cfg, pop.trucks[agent.index], r, state.car_flow[s], state.truck_flow[s],
                                       state.truck_choices(agent.index, s));
      if (s == 0 || value > best_value) {
        best = s;
        best_value = value;
      }
    }
    return Interval::from_slot(best);
  };

  ActionProfile next = state.profile;
  Occupancy next_occ = state.occupancy;
  const StepReport report = decide(previous, state.profile, pop, params.inertia.p, rng, t, propose, next, next_occ);

  for (std::size_t s = 0; s < slots; ++s) {
    const double cars = next_occ.vehicles[s] - next_occ.trucks[s];
    state.car_flow[s] = (1.0 - lambda) * state.car_flow[s] + lambda * cars;
    state.truck_flow[s] = (1.0 - lambda) * state.truck_flow[s] + lambda * next_occ.trucks[s];
  }
  for (std::size_t i = 0; i < pop.cars.size(); ++i) {
    auto row = state.car_choices.row(i);
    for (std::size_t s = 0; s < slots; ++s) row[s] = (1.0 - lambda) * row[s] + (next.cars[i].slot() == s ? lambda : 0.0);
  }
  for (std::size_t j = 0; j < pop.trucks.size(); ++j) {
    auto row = state.truck_choices.row(j);
    for (std::size_t s = 0; s < slots; ++s) {
      row[s] = (1.0 - lambda) * row[s] + (next.trucks[j].slot() == s ? lambda : 0.0);
    }
  }

  state.profile = std::move(next);
  state.occupancy = std::move(next_occ);
  ++state.t;
  return report;
}

namespace {

template <class State, class Step>
void drive(Trace& trace, State& state, Step&& step, const GameConfig& cfg, const Population& pop,
           const LearnerParams& params, const TruckHistory* history) {
  long last_perturbation = -1;
  for (const auto& p : params.perturbations) last_perturbation = std::max(last_perturbation, p.iteration);
  long required = params.stability_window;
  if (const auto* d = std::get_if<CarTaxDelayed>(&cfg.policy)) required = std::max<long>(required, d->delay);

  auto certify = [&]() {
    // The game faced at the next iteration, without any transient disruption.
    const RoadConditions conditions =
        conditions_at(state.t, cfg, {}, history ? *history : TruckHistory());
    return is_nash(FrozenRoad(cfg, state.occupancy, conditions), state.profile, pop);
  };

  long streak = 0;
  bool certified = false;
  for (long k = 0; k < params.max_iterations; ++k) {
    const long t = state.t;
    const StepReport report = step();
    trace.iterations.push_back(
        IterationRecord{t, state.occupancy.vehicles, state.occupancy.trucks, report.cars_switched,
                        report.trucks_switched});
    if (report.switched() > 0) {
      streak = 0;
      trace.settled_at = t;
    } else {
      ++streak;
    }
    if (streak >= required && t >= last_perturbation) {
      trace.certificate = certify();
      if (trace.certificate.is_nash) {
        certified = true;
        break;
      }
    }
  }
  trace.converged = certified;
  if (!certified) trace.certificate = certify();
  trace.final_profile = state.profile;
}

}  // namespace

Trace run(const GameConfig& cfg, const Population& pop, const LearnerParams& params, std::uint64_t seed,
          std::optional<ActionProfile> initial) {
  cfg.validate();
  pop.validate(cfg.intervals);
  params.validate(cfg.intervals);
  ActionProfile start = initial ? std::move(*initial) : preferred_profile(pop);
  check_profile(start, pop, cfg.intervals);

  const CounterRng rng(seed);
  Trace trace;
  trace.algorithm = params.algorithm;
  trace.initial_profile = start;
  if (params.algorithm == Algorithm::Jsfp) {
    JsfpState state = jsfp_init(cfg, pop, std::move(start));
    drive(trace, state, [&] { return jsfp_step(state, cfg, pop, params, rng); }, cfg, pop, params, &state.history);
  } else {
    AsfpState state = asfp_init(cfg, pop, std::move(start));
    drive(trace, state, [&] { return asfp_step(state, cfg, pop, params, rng); }, cfg, pop, params, nullptr);
  }
  return trace;
}

}  // namespace platoon
