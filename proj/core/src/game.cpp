#include "platoon/game.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "platoon/error.hpp"

namespace platoon {

void VelocityModel::validate() const {
  if (!(a < 0.0)) throw ValidationError("velocity slope a must be negative, got " + std::to_string(a));
  if (!(b > 0.0)) throw ValidationError("velocity intercept b must be positive, got " + std::to_string(b));
}

double Penalty::operator()(Interval chosen, Interval preferred) const {
  const int offset = chosen.value() - preferred.value();
  switch (shape) {
    case PenaltyShape::Absolute:
      return alpha * std::abs(offset);
    case PenaltyShape::LateOnly:
      return alpha * std::max(offset, 0);
  }
  return 0.0;
}

double penalty(const Penalty& kind, Interval chosen, Interval preferred) { return kind(chosen, preferred); }

PlatoonBenefit PlatoonBenefit::thresholded(int tau) {
  if (tau < 1) throw ValidationError("platoon threshold tau must be a positive integer");
  return PlatoonBenefit(Shape::Thresholded, tau);
}

double PlatoonBenefit::operator()(int trucks) const {
  if (trucks <= 0) return 0.0;
  if (shape_ == Shape::Thresholded && trucks < tau_) return 0.0;
  return static_cast<double>(trucks);
}

double PlatoonBenefit::cumulative(int trucks) const {
  if (trucks <= 0) return 0.0;
  const double m = trucks;
  if (shape_ == Shape::Linear) return m * (m + 1.0) / 2.0;
  if (trucks < tau_) return 0.0;
  const double t = tau_;
  return (m * (m + 1.0) - (t - 1.0) * t) / 2.0;
}

double PlatoonBenefit::at(double trucks) const {
  if (trucks <= 0.0) return 0.0;
  if (shape_ == Shape::Thresholded && trucks < tau_) return 0.0;
  return trucks;
}

double PlatoonBenefit::cumulative_at(double trucks) const {
  if (trucks <= 0.0) return 0.0;
  if (shape_ == Shape::Linear) return trucks * (trucks + 1.0) / 2.0;
  const double whole = std::floor(trucks);
  const double frac = trucks - whole;
  const int lo = static_cast<int>(whole);
  const double below = cumulative(lo);
  if (frac == 0.0) return below;
  return below + frac * (cumulative(lo + 1) - below);
}

std::string policy_name(const PricingPolicy& policy) {
  struct Visitor {
    std::string operator()(const NoPricing&) const { return "none"; }
    std::string operator()(const CarTax&) const { return "car_tax"; }
    std::string operator()(const CarTaxDelayed&) const { return "car_tax_delayed"; }
    std::string operator()(const TruckSubsidy&) const { return "truck_subsidy"; }
  };
  return std::visit(Visitor{}, policy);
}

bool taxes_cars(const PricingPolicy& policy) {
  return std::holds_alternative<CarTax>(policy) || std::holds_alternative<CarTaxDelayed>(policy);
}

bool subsidizes_trucks(const PricingPolicy& policy) { return std::holds_alternative<TruckSubsidy>(policy); }

namespace {

void check_interval(Interval r, int intervals, const char* what) {
  if (r.value() < 1 || r.value() > intervals) {
    throw InvalidProfile(std::string(what) + " interval " + std::to_string(r.value()) + " outside 1.." +
                         std::to_string(intervals));
  }
}

}  // namespace

void Population::validate(int intervals) const {
  for (const auto& car : cars) {
    check_interval(car.preferred, intervals, "preferred");
    if (!(car.penalty.alpha < 0.0)) throw ValidationError("car penalty slope alpha must be negative");
    if (!(car.value_of_time > 0.0)) throw ValidationError("car value of time must be positive");
  }
  for (const auto& truck : trucks) {
    check_interval(truck.preferred, intervals, "preferred");
    if (!(truck.penalty.alpha < 0.0)) throw ValidationError("truck penalty slope alpha must be negative");
  }
}

void GameConfig::validate() const {
  if (intervals < 2) throw ValidationError("need at least 2 intervals");
  velocity.validate();
  if (!(beta >= 0.0)) throw ValidationError("platoon coefficient beta must be nonnegative");
  if (const auto* delayed = std::get_if<CarTaxDelayed>(&policy); delayed && delayed->delay < 1) {
    throw ValidationError("tax delay must be a positive number of iterations");
  }
}

ActionProfile preferred_profile(const Population& population) {
  ActionProfile profile;
  profile.cars.reserve(population.cars.size());
  profile.trucks.reserve(population.trucks.size());
  for (const auto& car : population.cars) profile.cars.push_back(car.preferred);
  for (const auto& truck : population.trucks) profile.trucks.push_back(truck.preferred);
  return profile;
}

void Occupancy::move_car(Interval from, Interval to) {
  --vehicles[from.slot()];
  ++vehicles[to.slot()];
}

void Occupancy::move_truck(Interval from, Interval to) {
  --vehicles[from.slot()];
  ++vehicles[to.slot()];
  --trucks[from.slot()];
  ++trucks[to.slot()];
}

Occupancy occupancy(const ActionProfile& profile, int intervals) {
  if (intervals < 1) throw InvalidProfile("interval count must be positive");
  Occupancy occ{std::vector<int>(static_cast<std::size_t>(intervals), 0),
                std::vector<int>(static_cast<std::size_t>(intervals), 0)};
  for (Interval r : profile.cars) {
    check_interval(r, intervals, "car");
    ++occ.vehicles[r.slot()];
  }
  for (Interval r : profile.trucks) {
    check_interval(r, intervals, "truck");
    ++occ.vehicles[r.slot()];
    ++occ.trucks[r.slot()];
  }
  return occ;
}

double velocity(const Occupancy& occ, Interval r, const VelocityModel& model) {
  return model.at(static_cast<double>(occ.vehicles_at(r)));
}

namespace {

// The formulas shared by the free functions and FrozenRoad, so both routes round alike.
double tax_base(const GameConfig& cfg, int trucks) { return cfg.velocity.a * cfg.beta * cfg.benefit.cumulative(trucks); }

double subsidy_term(double beta, double v0, double flow_velocity, int trucks) {
  return beta * (v0 - flow_velocity) * static_cast<double>(trucks);
}

double flow_velocity(const GameConfig& cfg, int vehicles, const RoadConditions& conditions, std::size_t slot) {
  const double v = cfg.velocity.at(static_cast<double>(vehicles));
  if (conditions.velocity_divisor.empty()) return v;
  return v / conditions.velocity_divisor[slot];
}

}  // namespace

double car_tax(const GameConfig& cfg, const Occupancy& occ, Interval r, double value_of_time) {
  if (!taxes_cars(cfg.policy)) throw PolicyError("car_tax requires a car tax policy, got " + policy_name(cfg.policy));
  return tax_base(cfg, occ.trucks_at(r)) / value_of_time;
}

double truck_subsidy(const GameConfig& cfg, const Occupancy& occ, Interval r) {
  const auto* subsidy = std::get_if<TruckSubsidy>(&cfg.policy);
  if (!subsidy) throw PolicyError("truck_subsidy requires the truck subsidy policy, got " + policy_name(cfg.policy));
  return subsidy_term(cfg.beta, subsidy->v0, velocity(occ, r, cfg.velocity), occ.trucks_at(r));
}

FrozenRoad::FrozenRoad(const GameConfig& cfg, const Occupancy& occ, const RoadConditions& conditions) {
  const std::size_t slots = occ.vehicles.size();
  if (!conditions.velocity_divisor.empty() && conditions.velocity_divisor.size() != slots) {
    throw ValidationError("velocity divisor must list every interval");
  }
  const bool delayed = std::holds_alternative<CarTaxDelayed>(cfg.policy);
  if (delayed && !conditions.announced_trucks.empty() && conditions.announced_trucks.size() != slots) {
    throw ValidationError("announced truck counts must list every interval");
  }
  const auto* subsidy = std::get_if<TruckSubsidy>(&cfg.policy);

  stay_.resize(slots);
  join_.resize(slots);
  for (std::size_t s = 0; s < slots; ++s) {
    const int n = occ.vehicles[s];
    const int m = occ.trucks[s];

    int taxed = 0;
    bool levied = false;
    if (std::holds_alternative<CarTax>(cfg.policy)) {
      taxed = m;
      levied = true;
    } else if (delayed && !conditions.announced_trucks.empty()) {
      taxed = conditions.announced_trucks[s];
      levied = true;
    }

    Terms& stay = stay_[s];
    stay.velocity = flow_velocity(cfg, n, conditions, s);
    stay.car_tax = levied ? tax_base(cfg, taxed) : 0.0;
    stay.subsidy = subsidy ? subsidy_term(cfg.beta, subsidy->v0, stay.velocity, m) : 0.0;
    stay.platoon = cfg.beta * stay.velocity * cfg.benefit(m);

    Terms& join = join_[s];
    join.velocity = flow_velocity(cfg, n + 1, conditions, s);
    join.car_tax = stay.car_tax;
    join.subsidy = subsidy ? subsidy_term(cfg.beta, subsidy->v0, join.velocity, m + 1) : 0.0;
    join.platoon = cfg.beta * join.velocity * cfg.benefit(m + 1);
  }
}

double FrozenRoad::car_utility(const CarAgent& car, Interval current, Interval candidate) const {
  const std::size_t s = candidate.slot();
  const double v = current == candidate ? stay_[s].velocity : join_[s].velocity;
  const double tax = stay_[s].car_tax / car.value_of_time;
  return car.penalty(candidate, car.preferred) + v + tax;
}

double FrozenRoad::truck_utility(const TruckAgent& truck, Interval current, Interval candidate) const {
  const Terms& t = current == candidate ? stay_[candidate.slot()] : join_[candidate.slot()];
  return truck.penalty(candidate, truck.preferred) + t.velocity + t.subsidy + t.platoon;
}

namespace {

void check_shape(const ActionProfile& profile, const Population& pop) {
  if (profile.cars.size() != pop.cars.size() || profile.trucks.size() != pop.trucks.size()) {
    throw InvalidProfile("profile has " + std::to_string(profile.cars.size()) + " cars and " +
                         std::to_string(profile.trucks.size()) + " trucks, population has " +
                         std::to_string(pop.cars.size()) + " and " + std::to_string(pop.trucks.size()));
  }
}

}  // namespace

double car_utility(std::size_t car, const ActionProfile& profile, const GameConfig& cfg, const Population& pop,
                   const RoadConditions& conditions) {
  check_shape(profile, pop);
  const FrozenRoad road(cfg, occupancy(profile, cfg.intervals), conditions);
  const Interval r = profile.cars.at(car);
  return road.car_utility(pop.cars[car], r, r);
}

double truck_utility(std::size_t truck, const ActionProfile& profile, const GameConfig& cfg, const Population& pop,
                     const RoadConditions& conditions) {
  check_shape(profile, pop);
  const FrozenRoad road(cfg, occupancy(profile, cfg.intervals), conditions);
  const Interval r = profile.trucks.at(truck);
  return road.truck_utility(pop.trucks[truck], r, r);
}

bool velocity_can_go_negative(const VelocityModel& model, std::size_t vehicles) {
  return model.at(static_cast<double>(vehicles)) < 0.0;
}

std::vector<std::string> scenario_warnings(const GameConfig& cfg, const Population& pop) {
  std::vector<std::string> warnings;
  if (velocity_can_go_negative(cfg.velocity, pop.size())) {
    warnings.push_back("velocity a*(N+M)+b is negative: " + std::to_string(pop.size()) +
                       " vehicles in one interval would drive the affine model below zero");
  }
  return warnings;
}

}  // namespace platoon
