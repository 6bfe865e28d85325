#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace platoon {

/// A time interval of the day. Numbered from 1, like the action set it indexes.
class Interval {
 public:
  constexpr Interval() = default;
  constexpr explicit Interval(int value) : value_(value) {}

  constexpr int value() const { return value_; }
  /// Zero-based position into per-interval arrays.
  constexpr std::size_t slot() const { return static_cast<std::size_t>(value_ - 1); }
  static constexpr Interval from_slot(std::size_t slot) { return Interval(static_cast<int>(slot) + 1); }

  friend constexpr auto operator<=>(Interval, Interval) = default;

 private:
  int value_ = 1;
};

/// Affine flow velocity v = a*n + b in km/h, n the number of vehicles in the interval.
struct VelocityModel {
  double a = -0.0110;
  double b = 84.9696;

  constexpr double at(double vehicles) const { return a * vehicles + b; }
  void validate() const;
};

enum class PenaltyShape { Absolute, LateOnly };

/// Penalty for leaving the preferred interval. alpha < 0, so the result is never positive.
struct Penalty {
  PenaltyShape shape = PenaltyShape::Absolute;
  double alpha = -5.0;

  double operator()(Interval chosen, Interval preferred) const;
};

double penalty(const Penalty& kind, Interval chosen, Interval preferred);

/// Platooning benefit g(m) as a function of the number of trucks sharing an interval.
/// g(0) = 0 for both shapes.
class PlatoonBenefit {
 public:
  enum class Shape { Linear, Thresholded };

  static PlatoonBenefit linear() { return PlatoonBenefit(Shape::Linear, 1); }
  /// g(m) = m once at least `tau` trucks share the interval, zero below.
  static PlatoonBenefit thresholded(int tau);

  Shape shape() const { return shape_; }
  int threshold() const { return tau_; }

  double operator()(int trucks) const;
  /// Sum of g(1..trucks); zero for trucks <= 0.
  double cumulative(int trucks) const;

  // Real-valued extensions, needed when counts are replaced by averaged forecasts.
  // Linear: g(y) = y and the cumulative sum is y(y+1)/2. Thresholded: g(y) = y*[y >= tau]
  // and the cumulative sum interpolates linearly between integer counts.
  double at(double trucks) const;
  double cumulative_at(double trucks) const;

  friend bool operator==(const PlatoonBenefit&, const PlatoonBenefit&) = default;

 private:
  PlatoonBenefit(Shape shape, int tau) : shape_(shape), tau_(tau) {}

  Shape shape_;
  int tau_;
};

struct NoPricing {
  friend bool operator==(const NoPricing&, const NoPricing&) = default;
};

/// Cars pay a*beta*sum_{l<=m} g(l), m the trucks in their interval.
struct CarTax {
  friend bool operator==(const CarTax&, const CarTax&) = default;
};

/// CarTax levied on the truck counts announced `delay` iterations earlier; nothing is
/// levied during the first `delay` iterations. The truck history itself lives with the
/// learner, which passes the announced counts in through RoadConditions.
struct CarTaxDelayed {
  int delay = 30;
  friend bool operator==(const CarTaxDelayed&, const CarTaxDelayed&) = default;
};

/// Trucks receive beta*(v0 - v)*m.
struct TruckSubsidy {
  double v0 = 85.0;
  friend bool operator==(const TruckSubsidy&, const TruckSubsidy&) = default;
};

using PricingPolicy = std::variant<NoPricing, CarTax, CarTaxDelayed, TruckSubsidy>;

std::string policy_name(const PricingPolicy& policy);
bool taxes_cars(const PricingPolicy& policy);
bool subsidizes_trucks(const PricingPolicy& policy);

struct CarAgent {
  Interval preferred;
  Penalty penalty;
  double value_of_time = 1.0;
};

struct TruckAgent {
  Interval preferred;
  Penalty penalty;
};

struct Population {
  std::vector<CarAgent> cars;
  std::vector<TruckAgent> trucks;

  std::size_t size() const { return cars.size() + trucks.size(); }
  void validate(int intervals) const;
};

/// The game's fixed physics: interval count, velocity model, platooning and pricing.
struct GameConfig {
  int intervals = 8;
  VelocityModel velocity;
  double beta = 1e-3;
  PlatoonBenefit benefit = PlatoonBenefit::linear();
  PricingPolicy policy = CarTax{};

  void validate() const;
};

/// One interval per car and one per truck.
struct ActionProfile {
  std::vector<Interval> cars;
  std::vector<Interval> trucks;

  friend bool operator==(const ActionProfile&, const ActionProfile&) = default;
};

/// Every agent at its preferred interval.
ActionProfile preferred_profile(const Population& population);

/// Per-interval vehicle totals (cars and trucks) and truck counts.
struct Occupancy {
  std::vector<int> vehicles;
  std::vector<int> trucks;

  int vehicles_at(Interval r) const { return vehicles[r.slot()]; }
  int trucks_at(Interval r) const { return trucks[r.slot()]; }
  int cars_at(Interval r) const { return vehicles[r.slot()] - trucks[r.slot()]; }

  void move_car(Interval from, Interval to);
  void move_truck(Interval from, Interval to);

  friend bool operator==(const Occupancy&, const Occupancy&) = default;
};

/// Counts the profile. Throws InvalidProfile on any action outside 1..intervals.
Occupancy occupancy(const ActionProfile& profile, int intervals);

/// Everything about one iteration that is not part of the static game: an accident that
/// divides the flow velocity in some intervals, and the truck counts a delayed tax is
/// levied on.
struct RoadConditions {
  /// Per-interval divisor applied to the flow velocity. Empty means undisturbed.
  std::vector<double> velocity_divisor;
  /// Truck counts announced for CarTaxDelayed. Empty means no tax is levied yet.
  std::vector<int> announced_trucks;
};

double velocity(const Occupancy& occ, Interval r, const VelocityModel& model);

/// delta^-1 * a*beta * sum_{l<=m_r} g(l). Throws PolicyError unless the policy taxes cars.
/// For CarTaxDelayed pass the announced occupancy as `occ`.
double car_tax(const GameConfig& cfg, const Occupancy& occ, Interval r, double value_of_time = 1.0);

/// beta*(v0 - (a*n_r + b))*m_r. Throws PolicyError unless the policy is TruckSubsidy.
double truck_subsidy(const GameConfig& cfg, const Occupancy& occ, Interval r);

/// Per-interval utility terms for a frozen occupancy. Evaluating an agent at a candidate
/// interval adjusts the counts for that agent leaving its current interval, so
///
///   FrozenRoad(occupancy(p)).car_utility(car, p.cars[i], r)
///     == FrozenRoad(occupancy(p with car i at r)).car_utility(car, r, r)
///
/// holds bit for bit.
class FrozenRoad {
 public:
  FrozenRoad(const GameConfig& cfg, const Occupancy& occ, const RoadConditions& conditions = {});

  double car_utility(const CarAgent& car, Interval current, Interval candidate) const;
  double truck_utility(const TruckAgent& truck, Interval current, Interval candidate) const;

  /// Flow velocity in r for the frozen counts.
  double velocity(Interval r) const { return stay_[r.slot()].velocity; }
  int intervals() const { return static_cast<int>(stay_.size()); }

 private:
  // Terms for an interval with its frozen counts (stay) and with one extra vehicle that
  // is a truck (join). A car joining sees the join velocity but the stay tax base.
  struct Terms {
    double velocity = 0.0;
    double car_tax = 0.0;  // before value-of-time scaling
    double subsidy = 0.0;
    double platoon = 0.0;
  };

  std::vector<Terms> stay_;
  std::vector<Terms> join_;
};

double car_utility(std::size_t car, const ActionProfile& profile, const GameConfig& cfg,
                   const Population& pop, const RoadConditions& conditions = {});
double truck_utility(std::size_t truck, const ActionProfile& profile, const GameConfig& cfg,
                     const Population& pop, const RoadConditions& conditions = {});

/// True when a full road could drive the affine velocity negative; the model is only
/// fitted for moderate per-interval counts.
bool velocity_can_go_negative(const VelocityModel& model, std::size_t vehicles);
std::vector<std::string> scenario_warnings(const GameConfig& cfg, const Population& pop);

}  // namespace platoon
