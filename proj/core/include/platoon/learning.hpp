#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "platoon/equilibrium.hpp"
#include "platoon/game.hpp"
#include "platoon/rng.hpp"

namespace platoon {

/// lambda_t = lambda for every t.
struct ConstantForgetting {
  double lambda = 0.03;
  friend bool operator==(const ConstantForgetting&, const ConstantForgetting&) = default;
};

/// lambda_t = 1/(t+1): every past iteration weighs the same.
struct HarmonicForgetting {
  friend bool operator==(const HarmonicForgetting&, const HarmonicForgetting&) = default;
};

using ForgettingSchedule = std::variant<ConstantForgetting, HarmonicForgetting>;

double forgetting_weight(const ForgettingSchedule& schedule, long t);

/// Probability of actually switching to a strictly better candidate.
struct Inertia {
  double p = 0.4;
};

/// A one-iteration disruption (an accident, say) dividing the flow velocity in some intervals.
struct Perturbation {
  long iteration = 50;
  std::vector<Interval> intervals;
  double velocity_divisor = 10.0;
};

enum class Algorithm { Jsfp, Asfp };

std::string to_string(Algorithm algorithm);

struct LearnerParams {
  Algorithm algorithm = Algorithm::Jsfp;
  Inertia inertia;
  ForgettingSchedule forgetting = ConstantForgetting{};
  long max_iterations = 1000;
  /// Unchanged iterations required before the profile is put up for certification.
  long stability_window = 50;
  std::vector<Perturbation> perturbations;

  void validate(int intervals) const;
};

/// Row-major agents x intervals table of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Smallest index attaining the row maximum, as an interval.
Interval argmax(std::span<const double> row);

/// Truck occupancies of the last `delay` iterations, from which a delayed tax is levied.
class TruckHistory {
 public:
  TruckHistory() = default;
  explicit TruckHistory(int delay) : delay_(delay) {}

  int delay() const { return delay_; }
  /// Records the truck counts realized at iteration t (called in increasing t).
  void record(const std::vector<int>& trucks);
  /// Counts the tax of iteration t is levied on: those of iteration t - delay, or empty
  /// (no tax) while t <= delay.
  std::vector<int> announced_for(long t) const;

 private:
  int delay_ = 0;
  long recorded_ = 0;
  std::deque<std::vector<int>> window_;
};

/// Road conditions of iteration t: active perturbations and the announced delayed tax.
RoadConditions conditions_at(long t, const GameConfig& cfg, std::span<const Perturbation> perturbations,
                             const TruckHistory& history);

struct StepReport {
  std::size_t cars_switched = 0;
  std::size_t trucks_switched = 0;

  std::size_t switched() const { return cars_switched + trucks_switched; }
};

/// Joint strategy fictitious play. Each agent keeps a forgetting-weighted average of the
/// utility it would have earned at every interval given everyone else's realized actions.
struct JsfpState {
  Matrix car_memory;    // U-hat, cars x intervals
  Matrix truck_memory;  // V-hat, trucks x intervals
  ActionProfile profile;
  Occupancy occupancy;
  long t = 0;  // index of the next iteration
  TruckHistory history;
};

/// Memories start at each agent's penalty row; `initial` is the profile before iteration 0.
JsfpState jsfp_init(const GameConfig& cfg, const Population& pop, ActionProfile initial);

/// One iteration: every agent proposes the argmax of its memory, switches with probability
/// p if that is strictly better against the previous profile, then every memory row is
/// updated against the new profile.
StepReport jsfp_step(JsfpState& state, const GameConfig& cfg, const Population& pop, const LearnerParams& params,
                     const CounterRng& rng);

/// Average strategy fictitious play. A central node forecasts per-interval car and truck
/// counts; each agent tracks how often it picked every interval.
struct AsfpState {
  std::vector<double> car_flow;    // n-bar^c
  std::vector<double> truck_flow;  // n-bar^t
  Matrix car_choices;              // w-bar^c, cars x intervals
  Matrix truck_choices;            // w-bar^t, trucks x intervals
  ActionProfile profile;
  Occupancy occupancy;
  long t = 1;  // index of the next iteration
};

/// Throws PolicyError for pricing that is not a function of the interval counts alone.
AsfpState asfp_init(const GameConfig& cfg, const Population& pop, ActionProfile initial);

/// Forecast utility of car `car` for interval r from the averaged flows.
double forecast_car_utility(const GameConfig& cfg, const CarAgent& car, Interval r, double car_flow,
                            double truck_flow, double own_share);
double forecast_truck_utility(const GameConfig& cfg, const TruckAgent& truck, Interval r, double car_flow,
                              double truck_flow, double own_share);

StepReport asfp_step(AsfpState& state, const GameConfig& cfg, const Population& pop, const LearnerParams& params,
                     const CounterRng& rng);

struct IterationRecord {
  long t = 0;
  std::vector<int> vehicles;
  std::vector<int> trucks;
  std::size_t cars_switched = 0;
  std::size_t trucks_switched = 0;

  friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

struct Trace {
  Algorithm algorithm = Algorithm::Jsfp;
  std::vector<IterationRecord> iterations;
  ActionProfile initial_profile;
  ActionProfile final_profile;
  /// Stopped because the profile held still for the stability window and certified Nash.
  bool converged = false;
  /// Nash check of the final profile, whether or not the run converged.
  NashCertificate certificate;
  /// Iteration whose outcome is the final profile (the last one that changed an action),
  /// or -1 if no agent ever moved.
  long settled_at = -1;

  long iterations_run() const { return static_cast<long>(iterations.size()); }
};

/// Runs the chosen learner from `initial` (every agent at its preferred interval if absent)
/// until the profile has been unchanged for the stability window, every perturbation has
/// passed, and is_nash certifies it; or until max_iterations.
Trace run(const GameConfig& cfg, const Population& pop, const LearnerParams& params, std::uint64_t seed,
          std::optional<ActionProfile> initial = std::nullopt);

}  // namespace platoon
