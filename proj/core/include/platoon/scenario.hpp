#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "platoon/game.hpp"
#include "platoon/learning.hpp"

namespace platoon {

/// P{T = r} for r = 1..R.
struct PreferenceDistribution {
  std::vector<double> probabilities;

  /// Eight intervals: 1/6 at r = 2 and 4, 1/4 at r = 3, 1/12 elsewhere.
  static PreferenceDistribution paper_default();
  static PreferenceDistribution point_mass(int intervals, Interval r);

  /// Sizes must match, entries nonnegative, sum 1 within 1e-12.
  void validate(int intervals) const;
  /// Inverse-CDF draw for u in [0, 1).
  Interval sample(double u) const;

  friend bool operator==(const PreferenceDistribution&, const PreferenceDistribution&) = default;
};

/// Penalty slopes uniform in [lower, upper].
struct AlphaDistribution {
  double lower = -7.5;
  double upper = -2.5;

  void validate() const;

  friend bool operator==(const AlphaDistribution&, const AlphaDistribution&) = default;
};

struct ValueOfTimeGroup {
  double delta = 1.0;
  double probability = 1.0;

  friend bool operator==(const ValueOfTimeGroup&, const ValueOfTimeGroup&) = default;
};

/// Discrete distribution of the cars' value of time. Trucks always have delta = 1.
struct ValueOfTimeGroups {
  std::vector<ValueOfTimeGroup> groups{ValueOfTimeGroup{}};

  /// (1.00, 0.754), (3.37, 0.036), (0.19, 0.210).
  static ValueOfTimeGroups heterogeneous();

  void validate() const;
  double sample(double u) const;

  friend bool operator==(const ValueOfTimeGroups&, const ValueOfTimeGroups&) = default;
};

struct OutputSpec {
  std::string directory = "out";
  bool truck_occupancy = true;

  friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

/// Everything needed to reproduce one experiment.
struct ScenarioSpec {
  GameConfig game;
  /// Silences the warning for populations that can push a*(N+M)+b below zero.
  bool allow_negative_velocity = false;

  std::size_t cars = 10000;
  std::size_t trucks = 100;
  /// M/(N+M) with N+M held at cars + trucks; overrides the split when set.
  std::optional<double> equipment_ratio;
  PenaltyShape penalty_shape = PenaltyShape::Absolute;
  PreferenceDistribution car_preference = PreferenceDistribution::paper_default();
  /// Falls back to the car distribution when absent.
  std::optional<PreferenceDistribution> truck_preference;
  AlphaDistribution alpha;
  ValueOfTimeGroups value_of_time;

  LearnerParams learner;
  OutputSpec output;
  std::uint64_t seed = 1;

  /// The eight-interval experiment: N=10000, M=100, beta=1e-3, CarTax, JSFP with
  /// p=0.4 and lambda=0.03, equal value of time. Opts in to negative velocities.
  static ScenarioSpec paper_default();

  /// Agent counts after applying the equipment ratio.
  std::size_t car_count() const;
  std::size_t truck_count() const;

  /// Throws ScenarioError naming the offending field.
  void validate() const;
};

/// Draws the population. Each attribute comes from its own stream of the seed, so changing
/// one block of the spec leaves the other draws untouched.
Population sample_population(const ScenarioSpec& spec, std::uint64_t seed);

/// Model-misuse warnings for a sampled population, minus those the spec opts out of.
std::vector<std::string> scenario_warnings(const ScenarioSpec& spec, const Population& pop);

/// Parses a scenario document. Schema violations throw ScenarioError with a dotted field
/// path; unknown fields are reported through `warnings` and otherwise ignored.
ScenarioSpec parse_scenario(std::string_view text, std::vector<std::string>* warnings = nullptr);

/// Canonical form: defaults written out, keys sorted, two-space indent, trailing newline.
std::string scenario_to_json(const ScenarioSpec& spec);

/// Throws IoError when the file cannot be read, ScenarioError on schema violations.
ScenarioSpec load_scenario(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);
void save_scenario(const ScenarioSpec& spec, const std::filesystem::path& path);

}  // namespace platoon
