#pragma once

// Random small games for property tests. Deterministic in the seed.

#include <cstdint>

#include "platoon/game.hpp"
#include "platoon/rng.hpp"

namespace fixtures {

struct Instance {
  platoon::GameConfig cfg;
  platoon::Population pop;
  platoon::ActionProfile profile;
};

inline int pick(platoon::SplitMix64& g, int lo, int hi) {
  return lo + static_cast<int>(g.uniform() * (hi - lo + 1));
}

inline double between(platoon::SplitMix64& g, double lo, double hi) { return lo + (hi - lo) * g.uniform(); }

inline platoon::Interval any_interval(platoon::SplitMix64& g, int R) { return platoon::Interval(pick(g, 1, R)); }

inline platoon::Penalty any_penalty(platoon::SplitMix64& g) {
  const auto shape = g.uniform() < 0.5 ? platoon::PenaltyShape::Absolute : platoon::PenaltyShape::LateOnly;
  return platoon::Penalty{shape, between(g, -7.5, -2.5)};
}

/// Up to `max_cars` cars and `max_trucks` trucks (at least one of each) on 2..max_R intervals.
inline Instance random_instance(std::uint64_t seed, platoon::PricingPolicy policy, int max_cars = 8,
                                int max_trucks = 4, int max_R = 5) {
  platoon::SplitMix64 g(platoon::mix64(seed) ^ 0x5eedULL);
  Instance in;
  in.cfg.intervals = pick(g, 2, max_R);
  in.cfg.beta = between(g, 0.0, 5e-3);
  in.cfg.policy = policy;
  const int R = in.cfg.intervals;
  const int N = pick(g, 1, max_cars);
  const int M = pick(g, 1, max_trucks);
  for (int i = 0; i < N; ++i) {
    const double delta = g.uniform() < 0.3 ? 0.19 : (g.uniform() < 0.1 ? 3.37 : 1.0);
    in.pop.cars.push_back({any_interval(g, R), any_penalty(g), delta});
    in.profile.cars.push_back(any_interval(g, R));
  }
  for (int j = 0; j < M; ++j) {
    in.pop.trucks.push_back({any_interval(g, R), any_penalty(g)});
    in.profile.trucks.push_back(any_interval(g, R));
  }
  return in;
}

}  // namespace fixtures
