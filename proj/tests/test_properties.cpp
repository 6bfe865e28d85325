// Randomized property suites, at least a thousand cases each.

#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "instances.hpp"
#include "platoon/learning.hpp"
#include "platoon/potential.hpp"
#include "reference.hpp"

using namespace platoon;

namespace {

constexpr int kCases = 1000;

PricingPolicy policy_for(std::uint64_t seed) {
  switch (seed % 4) {
    case 0: return NoPricing{};
    case 1: return CarTax{};
    case 2: return TruckSubsidy{85.0};
    default: return CarTaxDelayed{2};
  }
}

int sum(const std::vector<int>& v) { return std::accumulate(v.begin(), v.end(), 0); }

}  // namespace

TEST_CASE("occupancy conservation") {
  for (std::uint64_t seed = 0; seed < kCases; ++seed) {
    const auto in = fixtures::random_instance(seed, CarTax{}, 30, 10, 8);
    Occupancy occ = occupancy(in.profile, in.cfg.intervals);
    const int N = static_cast<int>(in.pop.cars.size());
    const int M = static_cast<int>(in.pop.trucks.size());
    CHECK(sum(occ.vehicles) == N + M);
    CHECK(sum(occ.trucks) == M);
    SplitMix64 g(seed);
    for (int k = 0; k < 20; ++k) {
      const Interval from = fixtures::any_interval(g, in.cfg.intervals);
      const Interval to = fixtures::any_interval(g, in.cfg.intervals);
      if (g.uniform() < 0.5) {
        if (occ.cars_at(from) > 0) occ.move_car(from, to);
      } else if (occ.trucks_at(from) > 0) {
        occ.move_truck(from, to);
      }
    }
    CHECK(sum(occ.vehicles) == N + M);
    CHECK(sum(occ.trucks) == M);
    for (std::size_t s = 0; s < occ.vehicles.size(); ++s) {
      CHECK(occ.trucks[s] >= 0);
      CHECK(occ.trucks[s] <= occ.vehicles[s]);
    }
  }
}

TEST_CASE("cross-difference operators commute") {
  for (std::uint64_t seed = 0; seed < kCases; ++seed) {
    auto in = fixtures::random_instance(seed, seed % 2 ? PricingPolicy{CarTax{}} : PricingPolicy{TruckSubsidy{85.0}});
    SplitMix64 g(seed);
    const std::size_t i = static_cast<std::size_t>(fixtures::pick(g, 0, static_cast<int>(in.pop.cars.size()) - 1));
    const std::size_t j = static_cast<std::size_t>(fixtures::pick(g, 0, static_cast<int>(in.pop.trucks.size()) - 1));
    const Interval zp = fixtures::any_interval(g, in.cfg.intervals);
    const Interval xp = fixtures::any_interval(g, in.cfg.intervals);

    // A potential, two utilities, and an arbitrary hash of the profile.
    auto potential = [&](const ActionProfile& p) {
      return seed % 2 ? ref::phi(p, in.cfg, in.pop) : ref::psi(p, in.cfg, in.pop);
    };
    auto car = [&](const ActionProfile& p) { return ref::car_u(i, p, in.cfg, in.pop); };
    auto truck = [&](const ActionProfile& p) { return ref::truck_u(j, p, in.cfg, in.pop); };
    auto hash = [&](const ActionProfile& p) {
      std::uint64_t h = seed;
      for (Interval r : p.cars) h = mix64(h + static_cast<std::uint64_t>(r.value()));
      for (Interval r : p.trucks) h = mix64(h ^ static_cast<std::uint64_t>(r.value()));
      return unit_interval(h) * 100.0;
    };
    const auto commutes = [&](auto&& f) {
      const double zx = mixed_difference(f, in.profile, i, j, zp, xp, true);
      const double xz = mixed_difference(f, in.profile, i, j, zp, xp, false);
      return std::abs(zx - xz) <= 1e-9;
    };
    CHECK(commutes(potential));
    CHECK(commutes(car));
    CHECK(commutes(truck));
    CHECK(commutes(hash));

    const auto rep = cross_difference(in.profile, i, j, zp, xp, in.cfg, in.pop);
    CHECK(rep.mismatch == rep.lhs - rep.rhs);
    // Both priced games are potential games, so the mismatch must vanish. A tax scaled
    // by a car's own value of time is exact only at unit value of time.
    const bool exact = seed % 2 == 0 || in.pop.cars[i].value_of_time == 1.0;
    if (exact) CHECK(std::abs(rep.mismatch) <= 1e-9);
  }
}

TEST_CASE("memories stay inside the convex hull of old value and observation") {
  for (std::uint64_t seed = 0; seed < kCases; ++seed) {
    // Delayed taxes are left out: their observations depend on the truck history.
    auto in = fixtures::random_instance(seed, policy_for(seed % 3), 8, 4, 5);
    in.cfg.velocity = {-0.9, 30.0};
    SplitMix64 g(~seed);
    LearnerParams params;
    params.forgetting = ConstantForgetting{fixtures::between(g, 0.01, 0.99)};
    JsfpState state = jsfp_init(in.cfg, in.pop, in.profile);
    const CounterRng rng(seed);
    for (int step = 0; step < 5; ++step) {
      const Matrix before = state.car_memory;
      jsfp_step(state, in.cfg, in.pop, params, rng);
      // Observations are the counterfactual utilities against the new profile.
      for (std::size_t i = 0; i < in.pop.cars.size(); ++i) {
        for (int r = 1; r <= in.cfg.intervals; ++r) {
          const double old_value = before(i, r - 1);
          const double seen = ref::car_u_at(i, Interval(r), state.profile, in.cfg, in.pop);
          const double now = state.car_memory(i, r - 1);
          const double slack = 1e-12 * std::max(1.0, std::abs(seen));
          CHECK(now >= std::min(old_value, seen) - slack);
          CHECK(now <= std::max(old_value, seen) + slack);
        }
      }
    }
  }
}

TEST_CASE("average strategy flows conserve the agent counts") {
  for (std::uint64_t seed = 0; seed < kCases; ++seed) {
    auto in = fixtures::random_instance(seed, seed % 2 ? PricingPolicy{CarTax{}} : PricingPolicy{TruckSubsidy{85.0}},
                                        10, 5, 6);
    in.cfg.velocity = {-0.9, 30.0};
    LearnerParams params;
    params.algorithm = Algorithm::Asfp;
    AsfpState state = asfp_init(in.cfg, in.pop, in.profile);
    const CounterRng rng(seed);
    const double N = static_cast<double>(in.pop.cars.size());
    const double M = static_cast<double>(in.pop.trucks.size());
    for (int step = 0; step < 10; ++step) {
      asfp_step(state, in.cfg, in.pop, params, rng);
      CHECK(std::abs(std::accumulate(state.car_flow.begin(), state.car_flow.end(), 0.0) - N) <= 1e-9);
      CHECK(std::abs(std::accumulate(state.truck_flow.begin(), state.truck_flow.end(), 0.0) - M) <= 1e-9);
      for (double f : state.car_flow) CHECK(f >= 0.0);
    }
    for (std::size_t i = 0; i < in.pop.cars.size(); ++i) {
      const auto row = state.car_choices.row(i);
      CHECK(std::abs(std::accumulate(row.begin(), row.end(), 0.0) - 1.0) <= 1e-12);
    }
    for (std::size_t j = 0; j < in.pop.trucks.size(); ++j) {
      const auto row = state.truck_choices.row(j);
      CHECK(std::abs(std::accumulate(row.begin(), row.end(), 0.0) - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("argmax ties resolve to the smallest index") {
  for (std::uint64_t seed = 0; seed < kCases; ++seed) {
    SplitMix64 g(seed);
    const int R = fixtures::pick(g, 1, 12);
    // Few distinct values make ties the common case.
    std::vector<double> row;
    for (int r = 0; r < R; ++r) row.push_back(static_cast<double>(fixtures::pick(g, 0, 3)));
    const double best = *std::max_element(row.begin(), row.end());
    const auto first = std::find(row.begin(), row.end(), best) - row.begin();
    CHECK(argmax(row) == Interval::from_slot(static_cast<std::size_t>(first)));
    CHECK(argmax(row) == Interval(ref::first_max(row)));
    CHECK(argmax(row) == argmax(row));
  }
}

TEST_CASE("best response ties resolve to the smallest index") {
  // With no penalty and an empty road every interval but the crowded one ties.
  for (std::uint64_t seed = 0; seed < kCases; ++seed) {
    SplitMix64 g(seed);
    GameConfig cfg;
    cfg.intervals = fixtures::pick(g, 2, 8);
    cfg.policy = NoPricing{};
    Population pop;
    pop.cars.assign(2, CarAgent{Interval(1), Penalty{PenaltyShape::Absolute, -0.0}, 1.0});
    const Interval crowded = fixtures::any_interval(g, cfg.intervals);
    const ActionProfile p{{crowded, crowded}, {}};
    const Interval expected = crowded == Interval(1) ? Interval(2) : Interval(1);
    CHECK(best_response(AgentId::car(0), p, cfg, pop) == expected);
  }
}

TEST_CASE("runs are bitwise reproducible under a fixed seed") {
  for (std::uint64_t seed = 0; seed < kCases; ++seed) {
    auto in = fixtures::random_instance(seed, policy_for(seed), 8, 4, 4);
    in.cfg.velocity = {-0.9, 30.0};
    LearnerParams params;
    params.max_iterations = 60;
    params.stability_window = 10;
    if (seed % 3 == 0 && !std::holds_alternative<CarTaxDelayed>(in.cfg.policy)) params.algorithm = Algorithm::Asfp;
    if (seed % 5 == 0) params.perturbations = {Perturbation{3, {Interval(1)}, 10.0}};
    const Trace a = run(in.cfg, in.pop, params, seed, in.profile);
    const Trace b = run(in.cfg, in.pop, params, seed, in.profile);
    CHECK(a.iterations == b.iterations);
    CHECK(a.final_profile == b.final_profile);
    CHECK(a.converged == b.converged);
    CHECK(a.settled_at == b.settled_at);
    CHECK(a.certificate.is_nash == b.certificate.is_nash);
  }
}
