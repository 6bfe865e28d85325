#pragma once

// Naive model written straight from the formulas. Every quantity is recomputed from the raw
// profile on each call; nothing is shared with the library beyond its plain data types and
// the counter-based generator that defines the random draws.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <variant>
#include <vector>

#include "platoon/game.hpp"
#include "platoon/learning.hpp"
#include "platoon/rng.hpp"

namespace ref {

using platoon::ActionProfile;
using platoon::GameConfig;
using platoon::Interval;
using platoon::Population;

struct Counts {
  std::vector<int> n;
  std::vector<int> m;
};

inline Counts count(const ActionProfile& p, int R) {
  Counts c{std::vector<int>(R, 0), std::vector<int>(R, 0)};
  for (Interval z : p.cars) c.n[z.value() - 1] += 1;
  for (Interval x : p.trucks) {
    c.n[x.value() - 1] += 1;
    c.m[x.value() - 1] += 1;
  }
  return c;
}

inline double pen(const platoon::Penalty& k, Interval chosen, Interval preferred) {
  const int d = chosen.value() - preferred.value();
  if (k.shape == platoon::PenaltyShape::Absolute) return k.alpha * std::abs(d);
  return d > 0 ? k.alpha * d : 0.0;
}

inline double g(const GameConfig& cfg, int m) {
  if (cfg.benefit.shape() == platoon::PlatoonBenefit::Shape::Linear) return m;
  return m >= cfg.benefit.threshold() ? m : 0.0;
}

inline double G(const GameConfig& cfg, int m) {
  double s = 0.0;
  for (int l = 1; l <= m; ++l) s += g(cfg, l);
  return s;
}

/// Iteration-specific disturbances: velocity divisors and the truck counts a delayed tax uses.
struct Road {
  std::vector<double> divisor;
  std::vector<int> announced;
};

inline double v(const GameConfig& cfg, int n, int r0, const Road& road) {
  const double raw = cfg.velocity.a * n + cfg.velocity.b;
  return road.divisor.empty() ? raw : raw / road.divisor[r0];
}

inline double car_u(std::size_t i, const ActionProfile& p, const GameConfig& cfg, const Population& pop,
                    const Road& road = {}) {
  const Counts c = count(p, cfg.intervals);
  const Interval z = p.cars[i];
  const int r0 = z.value() - 1;
  const auto& car = pop.cars[i];
  double u = pen(car.penalty, z, car.preferred) + v(cfg, c.n[r0], r0, road);
  if (std::holds_alternative<platoon::CarTax>(cfg.policy)) {
    u += cfg.velocity.a * cfg.beta * G(cfg, c.m[r0]) / car.value_of_time;
  } else if (std::holds_alternative<platoon::CarTaxDelayed>(cfg.policy) && !road.announced.empty()) {
    u += cfg.velocity.a * cfg.beta * G(cfg, road.announced[r0]) / car.value_of_time;
  }
  return u;
}

inline double truck_u(std::size_t j, const ActionProfile& p, const GameConfig& cfg, const Population& pop,
                      const Road& road = {}) {
  const Counts c = count(p, cfg.intervals);
  const Interval x = p.trucks[j];
  const int r0 = x.value() - 1;
  const auto& truck = pop.trucks[j];
  const double vel = v(cfg, c.n[r0], r0, road);
  double u = pen(truck.penalty, x, truck.preferred) + vel;
  if (const auto* s = std::get_if<platoon::TruckSubsidy>(&cfg.policy)) u += cfg.beta * (s->v0 - vel) * c.m[r0];
  u += cfg.beta * vel * g(cfg, c.m[r0]);
  return u;
}

inline double car_u_at(std::size_t i, Interval r, ActionProfile p, const GameConfig& cfg, const Population& pop,
                       const Road& road = {}) {
  p.cars[i] = r;
  return car_u(i, p, cfg, pop, road);
}

inline double truck_u_at(std::size_t j, Interval r, ActionProfile p, const GameConfig& cfg, const Population& pop,
                         const Road& road = {}) {
  p.trucks[j] = r;
  return truck_u(j, p, cfg, pop, road);
}

/// Brute-force deviation scan: true iff no agent gains strictly by moving alone.
inline bool nash(const ActionProfile& p, const GameConfig& cfg, const Population& pop, const Road& road = {}) {
  for (std::size_t i = 0; i < p.cars.size(); ++i) {
    const double here = car_u(i, p, cfg, pop, road);
    for (int r = 1; r <= cfg.intervals; ++r) {
      if (car_u_at(i, Interval(r), p, cfg, pop, road) > here) return false;
    }
  }
  for (std::size_t j = 0; j < p.trucks.size(); ++j) {
    const double here = truck_u(j, p, cfg, pop, road);
    for (int r = 1; r <= cfg.intervals; ++r) {
      if (truck_u_at(j, Interval(r), p, cfg, pop, road) > here) return false;
    }
  }
  return true;
}

inline double preference_sum(const ActionProfile& p, const Population& pop) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.cars.size(); ++i) s += pen(pop.cars[i].penalty, p.cars[i], pop.cars[i].preferred);
  for (std::size_t j = 0; j < p.trucks.size(); ++j) {
    s += pen(pop.trucks[j].penalty, p.trucks[j], pop.trucks[j].preferred);
  }
  return s;
}

inline double congestion_sum(const Counts& c, const GameConfig& cfg) {
  double s = 0.0;
  for (int n : c.n) {
    for (int k = 1; k <= n; ++k) s += cfg.velocity.a * k + cfg.velocity.b;
  }
  return s;
}

/// Potential of the car-tax game.
inline double phi(const ActionProfile& p, const GameConfig& cfg, const Population& pop) {
  const Counts c = count(p, cfg.intervals);
  double s = preference_sum(p, pop) + congestion_sum(c, cfg);
  for (int r0 = 0; r0 < cfg.intervals; ++r0) {
    s += cfg.beta * (cfg.velocity.a * c.n[r0] + cfg.velocity.b) * G(cfg, c.m[r0]);
    for (int l = 1; l <= c.m[r0]; ++l) s -= cfg.velocity.a * cfg.beta * G(cfg, l - 1);
  }
  return s;
}

/// Potential of the truck-subsidy game.
inline double psi(const ActionProfile& p, const GameConfig& cfg, const Population& pop) {
  const Counts c = count(p, cfg.intervals);
  const double v0 = std::get<platoon::TruckSubsidy>(cfg.policy).v0;
  double s = preference_sum(p, pop) + congestion_sum(c, cfg);
  for (int r0 = 0; r0 < cfg.intervals; ++r0) s += cfg.beta * v0 * G(cfg, c.m[r0]);
  return s;
}

/// Joint strategy fictitious play, one agent and one interval at a time.
struct Jsfp {
  std::vector<std::vector<double>> car_mem;
  std::vector<std::vector<double>> truck_mem;
  ActionProfile profile;
  long t = 0;
  std::vector<std::vector<int>> truck_log;  // realized truck counts, one row per iteration
};

inline Jsfp jsfp_start(const GameConfig& cfg, const Population& pop, const ActionProfile& initial) {
  Jsfp s;
  s.profile = initial;
  for (const auto& car : pop.cars) {
    std::vector<double> row;
    for (int r = 1; r <= cfg.intervals; ++r) row.push_back(pen(car.penalty, Interval(r), car.preferred));
    s.car_mem.push_back(row);
  }
  for (const auto& truck : pop.trucks) {
    std::vector<double> row;
    for (int r = 1; r <= cfg.intervals; ++r) row.push_back(pen(truck.penalty, Interval(r), truck.preferred));
    s.truck_mem.push_back(row);
  }
  return s;
}

inline int first_max(const std::vector<double>& row) {
  int best = 0;
  for (int k = 1; k < static_cast<int>(row.size()); ++k) {
    if (row[k] > row[best]) best = k;
  }
  return best + 1;
}

inline Road road_at(long t, const GameConfig& cfg, const platoon::LearnerParams& params, const Jsfp& s) {
  Road road;
  for (const auto& pert : params.perturbations) {
    if (pert.iteration != t) continue;
    if (road.divisor.empty()) road.divisor.assign(cfg.intervals, 1.0);
    for (Interval r : pert.intervals) road.divisor[r.value() - 1] *= pert.velocity_divisor;
  }
  if (const auto* d = std::get_if<platoon::CarTaxDelayed>(&cfg.policy)) {
    if (t > d->delay) road.announced = s.truck_log[t - d->delay];
  }
  return road;
}

inline void jsfp_step(Jsfp& s, const GameConfig& cfg, const Population& pop, const platoon::LearnerParams& params,
                      const platoon::CounterRng& rng) {
  const double p = params.inertia.p;
  const double lambda = platoon::forgetting_weight(params.forgetting, s.t);
  const Road road = road_at(s.t, cfg, params, s);
  const ActionProfile before = s.profile;
  const std::size_t N = pop.cars.size();

  for (std::size_t i = 0; i < N; ++i) {
    const Interval cand(first_max(s.car_mem[i]));
    if (cand == before.cars[i]) continue;
    const double gain = car_u_at(i, cand, before, cfg, pop, road) - car_u(i, before, cfg, pop, road);
    if (gain > 0.0 && rng.uniform(s.t, i) < p) s.profile.cars[i] = cand;
  }
  for (std::size_t j = 0; j < pop.trucks.size(); ++j) {
    const Interval cand(first_max(s.truck_mem[j]));
    if (cand == before.trucks[j]) continue;
    const double gain = truck_u_at(j, cand, before, cfg, pop, road) - truck_u(j, before, cfg, pop, road);
    if (gain > 0.0 && rng.uniform(s.t, N + j) < p) s.profile.trucks[j] = cand;
  }

  for (std::size_t i = 0; i < N; ++i) {
    for (int r = 1; r <= cfg.intervals; ++r) {
      double& m = s.car_mem[i][r - 1];
      m = (1.0 - lambda) * m + lambda * car_u_at(i, Interval(r), s.profile, cfg, pop, road);
    }
  }
  for (std::size_t j = 0; j < pop.trucks.size(); ++j) {
    for (int r = 1; r <= cfg.intervals; ++r) {
      double& m = s.truck_mem[j][r - 1];
      m = (1.0 - lambda) * m + lambda * truck_u_at(j, Interval(r), s.profile, cfg, pop, road);
    }
  }
  s.truck_log.push_back(count(s.profile, cfg.intervals).m);
  ++s.t;
}

}  // namespace ref
