#include "platoon/potential.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "platoon/error.hpp"
#include "platoon/rng.hpp"

namespace platoon {

namespace {

// Neumaier-compensated running sum. Keeps full-scale potentials (~1e6) accurate to a few
// ulps so that potential differences can be compared with utility differences at 1e-9.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

void check_kind(PotentialKind kind, const GameConfig& cfg) {
  if (kind == PotentialKind::PhiCarTax && !std::holds_alternative<CarTax>(cfg.policy)) {
    throw PolicyError("the car-tax potential requires the car_tax policy, got " + policy_name(cfg.policy));
  }
  if (kind == PotentialKind::PsiTruckSubsidy && !std::holds_alternative<TruckSubsidy>(cfg.policy)) {
    throw PolicyError("the truck-subsidy potential requires the truck_subsidy policy, got " + policy_name(cfg.policy));
  }
}

}  // namespace

PotentialParts potential_parts(PotentialKind kind, const ActionProfile& profile, const GameConfig& cfg,
                               const Population& pop) {
  check_kind(kind, cfg);
  if (profile.cars.size() != pop.cars.size() || profile.trucks.size() != pop.trucks.size()) {
    throw InvalidProfile("profile does not match the population");
  }
  const Occupancy occ = occupancy(profile, cfg.intervals);
  const double a = cfg.velocity.a;
  const double b = cfg.velocity.b;

  PotentialParts parts;

  CompensatedSum preference;
  for (std::size_t i = 0; i < pop.cars.size(); ++i) {
    preference.add(pop.cars[i].penalty(profile.cars[i], pop.cars[i].preferred));
  }
  for (std::size_t j = 0; j < pop.trucks.size(); ++j) {
    preference.add(pop.trucks[j].penalty(profile.trucks[j], pop.trucks[j].preferred));
  }
  parts.preference = preference.value();

  // sum_{k=1}^{n} (a k + b) = a n(n+1)/2 + b n; n(n+1)/2 is an exact integer in double.
  CompensatedSum congestion;
  for (int n : occ.vehicles) {
    const double count = n;
    congestion.add(a * (count * (count + 1.0) / 2.0));
    congestion.add(b * count);
  }
  parts.congestion = congestion.value();

  CompensatedSum platoon;
  CompensatedSum correction;
  if (kind == PotentialKind::PhiCarTax) {
    for (std::size_t s = 0; s < occ.vehicles.size(); ++s) {
      const int m = occ.trucks[s];
      platoon.add(cfg.beta * cfg.velocity.at(occ.vehicles[s]) * cfg.benefit.cumulative(m));
      double nested = 0.0;  // sum_{l=1}^{m} sum_{k=1}^{l-1} g(k), integer-valued
      for (int l = 1; l <= m; ++l) nested += cfg.benefit.cumulative(l - 1);
      correction.add(-a * cfg.beta * nested);
    }
  } else {
    const double v0 = std::get<TruckSubsidy>(cfg.policy).v0;
    double trucks_sum = 0.0;
    for (int m : occ.trucks) trucks_sum += cfg.benefit.cumulative(m);
    platoon.add(cfg.beta * v0 * trucks_sum);
  }
  parts.platoon = platoon.value();
  parts.correction = correction.value();
  return parts;
}

double potential_value(PotentialKind kind, const ActionProfile& profile, const GameConfig& cfg,
                       const Population& pop) {
  const PotentialParts parts = potential_parts(kind, profile, cfg, pop);
  CompensatedSum total;
  total.add(parts.preference);
  total.add(parts.congestion);
  total.add(parts.platoon);
  total.add(parts.correction);
  return total.value();
}

namespace {

double agent_utility(AgentId agent, const ActionProfile& profile, const GameConfig& cfg, const Population& pop) {
  return agent.kind == AgentId::Kind::Car ? car_utility(agent.index, profile, cfg, pop)
                                          : truck_utility(agent.index, profile, cfg, pop);
}

ActionProfile moved(ActionProfile profile, AgentId agent, Interval to) {
  if (agent.kind == AgentId::Kind::Car) {
    profile.cars.at(agent.index) = to;
  } else {
    profile.trucks.at(agent.index) = to;
  }
  return profile;
}

}  // namespace

MoveDeltas delta_move(PotentialKind kind, const ActionProfile& profile, AgentId mover, Interval to,
                      const GameConfig& cfg, const Population& pop) {
  const ActionProfile after = moved(profile, mover, to);
  occupancy(after, cfg.intervals);  // range check on the target
  MoveDeltas d;
  d.potential = potential_value(kind, after, cfg, pop) - potential_value(kind, profile, cfg, pop);
  d.utility = agent_utility(mover, after, cfg, pop) - agent_utility(mover, profile, cfg, pop);
  return d;
}

CrossDifferenceReport cross_difference(const ActionProfile& profile, std::size_t car, std::size_t truck,
                                       Interval car_to, Interval truck_to, const GameConfig& cfg,
                                       const Population& pop) {
  CrossDifferenceReport report;
  report.car = car;
  report.truck = truck;
  report.car_from = profile.cars.at(car);
  report.car_to = car_to;
  report.truck_from = profile.trucks.at(truck);
  report.truck_to = truck_to;

  auto truck_value = [&](const ActionProfile& p) { return truck_utility(truck, p, cfg, pop); };
  auto car_value = [&](const ActionProfile& p) { return car_utility(car, p, cfg, pop); };
  // Delta_x Delta_z V: difference in z first, then in x.
  report.lhs = mixed_difference(truck_value, profile, car, truck, car_to, truck_to, /*car_first=*/true);
  report.rhs = mixed_difference(car_value, profile, car, truck, car_to, truck_to, /*car_first=*/false);
  report.mismatch = report.lhs - report.rhs;
  return report;
}

double cross_difference_closed_form(const ActionProfile& profile, std::size_t car, std::size_t truck,
                                    Interval car_to, Interval truck_to, const GameConfig& cfg) {
  const Interval z = profile.cars.at(car);
  const Interval x = profile.trucks.at(truck);
  auto ind = [](Interval p, Interval q) { return p == q ? 1.0 : 0.0; };
  const double A = ind(x, z) - ind(x, car_to);
  const double B = ind(truck_to, z) - ind(truck_to, car_to);

  const Occupancy before = occupancy(profile, cfg.intervals);
  ActionProfile shifted = profile;
  shifted.trucks[truck] = truck_to;
  const Occupancy after = occupancy(shifted, cfg.intervals);
  const double g_from = cfg.benefit(before.trucks_at(x));
  const double g_to = cfg.benefit(after.trucks_at(truck_to));
  return cfg.velocity.a * cfg.beta * (A * g_from - B * g_to);
}

std::uint64_t four_cycle_count(std::size_t agents, int intervals) {
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
  if (agents < 2 || intervals < 2) return 0;
  const auto r = static_cast<std::uint64_t>(intervals);
  auto mul = [](std::uint64_t x, std::uint64_t y) { return (y != 0 && x > kMax / y) ? kMax : x * y; };
  std::uint64_t profiles = 1;
  for (std::size_t k = 0; k < agents; ++k) profiles = mul(profiles, r);
  const std::uint64_t pairs = static_cast<std::uint64_t>(agents) * (agents - 1) / 2;
  return mul(mul(profiles, pairs), mul(r - 1, r - 1));
}

namespace {

void set_action(ActionProfile& p, AgentId agent, Interval r) {
  if (agent.kind == AgentId::Kind::Car) {
    p.cars[agent.index] = r;
  } else {
    p.trucks[agent.index] = r;
  }
}

}  // namespace

double four_cycle_sum(const GameConfig& cfg, const Population& pop, const ActionProfile& base, AgentId first,
                      Interval first_to, AgentId second, Interval second_to) {
  auto u = [&](AgentId agent, const ActionProfile& p) { return agent_utility(agent, p, cfg, pop); };
  ActionProfile p10 = base;
  set_action(p10, first, first_to);
  ActionProfile p11 = p10;
  set_action(p11, second, second_to);
  ActionProfile p01 = base;
  set_action(p01, second, second_to);
  return (u(first, p10) - u(first, base)) + (u(second, p11) - u(second, p10)) + (u(first, p01) - u(first, p11)) +
         (u(second, base) - u(second, p01));
}

PotentialVerdict exact_potential_exists(const GameConfig& cfg, const Population& pop, std::uint64_t max_cycles) {
  cfg.validate();
  const std::size_t agents = pop.size();
  const std::uint64_t total = four_cycle_count(agents, cfg.intervals);
  if (total > max_cycles) {
    throw SizeError("four-cycle enumeration needs " + std::to_string(total) + " cycles, guard is " +
                    std::to_string(max_cycles));
  }

  auto agent_at = [&](std::size_t k) {
    return k < pop.cars.size() ? AgentId::car(k) : AgentId::truck(k - pop.cars.size());
  };

  PotentialVerdict verdict;
  ActionProfile base{std::vector<Interval>(pop.cars.size(), Interval(1)),
                     std::vector<Interval>(pop.trucks.size(), Interval(1))};
  std::vector<int> digits(agents, 1);
  while (true) {
    for (std::size_t k = 0; k < agents; ++k) {
      for (std::size_t l = k + 1; l < agents; ++l) {
        const AgentId first = agent_at(k);
        const AgentId second = agent_at(l);
        const Interval a0 = current_action(base, first);
        const Interval b0 = current_action(base, second);
        for (int a1 = 1; a1 <= cfg.intervals; ++a1) {
          if (a1 == a0.value()) continue;
          for (int b1 = 1; b1 <= cfg.intervals; ++b1) {
            if (b1 == b0.value()) continue;
            const double sum = four_cycle_sum(cfg, pop, base, first, Interval(a1), second, Interval(b1));
            ++verdict.cycles_checked;
            if (std::abs(sum) > kCycleTolerance) {
              verdict.exists = false;
              verdict.counterexample = FourCycle{base, first, Interval(a1), second, Interval(b1), sum};
              return verdict;
            }
          }
        }
      }
    }
    // Next base profile, odometer order over agents.
    std::size_t pos = 0;
    while (pos < agents && digits[pos] == cfg.intervals) {
      digits[pos] = 1;
      set_action(base, agent_at(pos), Interval(1));
      ++pos;
    }
    if (pos == agents) break;
    ++digits[pos];
    set_action(base, agent_at(pos), Interval(digits[pos]));
  }
  verdict.exists = true;
  return verdict;
}

PotentialVerdict sample_four_cycles(const GameConfig& cfg, const Population& pop, std::uint64_t trials,
                                    std::uint64_t seed) {
  cfg.validate();
  PotentialVerdict verdict;
  verdict.exists = true;
  const std::size_t agents = pop.size();
  if (agents < 2) return verdict;
  SplitMix64 rng = CounterRng(seed).stream(0x4c7c);
  const auto r = static_cast<std::uint64_t>(cfg.intervals);
  auto pick = [&](std::uint64_t n) { return static_cast<std::size_t>(rng.uniform() * static_cast<double>(n)); };
  auto agent_at = [&](std::size_t k) {
    return k < pop.cars.size() ? AgentId::car(k) : AgentId::truck(k - pop.cars.size());
  };
  auto other_interval = [&](Interval from) {
    const int shift = 1 + static_cast<int>(pick(r - 1));
    return Interval((from.value() - 1 + shift) % cfg.intervals + 1);
  };
  ActionProfile base{std::vector<Interval>(pop.cars.size()), std::vector<Interval>(pop.trucks.size())};
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    for (auto& z : base.cars) z = Interval::from_slot(pick(r));
    for (auto& x : base.trucks) x = Interval::from_slot(pick(r));
    const std::size_t k = pick(agents);
    std::size_t l = pick(agents - 1);
    if (l >= k) ++l;
    const AgentId first = agent_at(k);
    const AgentId second = agent_at(l);
    const Interval a1 = other_interval(current_action(base, first));
    const Interval b1 = other_interval(current_action(base, second));
    const double sum = four_cycle_sum(cfg, pop, base, first, a1, second, b1);
    ++verdict.cycles_checked;
    if (std::abs(sum) > kCycleTolerance) {
      verdict.exists = false;
      verdict.counterexample = FourCycle{base, first, a1, second, b1, sum};
      return verdict;
    }
  }
  return verdict;
}

}  // namespace platoon
