#pragma once

#include <cstdint>
#include <optional>

#include "platoon/equilibrium.hpp"
#include "platoon/game.hpp"

namespace platoon {

/// PhiCarTax is the potential of the game in which cars pay the truck-dependent congestion
/// tax; PsiTruckSubsidy the potential of the game in which trucks receive the platooning
/// subsidy.
enum class PotentialKind { PhiCarTax, PsiTruckSubsidy };

/// Pieces of a potential, summed in this order. `correction` is zero for Psi.
struct PotentialParts {
  double preference = 0.0;  // sum of every agent's penalty
  double congestion = 0.0;  // sum_r sum_{k<=n_r} (a k + b)
  double platoon = 0.0;     // Phi: sum_r beta (a n_r + b) G(m_r); Psi: beta v0 sum_r G(m_r)
  double correction = 0.0;  // Phi: -a beta sum_r sum_{l<=m_r} G(l - 1)

  double total() const { return preference + congestion + platoon + correction; }
};

PotentialParts potential_parts(PotentialKind kind, const ActionProfile& profile, const GameConfig& cfg,
                               const Population& pop);

/// Throws PolicyError when the kind does not match the configured policy.
double potential_value(PotentialKind kind, const ActionProfile& profile, const GameConfig& cfg,
                       const Population& pop);

/// Potential and deviator-utility changes (after minus before) for one unilateral move.
/// Both sides are evaluated from scratch on the two profiles.
struct MoveDeltas {
  double potential = 0.0;
  double utility = 0.0;

  double mismatch() const { return potential - utility; }
};

MoveDeltas delta_move(PotentialKind kind, const ActionProfile& profile, AgentId mover, Interval to,
                      const GameConfig& cfg, const Population& pop);

struct CrossDifferenceReport {
  double lhs = 0.0;       // Delta_{x_j -> x'_j} Delta_{z_i -> z'_i} V_j
  double rhs = 0.0;       // Delta_{z_i -> z'_i} Delta_{x_j -> x'_j} U_i
  double mismatch = 0.0;  // lhs - rhs

  std::size_t car = 0;
  std::size_t truck = 0;
  Interval car_from, car_to, truck_from, truck_to;
};

/// Mixed second differences of the truck's and the car's utilities, read off the four
/// profile corners. A potential can only exist if the mismatch vanishes for every choice.
CrossDifferenceReport cross_difference(const ActionProfile& profile, std::size_t car, std::size_t truck,
                                       Interval car_to, Interval truck_to, const GameConfig& cfg,
                                       const Population& pop);

/// Closed form of the cross-difference mismatch without pricing:
///   a*beta*(A*g(m_{x_j}(x)) - B*g(m_{x'_j}(x')))
/// with A = [x_j = z_i] - [x_j = z'_i] and B = [x'_j = z_i] - [x'_j = z'_i].
double cross_difference_closed_form(const ActionProfile& profile, std::size_t car, std::size_t truck,
                                    Interval car_to, Interval truck_to, const GameConfig& cfg);

/// The second difference Delta_{z_i -> z'_i} Delta_{x_j -> x'_j} F for an arbitrary profile
/// function F, taken in either order; equal by construction, exposed for property tests.
template <class F>
double mixed_difference(F&& f, const ActionProfile& profile, std::size_t car, std::size_t truck, Interval car_to,
                        Interval truck_to, bool car_first) {
  ActionProfile zx = profile;
  ActionProfile zpx = profile;
  zpx.cars[car] = car_to;
  ActionProfile zxp = profile;
  zxp.trucks[truck] = truck_to;
  ActionProfile zpxp = zpx;
  zpxp.trucks[truck] = truck_to;
  if (car_first) return (f(zx) - f(zpx)) - (f(zxp) - f(zpxp));
  return (f(zx) - f(zxp)) - (f(zpx) - f(zpxp));
}

/// Closed path of four unilateral moves: `first` moves, `second` moves, `first` moves
/// back, `second` moves back. `cycle_sum` adds up each mover's utility change.
struct FourCycle {
  ActionProfile base;
  AgentId first;
  Interval first_to;
  AgentId second;
  Interval second_to;
  double cycle_sum = 0.0;
};

struct PotentialVerdict {
  bool exists = false;
  std::optional<FourCycle> counterexample;
  std::uint64_t cycles_checked = 0;
};

/// Sum of the movers' utility changes around one four-cycle; zero in a potential game.
double four_cycle_sum(const GameConfig& cfg, const Population& pop, const ActionProfile& base, AgentId first,
                      Interval first_to, AgentId second, Interval second_to);

/// Absolute tolerance on a four-cycle sum below which the cycle counts as closed.
inline constexpr double kCycleTolerance = 1e-12;

/// Number of four-cycles exact_potential_exists would enumerate, saturating at UINT64_MAX.
std::uint64_t four_cycle_count(std::size_t agents, int intervals);

/// Decides whether the game has an exact potential by checking that every four-cycle of
/// unilateral moves, from every base profile, sums to zero. Uses utility evaluations only.
/// Throws SizeError when the enumeration would exceed `max_cycles`.
PotentialVerdict exact_potential_exists(const GameConfig& cfg, const Population& pop,
                                        std::uint64_t max_cycles = 10'000'000);

/// Checks `trials` random four-cycles (uniform base profile, two distinct agents, new
/// intervals for both). A counterexample refutes a potential; `exists` only means none
/// was found.
PotentialVerdict sample_four_cycles(const GameConfig& cfg, const Population& pop, std::uint64_t trials,
                                    std::uint64_t seed);

}  // namespace platoon
