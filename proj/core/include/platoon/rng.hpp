#pragma once

#include <cstdint>
#include <limits>

namespace platoon {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Maps the top 53 bits of a word onto [0, 1).
constexpr double unit_interval(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Sequential generator for population sampling. Satisfies UniformRandomBitGenerator,
/// but callers use unit_interval() instead of <random> distributions so that draws are
/// identical across standard library implementations.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  constexpr double uniform() { return unit_interval((*this)()); }

 private:
  std::uint64_t state_;
};

/// Stateless counter-based generator: the draw for (iteration, agent) is a pure function
/// of the seed, so decisions can be evaluated in any order and still reproduce bit for bit.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed) : seed_(mix64(seed)) {}

  constexpr std::uint64_t bits(std::uint64_t iteration, std::uint64_t agent) const {
    return mix64(mix64(seed_ ^ mix64(iteration)) + agent);
  }

  constexpr double uniform(std::uint64_t iteration, std::uint64_t agent) const {
    return unit_interval(bits(iteration, agent));
  }

  /// Derives an independent sequential stream, e.g. one per sampled attribute.
  constexpr SplitMix64 stream(std::uint64_t id) const { return SplitMix64(mix64(seed_ + mix64(id))); }

 private:
  std::uint64_t seed_;
};

}  // namespace platoon
