// Full-scale microbenchmarks: N=10000 cars, M=100 trucks, R=8.

#include <benchmark/benchmark.h>

#include "platoon/equilibrium.hpp"
#include "platoon/learning.hpp"
#include "platoon/potential.hpp"
#include "platoon/scenario.hpp"

using namespace platoon;

namespace {

struct PaperScale {
  ScenarioSpec spec = ScenarioSpec::paper_default();
  Population pop = sample_population(spec, 1);
  ActionProfile profile = preferred_profile(pop);
};

const PaperScale& paper() {
  static const PaperScale instance;
  return instance;
}

void BM_FrozenRoad(benchmark::State& state) {
  const auto& p = paper();
  const Occupancy occ = occupancy(p.profile, p.spec.game.intervals);
  for (auto _ : state) {
    FrozenRoad road(p.spec.game, occ);
    benchmark::DoNotOptimize(road);
  }
}
BENCHMARK(BM_FrozenRoad);

void BM_IsNash(benchmark::State& state) {
  const auto& p = paper();
  for (auto _ : state) benchmark::DoNotOptimize(is_nash(p.profile, p.spec.game, p.pop));
}
BENCHMARK(BM_IsNash)->Unit(benchmark::kMicrosecond);

void BM_PotentialValue(benchmark::State& state) {
  const auto& p = paper();
  for (auto _ : state) {
    benchmark::DoNotOptimize(potential_value(PotentialKind::PhiCarTax, p.profile, p.spec.game, p.pop));
  }
}
BENCHMARK(BM_PotentialValue)->Unit(benchmark::kMicrosecond);

void BM_JsfpStep(benchmark::State& state) {
  const auto& p = paper();
  const CounterRng rng(1);
  JsfpState s = jsfp_init(p.spec.game, p.pop, p.profile);
  for (auto _ : state) benchmark::DoNotOptimize(jsfp_step(s, p.spec.game, p.pop, p.spec.learner, rng));
}
BENCHMARK(BM_JsfpStep)->Unit(benchmark::kMicrosecond);

void BM_AsfpStep(benchmark::State& state) {
  const auto& p = paper();
  GameConfig cfg = p.spec.game;
  cfg.policy = TruckSubsidy{85.0};
  LearnerParams params = p.spec.learner;
  params.algorithm = Algorithm::Asfp;
  const CounterRng rng(1);
  AsfpState s = asfp_init(cfg, p.pop, p.profile);
  for (auto _ : state) benchmark::DoNotOptimize(asfp_step(s, cfg, p.pop, params, rng));
}
BENCHMARK(BM_AsfpStep)->Unit(benchmark::kMicrosecond);

void BM_FullRun(benchmark::State& state) {
  const auto& p = paper();
  for (auto _ : state) benchmark::DoNotOptimize(run(p.spec.game, p.pop, p.spec.learner, 1));
}
BENCHMARK(BM_FullRun)->Unit(benchmark::kMillisecond)->Iterations(3);

}  // namespace
BENCHMARK_MAIN();
