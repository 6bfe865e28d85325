#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "instances.hpp"
#include "json.hpp"
#include "platoon/error.hpp"
#include "platoon/metrics.hpp"
#include "platoon/scenario.hpp"

using namespace platoon;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::size_t lines(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("platoon_metrics_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("social cost is the velocity of the busiest interval") {
  const VelocityModel vm;
  CHECK(social_cost(Occupancy{{2525, 100, 7}, {0, 0, 0}}, vm) == doctest::Approx(57.1946).epsilon(1e-13));
  CHECK(social_cost(Occupancy{{1262, 1262, 1262}, {0, 0, 0}}, vm) == doctest::Approx(vm.at(1262)).epsilon(1e-15));
  CHECK(social_cost(Occupancy{{0, 0}, {0, 0}}, vm) == vm.b);
}

TEST_CASE("optimal social cost spreads vehicles as evenly as possible") {
  const VelocityModel vm;
  CHECK(optimal_social_cost(10000, 100, 8, vm) == doctest::Approx(71.0766).epsilon(1e-13));
  CHECK(std::abs(optimal_social_cost(10000, 100, 8, vm) - 71.0766) <= 1e-4);
  CHECK(optimal_social_cost(0, 0, 8, vm) == vm.b);
  CHECK(optimal_social_cost(6, 2, 8, vm) == vm.a + vm.b);
  CHECK(optimal_social_cost(8, 0, 4, vm) == doctest::Approx(2 * vm.a + vm.b).epsilon(1e-15));
  CHECK_THROWS_AS(optimal_social_cost(8, 0, 0, vm), ValidationError);
}

TEST_CASE("no profile beats the optimum") {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto in = fixtures::random_instance(seed, CarTax{}, 40, 10, 8);
    const double s = social_cost(occupancy(in.profile, in.cfg.intervals), in.cfg.velocity);
    const double opt = optimal_social_cost(in.pop.cars.size(), in.pop.trucks.size(), in.cfg.intervals, in.cfg.velocity);
    CHECK(s <= opt + 1e-9);
    if (s > 0) CHECK(opt / s >= 1 - 1e-12);
  }
}

TEST_CASE("emitted files: row counts, headers and determinism") {
  GameConfig cfg;
  cfg.intervals = 2;
  cfg.velocity = {-1.0, 30.0};
  Population pop;
  pop.cars.assign(6, CarAgent{Interval(1), Penalty{PenaltyShape::Absolute, -1.0}, 1.0});
  pop.trucks.assign(2, TruckAgent{Interval(2), Penalty{PenaltyShape::Absolute, -1.0}});
  LearnerParams params;
  params.max_iterations = 2;
  const Trace trace = run(cfg, pop, params, 4);
  REQUIRE(trace.iterations_run() == 2);
  const Summary summary = summarize(trace, cfg, pop);

  const fs::path a = scratch("a");
  const fs::path b = scratch("b");
  emit(trace, summary, a);
  emit(run(cfg, pop, params, 4), summarize(run(cfg, pop, params, 4), cfg, pop), b);

  const std::string occ = slurp(a / "occupancy.csv");
  CHECK(occ.rfind("t,r,n_r,m_r\n", 0) == 0);
  CHECK(lines(occ) == 1 + 4);
  const std::string trucks = slurp(a / "truck_occupancy.csv");
  CHECK(trucks.rfind("t,r,m_r\n", 0) == 0);
  CHECK(lines(trucks) == 1 + 4);
  for (const char* name : {"occupancy.csv", "truck_occupancy.csv", "summary.json"}) {
    CHECK(slurp(a / name) == slurp(b / name));
  }

  const auto doc = nlohmann::json::parse(slurp(a / "summary.json"));
  CHECK(doc["iterations"] == 2);
  CHECK(doc["converged"] == false);
  CHECK(doc["s_optimal"].get<double>() == doctest::Approx(26.0).epsilon(1e-15));
  CHECK(doc["final_occupancy"]["n"].size() == 2);
  CHECK(doc["value_of_time_groups"].size() == 1);
  CHECK(doc.contains("deviation") == !summary.certified_nash);

  const fs::path none = scratch("none");
  emit(trace, summary, none, EmitOptions{false, true, false});
  CHECK(fs::exists(none / "summary.json"));
  CHECK_FALSE(fs::exists(none / "occupancy.csv"));
  CHECK_FALSE(fs::exists(none / "truck_occupancy.csv"));
  for (const auto& dir : {a, b, none}) fs::remove_all(dir);
}

TEST_CASE("summary reports ratios and value-of-time shifts") {
  ScenarioSpec spec = ScenarioSpec::paper_default();
  spec.cars = 400;
  spec.trucks = 8;
  spec.value_of_time = ValueOfTimeGroups::heterogeneous();
  GameConfig cfg = spec.game;
  cfg.velocity = {-0.4, 84.9696};
  const Population pop = sample_population(spec, 3);
  LearnerParams params = spec.learner;
  params.max_iterations = 3000;
  const Trace trace = run(cfg, pop, params, 3);
  const Summary s = summarize(trace, cfg, pop);
  CHECK(s.ratio_nash == doctest::Approx(s.s_optimal / s.s_nash));
  CHECK(s.ratio_preference == doctest::Approx(s.s_optimal / s.s_preference));
  CHECK(s.ratio_nash >= 1 - 1e-12);
  CHECK(s.ratio_preference >= 1 - 1e-12);
  REQUIRE(s.groups.size() == 3);
  CHECK(s.groups[0].delta == 0.19);
  CHECK(s.groups[1].delta == 1.0);
  CHECK(s.groups[2].delta == 3.37);
  std::size_t cars = 0;
  for (const auto& g : s.groups) {
    cars += g.cars;
    CHECK(std::accumulate(g.preferred.begin(), g.preferred.end(), std::size_t{0}) == g.cars);
    CHECK(std::accumulate(g.final.begin(), g.final.end(), std::size_t{0}) == g.cars);
    CHECK(g.moved <= g.cars);
  }
  CHECK(cars == pop.cars.size());
  CHECK(s.max_truck_concentration ==
        *std::max_element(s.final_occupancy.trucks.begin(), s.final_occupancy.trucks.end()));
}

TEST_CASE("emit reports unwritable directories") {
  const fs::path blocker = fs::temp_directory_path() / "platoon_metrics_blocker";
  fs::remove_all(blocker);
  std::ofstream(blocker) << "file";
  Trace trace;
  Summary summary;
  CHECK_THROWS_AS(emit(trace, summary, blocker / "sub"), IoError);
  fs::remove(blocker);
}
