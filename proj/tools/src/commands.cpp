#include "platoon_cli/commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "platoon/error.hpp"
#include "platoon/learning.hpp"
#include "platoon/metrics.hpp"
#include "platoon/potential.hpp"
#include "platoon/rng.hpp"
#include "platoon/scenario.hpp"

namespace platoon::cli {

namespace {

namespace fs = std::filesystem;

struct Loaded {
  ScenarioSpec spec;
  Population pop;
  std::uint64_t seed = 0;
};

Loaded load(const std::string& path, std::optional<std::uint64_t> seed, std::ostream& err) {
  std::vector<std::string> warnings;
  Loaded l;
  try {
    l.spec = load_scenario(path, &warnings);
  } catch (const ScenarioError& e) {
    throw Error(path + ": " + e.what());
  }
  for (const auto& w : warnings) err << "warning: " << path << ": " << w << "\n";
  l.seed = seed.value_or(l.spec.seed);
  l.pop = sample_population(l.spec, l.seed);
  for (const auto& w : scenario_warnings(l.spec, l.pop)) err << "warning: " << path << ": " << w << "\n";
  return l;
}

fs::path default_out(const ScenarioSpec& spec) {
  if (const char* env = std::getenv("PLATOON_GAME_OUT"); env && *env) return env;
  return spec.output.directory;
}

std::string show(const std::vector<int>& v) {
  std::ostringstream s;
  s << "[";
  for (std::size_t k = 0; k < v.size(); ++k) s << (k ? " " : "") << v[k];
  s << "]";
  return s.str();
}

std::string show(const ActionProfile& p) {
  std::ostringstream s;
  s << "z=(";
  for (std::size_t i = 0; i < p.cars.size(); ++i) s << (i ? "," : "") << p.cars[i].value();
  s << ") x=(";
  for (std::size_t j = 0; j < p.trucks.size(); ++j) s << (j ? "," : "") << p.trucks[j].value();
  s << ")";
  return s.str();
}

void print_cycle(const FourCycle& c, std::ostream& out) {
  out << "  base " << show(c.base) << "\n"
      << "  " << to_string(c.first) << " -> " << c.first_to.value() << ", " << to_string(c.second) << " -> "
      << c.second_to.value() << ", " << to_string(c.first) << " back, " << to_string(c.second) << " back\n"
      << "  cycle sum " << std::setprecision(17) << c.cycle_sum << "\n";
}

// ---------------------------------------------------------------- run

struct RunOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string algorithm;
  std::optional<long> max_iters;
  std::vector<std::string> emit{"csv", "json"};
};

struct RunOutcome {
  Trace trace;
  Summary summary;
};

RunOutcome execute(const ScenarioSpec& spec, const Population& pop, std::uint64_t seed) {
  RunOutcome o;
  o.trace = run(spec.game, pop, spec.learner, seed);
  o.summary = summarize(o.trace, spec.game, pop);
  return o;
}

int cmd_run(const RunOptions& opt, std::ostream& out, std::ostream& err) {
  Loaded l = load(opt.config, opt.seed, err);
  if (!opt.algorithm.empty()) l.spec.learner.algorithm = opt.algorithm == "asfp" ? Algorithm::Asfp : Algorithm::Jsfp;
  if (opt.max_iters) l.spec.learner.max_iterations = *opt.max_iters;
  l.spec.validate();

  const RunOutcome o = execute(l.spec, l.pop, l.seed);
  EmitOptions emit;
  emit.csv = std::find(opt.emit.begin(), opt.emit.end(), "csv") != opt.emit.end();
  emit.json = std::find(opt.emit.begin(), opt.emit.end(), "json") != opt.emit.end();
  emit.truck_csv = emit.csv && l.spec.output.truck_occupancy;
  const fs::path dir = opt.out.empty() ? default_out(l.spec) : fs::path(opt.out);
  platoon::emit(o.trace, o.summary, dir, emit);

  const Summary& s = o.summary;
  out << to_string(l.spec.learner.algorithm) << " seed " << l.seed << ": " << s.iterations << " iterations, "
      << (s.converged ? "certified pure Nash" : "not certified") << "\n"
      << std::setprecision(6) << std::fixed << "  S_nash " << s.s_nash << "  S_pref " << s.s_preference
      << "  S_opt " << s.s_optimal << "\n"
      << "  ratio_nash " << s.ratio_nash << "  ratio_pref " << s.ratio_preference << "\n"
      << std::defaultfloat << "  n " << show(s.final_occupancy.vehicles) << "\n"
      << "  m " << show(s.final_occupancy.trucks) << "\n";
  if (s.groups.size() > 1) {
    for (const auto& g : s.groups) {
      out << "  delta " << g.delta << ": " << g.cars << " cars, " << g.moved << " moved, preferred "
          << show(g.preferred) << " final " << show(g.final) << "\n";
    }
  }
  if (!o.trace.certificate.is_nash && o.trace.certificate.witness) {
    const Deviation& d = *o.trace.certificate.witness;
    out << "  " << to_string(d.agent) << " gains " << d.gain << " by moving to " << d.to.value() << "\n";
  }
  out << "  wrote " << dir.string() << "\n";
  return s.converged ? kOk : kNotCertified;
}

// ---------------------------------------------------------------- verify-potential

struct VerifyOptions {
  std::string config;
  std::uint64_t trials = 10000;
  std::optional<std::uint64_t> seed;
  std::uint64_t guard = 10'000'000;
};

double max_potential_error(PotentialKind kind, const GameConfig& cfg, const Population& pop, std::uint64_t trials,
                           std::uint64_t seed) {
  SplitMix64 rng = CounterRng(seed).stream(0x7e51);
  const auto r = static_cast<std::uint64_t>(cfg.intervals);
  auto pick = [&](std::uint64_t n) { return static_cast<std::size_t>(rng.uniform() * static_cast<double>(n)); };
  ActionProfile profile{std::vector<Interval>(pop.cars.size()), std::vector<Interval>(pop.trucks.size())};
  double worst = 0.0;
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    for (auto& z : profile.cars) z = Interval::from_slot(pick(r));
    for (auto& x : profile.trucks) x = Interval::from_slot(pick(r));
    const std::size_t k = pick(pop.size());
    const AgentId mover = k < pop.cars.size() ? AgentId::car(k) : AgentId::truck(k - pop.cars.size());
    const Interval from = current_action(profile, mover);
    const Interval to((from.value() + static_cast<int>(pick(r - 1))) % cfg.intervals + 1);
    worst = std::max(worst, std::abs(delta_move(kind, profile, mover, to, cfg, pop).mismatch()));
  }
  return worst;
}

int cmd_verify(const VerifyOptions& opt, std::ostream& out, std::ostream& err) {
  const Loaded l = load(opt.config, opt.seed, err);
  const GameConfig& cfg = l.spec.game;
  if (l.pop.size() == 0) {
    out << "empty population: every potential is trivially exact\n";
    return kOk;
  }
  std::optional<PotentialKind> kind;
  GameConfig checked = cfg;
  if (std::holds_alternative<CarTax>(cfg.policy)) {
    kind = PotentialKind::PhiCarTax;
  } else if (std::holds_alternative<TruckSubsidy>(cfg.policy)) {
    kind = PotentialKind::PsiTruckSubsidy;
  } else if (cfg.beta == 0.0) {
    // Without platooning the car tax vanishes, so Phi is the plain congestion potential.
    kind = PotentialKind::PhiCarTax;
    checked.policy = CarTax{};
  }

  if (kind) {
    const double worst = max_potential_error(*kind, checked, l.pop, opt.trials, l.seed);
    const char* name = *kind == PotentialKind::PhiCarTax ? "Phi" : "Psi";
    out << policy_name(cfg.policy) << ", beta " << cfg.beta << ": " << opt.trials << " unilateral deviations, max |d"
        << name << " - dU| = " << std::setprecision(3) << std::scientific << worst << std::defaultfloat << "\n";
    const bool exact = worst <= 1e-9;
    out << (exact ? "potential exists" : "potential mismatch exceeds 1e-9") << "\n";
    return exact ? kOk : kNotCertified;
  }

  // Unpriced platooning: look for a four-cycle that does not close.
  PotentialVerdict verdict;
  if (four_cycle_count(l.pop.size(), cfg.intervals) <= opt.guard) {
    verdict = exact_potential_exists(cfg, l.pop, opt.guard);
    out << "exhaustive four-cycle check, " << verdict.cycles_checked << " cycles\n";
  } else {
    verdict = sample_four_cycles(cfg, l.pop, opt.trials, l.seed);
    out << "sampled four-cycle check, " << verdict.cycles_checked << " cycles\n";
  }
  if (!verdict.exists) {
    out << "no exact potential: four-cycle does not close\n";
    print_cycle(*verdict.counterexample, out);
    return kOk;
  }
  out << "no violating four-cycle found\n";
  return kNotCertified;
}

// ---------------------------------------------------------------- sweep

struct SweepOptions {
  std::string config;
  std::string param;
  std::vector<std::string> values;
  std::vector<std::string> seeds;
  std::string out;
};

std::vector<std::uint64_t> parse_seeds(const std::vector<std::string>& items) {
  std::vector<std::uint64_t> seeds;
  for (const auto& item : items) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      seeds.push_back(std::stoull(item));
      continue;
    }
    const std::uint64_t lo = std::stoull(item.substr(0, dots));
    const std::uint64_t hi = std::stoull(item.substr(dots + 2));
    if (hi < lo) throw ValidationError("empty seed range " + item);
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
  }
  return seeds;
}

void apply(ScenarioSpec& spec, const std::string& param, const std::string& value) {
  std::size_t used = 0;
  const double x = std::stod(value, &used);
  if (used != value.size()) throw ValidationError("not a number: " + value);
  if (param == "beta") {
    spec.game.beta = x;
  } else if (param == "equipment_ratio") {
    spec.equipment_ratio = x;
  } else {
    if (x != std::floor(x)) throw ValidationError("delay must be an integer: " + value);
    spec.game.policy = CarTaxDelayed{static_cast<int>(x)};
  }
  spec.validate();
}

int cmd_sweep(const SweepOptions& opt, std::ostream& out, std::ostream& err) {
  const Loaded base = load(opt.config, std::nullopt, err);
  const std::vector<std::uint64_t> seeds = parse_seeds(opt.seeds);
  const fs::path dir = opt.out.empty() ? default_out(base.spec) : fs::path(opt.out);

  std::vector<ScenarioSpec> specs;
  for (const auto& value : opt.values) {
    ScenarioSpec spec = base.spec;
    try {
      apply(spec, opt.param, value);
    } catch (const std::invalid_argument&) {
      throw ValidationError("not a number: " + value);
    }
    specs.push_back(std::move(spec));
  }

  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::ofstream csv(dir / "sweep.csv", std::ios::binary | std::ios::trunc);
  if (!csv) throw IoError("cannot open " + (dir / "sweep.csv").string() + " for writing");
  csv << "param_value,seed,iterations,converged,s_nash,max_truck_concentration\n";
  csv << std::setprecision(17);

  for (std::size_t v = 0; v < specs.size(); ++v) {
    for (std::uint64_t seed : seeds) {
      const Population pop = sample_population(specs[v], seed);
      const RunOutcome o = execute(specs[v], pop, seed);
      const fs::path cell = dir / (opt.param + "=" + opt.values[v]) / ("seed=" + std::to_string(seed));
      EmitOptions emit;
      emit.truck_csv = specs[v].output.truck_occupancy;
      platoon::emit(o.trace, o.summary, cell, emit);
      csv << opt.values[v] << ',' << seed << ',' << o.summary.iterations << ',' << (o.summary.converged ? 1 : 0)
          << ',' << o.summary.s_nash << ',' << o.summary.max_truck_concentration << '\n';
      out << opt.param << "=" << opt.values[v] << " seed " << seed << ": " << o.summary.iterations
          << " iterations, " << (o.summary.converged ? "converged" : "not certified") << ", max m_r "
          << o.summary.max_truck_concentration << "\n";
    }
  }
  csv.close();
  if (!csv) throw IoError("write failed for " + (dir / "sweep.csv").string());
  out << "wrote " << (dir / "sweep.csv").string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------- oracle

struct OracleOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::uint64_t guard = 10'000'000;
};

int cmd_oracle(const OracleOptions& opt, std::ostream& out, std::ostream& err) {
  const Loaded l = load(opt.config, opt.seed, err);
  const PotentialVerdict verdict = exact_potential_exists(l.spec.game, l.pop, opt.guard);
  out << "N=" << l.pop.cars.size() << " M=" << l.pop.trucks.size() << " R=" << l.spec.game.intervals << ", "
      << policy_name(l.spec.game.policy) << ", beta " << l.spec.game.beta << ": " << verdict.cycles_checked
      << " four-cycles checked\n";
  if (verdict.exists) {
    out << "exact potential\n";
  } else {
    out << "no exact potential\n";
    print_cycle(*verdict.counterexample, out);
  }
  return kOk;
}

}  // namespace

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Car/truck departure-time congestion game with platooning"};
  app.name(args.empty() ? "platoon_game" : fs::path(args.front()).filename().string());
  app.require_subcommand(1);

  RunOptions run_opt;
  auto* run_cmd = app.add_subcommand("run", "Learn an equilibrium and write occupancy.csv and summary.json");
  run_cmd->add_option("--config", run_opt.config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--seed", run_opt.seed, "Seed for sampling and learning (default: the scenario's)");
  run_cmd->add_option("--out", run_opt.out, "Output directory (default: $PLATOON_GAME_OUT or the scenario's)");
  run_cmd->add_option("--algorithm", run_opt.algorithm, "Override the learner")->check(CLI::IsMember({"jsfp", "asfp"}));
  run_cmd->add_option("--max-iters", run_opt.max_iters, "Override the iteration budget")->check(CLI::NonNegativeNumber);
  run_cmd->add_option("--emit", run_opt.emit, "Outputs to write")
      ->delimiter(',')
      ->check(CLI::IsMember({"csv", "json"}));

  VerifyOptions verify_opt;
  auto* verify_cmd = app.add_subcommand("verify-potential", "Check potential exactness or its failure");
  verify_cmd->add_option("--config", verify_opt.config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  verify_cmd->add_option("--trials", verify_opt.trials, "Random deviations or four-cycles")->check(CLI::PositiveNumber);
  verify_cmd->add_option("--seed", verify_opt.seed, "Seed (default: the scenario's)");
  verify_cmd->add_option("--guard", verify_opt.guard, "Largest exhaustive four-cycle enumeration");

  SweepOptions sweep_opt;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run every (value, seed) cell and write sweep.csv");
  sweep_cmd->add_option("--config", sweep_opt.config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--param", sweep_opt.param, "Swept parameter")
      ->required()
      ->check(CLI::IsMember({"beta", "equipment_ratio", "delay"}));
  sweep_cmd->add_option("--values", sweep_opt.values, "Comma-separated values")->required()->delimiter(',');
  sweep_cmd->add_option("--seeds", sweep_opt.seeds, "Comma-separated seeds or ranges lo..hi")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--out", sweep_opt.out, "Output directory (default: $PLATOON_GAME_OUT or the scenario's)");

  OracleOptions oracle_opt;
  auto* oracle_cmd = app.add_subcommand("oracle", "Enumerate every four-cycle of a small game");
  oracle_cmd->add_option("--config", oracle_opt.config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  oracle_cmd->add_option("--seed", oracle_opt.seed, "Seed (default: the scenario's)");
  oracle_cmd->add_option("--guard", oracle_opt.guard, "Largest enumeration allowed");

  std::vector<std::string> rest(args.rbegin(), args.rend());
  if (!rest.empty()) rest.pop_back();
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << app.get_name() << ": " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(run_opt, out, err);
    if (verify_cmd->parsed()) return cmd_verify(verify_opt, out, err);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_opt, out, err);
    if (oracle_cmd->parsed()) return cmd_oracle(oracle_opt, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace platoon::cli
