#include "platoon/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "platoon/error.hpp"

namespace platoon {

using nlohmann::json;

PreferenceDistribution PreferenceDistribution::paper_default() {
  const double twelfth = 1.0 / 12.0;
  return {{twelfth, 1.0 / 6.0, 0.25, 1.0 / 6.0, twelfth, twelfth, twelfth, twelfth}};
}

PreferenceDistribution PreferenceDistribution::point_mass(int intervals, Interval r) {
  PreferenceDistribution d{std::vector<double>(static_cast<std::size_t>(intervals), 0.0)};
  d.probabilities.at(r.slot()) = 1.0;
  return d;
}

void PreferenceDistribution::validate(int intervals) const {
  if (probabilities.size() != static_cast<std::size_t>(intervals)) {
    throw ValidationError("needs " + std::to_string(intervals) + " probabilities, got " +
                          std::to_string(probabilities.size()));
  }
  double sum = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0)) throw ValidationError("probabilities must be nonnegative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw ValidationError("probabilities sum to " + std::to_string(sum) + ", not 1");
}

Interval PreferenceDistribution::sample(double u) const {
  double cumulative = 0.0;
  std::size_t last = 0;
  for (std::size_t s = 0; s < probabilities.size(); ++s) {
    if (probabilities[s] <= 0.0) continue;
    last = s;
    cumulative += probabilities[s];
    if (u < cumulative) return Interval::from_slot(s);
  }
  return Interval::from_slot(last);  // u beyond a sum that rounded below 1
}

void AlphaDistribution::validate() const {
  if (!(lower <= upper)) throw ValidationError("alpha lower bound exceeds upper bound");
  if (!(upper < 0.0)) throw ValidationError("alpha bounds must be negative");
}

ValueOfTimeGroups ValueOfTimeGroups::heterogeneous() {
  return {{{1.00, 0.754}, {3.37, 0.036}, {0.19, 0.210}}};
}

void ValueOfTimeGroups::validate() const {
  if (groups.empty()) throw ValidationError("at least one value-of-time group is required");
  double sum = 0.0;
  for (const auto& g : groups) {
    if (!(g.delta > 0.0)) throw ValidationError("value of time must be positive");
    if (!(g.probability >= 0.0)) throw ValidationError("group probabilities must be nonnegative");
    sum += g.probability;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw ValidationError("group probabilities sum to " + std::to_string(sum) + ", not 1");
}

double ValueOfTimeGroups::sample(double u) const {
  double cumulative = 0.0;
  std::size_t last = 0;
  for (std::size_t k = 0; k < groups.size(); ++k) {
    if (groups[k].probability <= 0.0) continue;
    last = k;
    cumulative += groups[k].probability;
    if (u < cumulative) return groups[k].delta;
  }
  return groups[last].delta;
}

ScenarioSpec ScenarioSpec::paper_default() {
  ScenarioSpec spec;
  // 10100 vehicles in one interval would give a negative velocity; the experiment never gets close.
  spec.allow_negative_velocity = true;
  return spec;
}

std::size_t ScenarioSpec::truck_count() const {
  if (!equipment_ratio) return trucks;
  return static_cast<std::size_t>(std::llround(*equipment_ratio * static_cast<double>(cars + trucks)));
}

std::size_t ScenarioSpec::car_count() const { return cars + trucks - truck_count(); }

namespace {

template <class F>
void at_field(const std::string& field, F&& check) {
  try {
    check();
  } catch (const ValidationError& e) {
    throw ScenarioError(field, e.what());
  }
}

}  // namespace

void ScenarioSpec::validate() const {
  // Checked field by field so the error names the key, then as a whole.
  if (game.intervals < 2) throw ScenarioError("game.intervals", "need at least 2 intervals");
  at_field("game.velocity", [&] { game.velocity.validate(); });
  if (!(game.beta >= 0.0)) throw ScenarioError("game.beta", "platoon coefficient beta must be nonnegative");
  at_field("policy", [&] { game.validate(); });
  if (equipment_ratio && !(*equipment_ratio >= 0.0 && *equipment_ratio <= 1.0)) {
    throw ScenarioError("population.equipment_ratio", "must lie in [0, 1]");
  }
  at_field("population.preference", [&] { car_preference.validate(game.intervals); });
  if (truck_preference) at_field("population.truck_preference", [&] { truck_preference->validate(game.intervals); });
  at_field("population.alpha", [&] { alpha.validate(); });
  at_field("population.value_of_time", [&] { value_of_time.validate(); });
  at_field("learner", [&] { learner.validate(game.intervals); });
  if (learner.algorithm == Algorithm::Asfp && std::holds_alternative<CarTaxDelayed>(game.policy)) {
    throw ScenarioError("learner.algorithm", "asfp does not support the car_tax_delayed policy");
  }
  if (output.directory.empty()) throw ScenarioError("output.directory", "must not be empty");
  if (std::filesystem::path(output.directory).is_absolute()) {
    throw ScenarioError("output.directory", "must be a relative path");
  }
}

std::vector<std::string> scenario_warnings(const ScenarioSpec& spec, const Population& pop) {
  if (spec.allow_negative_velocity) return {};
  return scenario_warnings(spec.game, pop);
}

Population sample_population(const ScenarioSpec& spec, std::uint64_t seed) {
  spec.validate();
  const CounterRng rng(seed);
  SplitMix64 car_t = rng.stream(1);
  SplitMix64 car_alpha = rng.stream(2);
  SplitMix64 car_delta = rng.stream(3);
  SplitMix64 truck_t = rng.stream(4);
  SplitMix64 truck_alpha = rng.stream(5);

  const AlphaDistribution& a = spec.alpha;
  const PreferenceDistribution& truck_pref = spec.truck_preference ? *spec.truck_preference : spec.car_preference;
  Population pop;
  pop.cars.resize(spec.car_count());
  pop.trucks.resize(spec.truck_count());
  for (auto& car : pop.cars) {
    car.preferred = spec.car_preference.sample(car_t.uniform());
    car.penalty = Penalty{spec.penalty_shape, a.lower + (a.upper - a.lower) * car_alpha.uniform()};
    car.value_of_time = spec.value_of_time.sample(car_delta.uniform());
  }
  for (auto& truck : pop.trucks) {
    truck.preferred = truck_pref.sample(truck_t.uniform());
    truck.penalty = Penalty{spec.penalty_shape, a.lower + (a.upper - a.lower) * truck_alpha.uniform()};
  }
  return pop;
}

namespace {

// Reads one JSON object, tracking which keys were consumed so that the rest can be
// reported as unknown.
class Section {
 public:
  Section(const json& node, std::string path, std::vector<std::string>* warnings)
      : node_(node), path_(std::move(path)), warnings_(warnings) {
    if (!node_.is_object()) throw ScenarioError(path_.empty() ? "(document)" : path_, "must be an object");
  }

  Section(const Section&) = delete;
  Section& operator=(const Section&) = delete;

  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0 || !warnings_) return;
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.count(key)) warnings_->push_back("unknown field " + field(key) + " ignored");
    }
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return node_.contains(key); }

  const json& get(const std::string& key) {
    seen_.insert(key);
    if (!node_.contains(key)) throw ScenarioError(field(key), "missing required field");
    return node_.at(key);
  }

  double number(const std::string& key) {
    const json& v = get(key);
    if (!v.is_number()) throw ScenarioError(field(key), "expected a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : mark(key, fallback); }

  std::uint64_t count(const std::string& key) {
    const json& v = get(key);
    if (!v.is_number_unsigned()) throw ScenarioError(field(key), "expected a nonnegative integer");
    return v.get<std::uint64_t>();
  }
  std::uint64_t count(const std::string& key, std::uint64_t fallback) {
    return has(key) ? count(key) : mark(key, fallback);
  }

  long integer(const std::string& key) {
    const json& v = get(key);
    if (!v.is_number_integer()) throw ScenarioError(field(key), "expected an integer");
    return v.get<long>();
  }
  long integer(const std::string& key, long fallback) { return has(key) ? integer(key) : mark(key, fallback); }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return mark(key, fallback);
    const json& v = get(key);
    if (!v.is_boolean()) throw ScenarioError(field(key), "expected true or false");
    return v.get<bool>();
  }

  std::string text(const std::string& key) {
    const json& v = get(key);
    if (!v.is_string()) throw ScenarioError(field(key), "expected a string");
    return v.get<std::string>();
  }
  std::string text(const std::string& key, const std::string& fallback) {
    return has(key) ? text(key) : mark(key, fallback);
  }

  std::vector<double> numbers(const std::string& key) {
    const json& v = get(key);
    if (!v.is_array()) throw ScenarioError(field(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (!v[k].is_number()) throw ScenarioError(field(key) + "[" + std::to_string(k) + "]", "expected a number");
      out.push_back(v[k].get<double>());
    }
    return out;
  }

  const json& array(const std::string& key) {
    const json& v = get(key);
    if (!v.is_array()) throw ScenarioError(field(key), "expected an array");
    return v;
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    if (!node_.contains(key)) throw ScenarioError(field(key), "missing required section");
    return Section(node_.at(key), field(key), warnings_);
  }

  std::vector<std::string>* warnings() const { return warnings_; }

 private:
  template <class T>
  T mark(const std::string& key, T value) {
    seen_.insert(key);
    return value;
  }

  const json& node_;
  std::string path_;
  std::vector<std::string>* warnings_;
  std::set<std::string> seen_;
};

PenaltyShape penalty_shape_from(const std::string& name, const std::string& field) {
  if (name == "absolute") return PenaltyShape::Absolute;
  if (name == "late_only") return PenaltyShape::LateOnly;
  throw ScenarioError(field, "unknown penalty shape \"" + name + "\" (absolute, late_only)");
}

std::string penalty_shape_name(PenaltyShape shape) { return shape == PenaltyShape::Absolute ? "absolute" : "late_only"; }

int int_in_range(long value, const std::string& field) {
  if (value < 1 || value > 1'000'000) throw ScenarioError(field, "out of range");
  return static_cast<int>(value);
}

void read_game(Section game, ScenarioSpec& spec) {
  spec.game.intervals = int_in_range(game.integer("intervals"), game.field("intervals"));
  {
    Section velocity = game.child("velocity");
    spec.game.velocity.a = velocity.number("a");
    spec.game.velocity.b = velocity.number("b");
  }
  spec.game.beta = game.number("beta");
  spec.allow_negative_velocity = game.boolean("allow_negative_velocity", false);
  if (game.has("benefit")) {
    Section benefit = game.child("benefit");
    const std::string shape = benefit.text("shape");
    if (shape == "linear") {
      spec.game.benefit = PlatoonBenefit::linear();
    } else if (shape == "thresholded") {
      spec.game.benefit = PlatoonBenefit::thresholded(int_in_range(benefit.integer("tau"), benefit.field("tau")));
    } else {
      throw ScenarioError(benefit.field("shape"), "unknown benefit shape \"" + shape + "\" (linear, thresholded)");
    }
  } else {
    spec.game.benefit = PlatoonBenefit::linear();
  }
}

void read_policy(Section policy, ScenarioSpec& spec) {
  const std::string kind = policy.text("kind");
  if (kind == "none") {
    spec.game.policy = NoPricing{};
  } else if (kind == "car_tax") {
    spec.game.policy = CarTax{};
  } else if (kind == "car_tax_delayed") {
    spec.game.policy = CarTaxDelayed{int_in_range(policy.integer("delay", 30), policy.field("delay"))};
  } else if (kind == "truck_subsidy") {
    spec.game.policy = TruckSubsidy{policy.number("v0", 85.0)};
  } else {
    throw ScenarioError(policy.field("kind"),
                        "unknown policy \"" + kind + "\" (none, car_tax, car_tax_delayed, truck_subsidy)");
  }
}

void read_population(Section population, ScenarioSpec& spec) {
  spec.cars = population.count("cars");
  spec.trucks = population.count("trucks");
  if (population.has("equipment_ratio")) {
    spec.equipment_ratio = population.number("equipment_ratio");
  } else {
    spec.equipment_ratio.reset();
  }
  spec.penalty_shape = penalty_shape_from(population.text("penalty_shape", "absolute"), population.field("penalty_shape"));
  if (population.has("preference")) {
    spec.car_preference = PreferenceDistribution{population.numbers("preference")};
  } else if (spec.game.intervals == 8) {
    spec.car_preference = PreferenceDistribution::paper_default();
  } else {
    throw ScenarioError(population.field("preference"), "missing required field (no default unless intervals = 8)");
  }
  if (population.has("truck_preference")) {
    spec.truck_preference = PreferenceDistribution{population.numbers("truck_preference")};
  }
  if (population.has("alpha")) {
    Section alpha = population.child("alpha");
    spec.alpha.lower = alpha.number("lower");
    spec.alpha.upper = alpha.number("upper");
  }
  if (population.has("value_of_time")) {
    const json& groups = population.array("value_of_time");
    spec.value_of_time.groups.clear();
    for (std::size_t k = 0; k < groups.size(); ++k) {
      Section group(groups[k], population.field("value_of_time") + "[" + std::to_string(k) + "]",
                    population.warnings());
      spec.value_of_time.groups.push_back(ValueOfTimeGroup{group.number("delta"), group.number("probability")});
    }
  }
}

void read_learner(Section learner, ScenarioSpec& spec) {
  LearnerParams& p = spec.learner;
  const std::string algorithm = learner.text("algorithm", "jsfp");
  if (algorithm == "jsfp") {
    p.algorithm = Algorithm::Jsfp;
  } else if (algorithm == "asfp") {
    p.algorithm = Algorithm::Asfp;
  } else {
    throw ScenarioError(learner.field("algorithm"), "unknown algorithm \"" + algorithm + "\" (jsfp, asfp)");
  }
  p.inertia.p = learner.number("inertia", 0.4);
  if (learner.has("forgetting")) {
    Section forgetting = learner.child("forgetting");
    const std::string schedule = forgetting.text("schedule");
    if (schedule == "constant") {
      p.forgetting = ConstantForgetting{forgetting.number("lambda")};
    } else if (schedule == "harmonic") {
      p.forgetting = HarmonicForgetting{};
    } else {
      throw ScenarioError(forgetting.field("schedule"), "unknown schedule \"" + schedule + "\" (constant, harmonic)");
    }
  }
  p.max_iterations = learner.integer("max_iterations", 1000);
  p.stability_window = learner.integer("stability_window", 50);
}

void read_perturbations(const json& list, const std::string& path, std::vector<std::string>* warnings,
                        ScenarioSpec& spec) {
  if (!list.is_array()) throw ScenarioError(path, "expected an array");
  spec.learner.perturbations.clear();
  for (std::size_t k = 0; k < list.size(); ++k) {
    Section item(list[k], path + "[" + std::to_string(k) + "]", warnings);
    Perturbation p;
    p.iteration = item.integer("iteration");
    for (double r : item.numbers("intervals")) {
      if (r != std::floor(r)) throw ScenarioError(item.field("intervals"), "expected integer intervals");
      p.intervals.emplace_back(static_cast<int>(r));
    }
    p.velocity_divisor = item.number("velocity_divisor");
    spec.learner.perturbations.push_back(std::move(p));
  }
}

json to_json(const PreferenceDistribution& d) { return json(d.probabilities); }

}  // namespace

ScenarioSpec parse_scenario(std::string_view text, std::vector<std::string>* warnings) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError("", std::string("malformed JSON: ") + e.what());
  }

  ScenarioSpec spec;
  {
    Section root(doc, "", warnings);
    read_game(root.child("game"), spec);
    read_policy(root.child("policy"), spec);
    read_population(root.child("population"), spec);
    if (root.has("learner")) read_learner(root.child("learner"), spec);
    if (root.has("perturbations")) read_perturbations(root.get("perturbations"), "perturbations", warnings, spec);
    if (root.has("output")) {
      Section output = root.child("output");
      spec.output.directory = output.text("directory", "out");
      spec.output.truck_occupancy = output.boolean("truck_occupancy", true);
    }
    spec.seed = root.count("seed", 1);
  }
  spec.validate();
  return spec;
}

std::string scenario_to_json(const ScenarioSpec& spec) {
  json doc;
  const GameConfig& g = spec.game;
  doc["game"]["intervals"] = g.intervals;
  doc["game"]["velocity"] = {{"a", g.velocity.a}, {"b", g.velocity.b}};
  doc["game"]["beta"] = g.beta;
  doc["game"]["allow_negative_velocity"] = spec.allow_negative_velocity;
  if (g.benefit.shape() == PlatoonBenefit::Shape::Linear) {
    doc["game"]["benefit"] = {{"shape", "linear"}};
  } else {
    doc["game"]["benefit"] = {{"shape", "thresholded"}, {"tau", g.benefit.threshold()}};
  }

  json& policy = doc["policy"];
  policy["kind"] = policy_name(g.policy);
  if (const auto* d = std::get_if<CarTaxDelayed>(&g.policy)) policy["delay"] = d->delay;
  if (const auto* s = std::get_if<TruckSubsidy>(&g.policy)) policy["v0"] = s->v0;

  json& population = doc["population"];
  population["cars"] = spec.cars;
  population["trucks"] = spec.trucks;
  if (spec.equipment_ratio) population["equipment_ratio"] = *spec.equipment_ratio;
  population["penalty_shape"] = penalty_shape_name(spec.penalty_shape);
  population["preference"] = to_json(spec.car_preference);
  if (spec.truck_preference) population["truck_preference"] = to_json(*spec.truck_preference);
  population["alpha"] = {{"lower", spec.alpha.lower}, {"upper", spec.alpha.upper}};
  population["value_of_time"] = json::array();
  for (const auto& group : spec.value_of_time.groups) {
    population["value_of_time"].push_back({{"delta", group.delta}, {"probability", group.probability}});
  }

  const LearnerParams& p = spec.learner;
  json& learner = doc["learner"];
  learner["algorithm"] = to_string(p.algorithm);
  learner["inertia"] = p.inertia.p;
  if (const auto* c = std::get_if<ConstantForgetting>(&p.forgetting)) {
    learner["forgetting"] = {{"schedule", "constant"}, {"lambda", c->lambda}};
  } else {
    learner["forgetting"] = {{"schedule", "harmonic"}};
  }
  learner["max_iterations"] = p.max_iterations;
  learner["stability_window"] = p.stability_window;

  doc["perturbations"] = json::array();
  for (const auto& pert : p.perturbations) {
    json intervals = json::array();
    for (Interval r : pert.intervals) intervals.push_back(r.value());
    doc["perturbations"].push_back(
        {{"iteration", pert.iteration}, {"intervals", intervals}, {"velocity_divisor", pert.velocity_divisor}});
  }

  doc["output"] = {{"directory", spec.output.directory}, {"truck_occupancy", spec.output.truck_occupancy}};
  doc["seed"] = spec.seed;
  return doc.dump(2) + "\n";
}

ScenarioSpec load_scenario(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open scenario " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str(), warnings);
}

void save_scenario(const ScenarioSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write scenario " + path.string());
  out << scenario_to_json(spec);
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace platoon
