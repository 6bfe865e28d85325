#include "platoon/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <string>

#include "json.hpp"
#include "platoon/error.hpp"

namespace platoon {

double social_cost(const Occupancy& occ, const VelocityModel& model) {
  const int peak = occ.vehicles.empty() ? 0 : *std::max_element(occ.vehicles.begin(), occ.vehicles.end());
  return model.at(static_cast<double>(peak));
}

double optimal_social_cost(std::size_t cars, std::size_t trucks, int intervals, const VelocityModel& model) {
  if (intervals < 1) throw ValidationError("interval count must be positive");
  const std::size_t total = cars + trucks;
  const auto r = static_cast<std::size_t>(intervals);
  return model.at(static_cast<double>((total + r - 1) / r));
}

Summary summarize(const Trace& trace, const GameConfig& cfg, const Population& pop) {
  Summary s;
  s.final_occupancy = occupancy(trace.final_profile, cfg.intervals);
  const Occupancy preferred = occupancy(preferred_profile(pop), cfg.intervals);
  s.s_nash = social_cost(s.final_occupancy, cfg.velocity);
  s.s_preference = social_cost(preferred, cfg.velocity);
  s.s_optimal = optimal_social_cost(pop.cars.size(), pop.trucks.size(), cfg.intervals, cfg.velocity);
  s.ratio_nash = s.s_optimal / s.s_nash;
  s.ratio_preference = s.s_optimal / s.s_preference;
  s.iterations = trace.iterations_run();
  s.converged = trace.converged;
  s.certified_nash = trace.certificate.is_nash;
  s.settled_at = trace.settled_at;
  s.max_truck_concentration =
      *std::max_element(s.final_occupancy.trucks.begin(), s.final_occupancy.trucks.end());

  std::map<double, GroupShift> groups;
  const auto slots = static_cast<std::size_t>(cfg.intervals);
  for (std::size_t i = 0; i < pop.cars.size(); ++i) {
    const CarAgent& car = pop.cars[i];
    auto [it, fresh] = groups.try_emplace(car.value_of_time);
    GroupShift& g = it->second;
    if (fresh) {
      g.delta = car.value_of_time;
      g.preferred.assign(slots, 0);
      g.final.assign(slots, 0);
    }
    ++g.cars;
    ++g.preferred[car.preferred.slot()];
    ++g.final[trace.final_profile.cars[i].slot()];
    if (trace.final_profile.cars[i] != car.preferred) ++g.moved;
  }
  for (auto& [delta, g] : groups) s.groups.push_back(std::move(g));
  return s;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  out.close();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

std::string summary_to_json(const Summary& s, const Trace& trace) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["algorithm"] = to_string(trace.algorithm);
  doc["converged"] = s.converged;
  doc["certified_nash"] = s.certified_nash;
  doc["iterations"] = s.iterations;
  doc["settled_at"] = s.settled_at;
  doc["s_nash"] = s.s_nash;
  doc["s_optimal"] = s.s_optimal;
  doc["s_preference"] = s.s_preference;
  doc["ratio_nash"] = s.ratio_nash;
  doc["ratio_preference"] = s.ratio_preference;
  doc["max_truck_concentration"] = s.max_truck_concentration;
  doc["final_occupancy"] = {{"n", s.final_occupancy.vehicles}, {"m", s.final_occupancy.trucks}};
  if (!s.certified_nash && trace.certificate.witness) {
    const Deviation& d = *trace.certificate.witness;
    doc["deviation"] = {{"agent", to_string(d.agent)}, {"to", d.to.value()}, {"gain", d.gain}};
  }
  ordered_json groups = ordered_json::array();
  for (const auto& g : s.groups) {
    groups.push_back({{"delta", g.delta},
                      {"cars", g.cars},
                      {"moved", g.moved},
                      {"preferred", g.preferred},
                      {"final", g.final}});
  }
  doc["value_of_time_groups"] = std::move(groups);
  return doc.dump(2) + "\n";
}

void emit(const Trace& trace, const Summary& summary, const std::filesystem::path& directory,
          const EmitOptions& options) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw IoError("cannot create " + directory.string() + ": " + ec.message());

  if (options.csv) {
    std::string csv = "t,r,n_r,m_r\n";
    for (const auto& it : trace.iterations) {
      for (std::size_t s = 0; s < it.vehicles.size(); ++s) {
        csv += std::to_string(it.t) + ',' + std::to_string(s + 1) + ',' + std::to_string(it.vehicles[s]) + ',' +
               std::to_string(it.trucks[s]) + '\n';
      }
    }
    write_file(directory / "occupancy.csv", csv);
  }
  if (options.truck_csv) {
    std::string csv = "t,r,m_r\n";
    for (const auto& it : trace.iterations) {
      for (std::size_t s = 0; s < it.trucks.size(); ++s) {
        csv += std::to_string(it.t) + ',' + std::to_string(s + 1) + ',' + std::to_string(it.trucks[s]) + '\n';
      }
    }
    write_file(directory / "truck_occupancy.csv", csv);
  }
  if (options.json) write_file(directory / "summary.json", summary_to_json(summary, trace));
}

}  // namespace platoon
