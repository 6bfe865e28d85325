#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "platoon/game.hpp"
#include "platoon/learning.hpp"

namespace platoon {

/// Worst-case flow velocity a * max_r n_r + b, i.e. min_r v_r since a < 0.
double social_cost(const Occupancy& occ, const VelocityModel& model);

/// a * ceil((N+M)/R) + b: the most even split maximizes the minimum velocity.
double optimal_social_cost(std::size_t cars, std::size_t trucks, int intervals, const VelocityModel& model);

/// Where the cars of one value-of-time group prefer to travel and where they ended up.
struct GroupShift {
  double delta = 1.0;
  std::size_t cars = 0;
  std::vector<int> preferred;  // per interval
  std::vector<int> final;      // per interval
  std::size_t moved = 0;       // cars not at their preferred interval in the end
};

struct Summary {
  double s_nash = 0.0;  // social cost of the final profile
  double s_optimal = 0.0;
  double s_preference = 0.0;  // every agent at its preferred interval
  double ratio_nash = 0.0;
  double ratio_preference = 0.0;
  long iterations = 0;
  bool converged = false;
  bool certified_nash = false;
  long settled_at = -1;
  int max_truck_concentration = 0;  // max_r m_r of the final profile
  Occupancy final_occupancy;
  std::vector<GroupShift> groups;  // one per distinct car value of time, ascending
};

Summary summarize(const Trace& trace, const GameConfig& cfg, const Population& pop);

struct EmitOptions {
  bool csv = true;
  bool json = true;
  bool truck_csv = true;
};

/// Writes occupancy.csv (t,r,n_r,m_r), summary.json and truck_occupancy.csv (t,r,m_r) into
/// `directory`, creating it if needed. Throws IoError naming the path on failure.
void emit(const Trace& trace, const Summary& summary, const std::filesystem::path& directory,
          const EmitOptions& options = {});

/// summary.json contents; doubles printed in shortest round-trip form.
std::string summary_to_json(const Summary& summary, const Trace& trace);

}  // namespace platoon
