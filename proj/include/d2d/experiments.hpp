#pragma once

#include "d2d/optimizer.hpp"
#include "d2d/scenario.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace d2d {

enum class SweepVar { none, users, files, zipf };

const char* to_string(SweepVar v);
SweepVar parse_sweep_var(const std::string& s);
/// "a:b:step" to the inclusive grid a, a+step, ..; throws ConfigError.
std::vector<double> parse_grid(const std::string& s);

struct Sweep {
  SweepVar var = SweepVar::none;
  std::vector<double> grid;  // ignored when var is none
};

/// cfg with the swept field set to `value`.
ScenarioConfig apply_sweep(ScenarioConfig cfg, SweepVar var, double value);

/// Seeds base, base+1, .., base+count-1.
std::vector<std::uint64_t> seed_range(std::uint64_t base, int count);

/// 64-bit FNV-1a of the canonical JSON of a config.
std::uint64_t scenario_hash(const ScenarioConfig& cfg);

struct RunRecord {
  std::uint64_t scenario_hash = 0;
  std::uint64_t seed = 0;
  std::string algo;
  std::vector<Coalition> partition;
  double total_energy_j = 0.0;
  std::vector<double> user_energy_j;
  double wall_time_s = 0.0;
  bool complete = true;  // false when a heuristic stranded a file
};

nlohmann::json to_json(const RunRecord& r);

struct CooperationRow {
  SweepVar var = SweepVar::none;
  double value = 0.0;
  std::uint64_t seed = 0;
  double coop_energy_j = 0.0;
  double nocoop_energy_j = 0.0;
};

struct HeuristicRow {
  SweepVar var = SweepVar::none;
  double value = 0.0;
  std::uint64_t seed = 0;
  std::string algo;
  double energy_j = 0.0;  // NaN when the algorithm stranded a file
};

/// Cluster coalitions against direct downloads for one clustered config.
/// Returns the two run records (cooperation first).
std::vector<RunRecord> cooperation_point(const ScenarioConfig& cfg);

/// greedy, greedy-global, random and, within `exact_caps`, the exact
/// optimum on the grand coalition of one config.
std::vector<RunRecord> heuristics_point(const ScenarioConfig& cfg, std::optional<ExactCaps> exact_caps);

struct ExperimentOutput {
  std::vector<CooperationRow> cooperation;
  std::vector<HeuristicRow> heuristics;
  std::vector<RunRecord> records;
  int exact_skipped = 0;
};

ExperimentOutput run_cooperation(const ScenarioConfig& base, const Sweep& sweep,
                                 const std::vector<std::uint64_t>& seeds);
ExperimentOutput run_heuristics(const ScenarioConfig& base, const Sweep& sweep,
                                const std::vector<std::uint64_t>& seeds, std::optional<ExactCaps> exact_caps);

void write_csv(std::ostream& out, const std::vector<CooperationRow>& rows);
void write_csv(std::ostream& out, const std::vector<HeuristicRow>& rows);

}  // namespace d2d
