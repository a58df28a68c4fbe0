#include "d2d/experiments.hpp"

#include "d2d/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <tuple>

namespace d2d {

const char* to_string(SweepVar v) {
  switch (v) {
    case SweepVar::none: return "none";
    case SweepVar::users: return "users";
    case SweepVar::files: return "files";
    case SweepVar::zipf: return "zipf";
  }
  return "?";
}

SweepVar parse_sweep_var(const std::string& s) {
  if (s == "users") return SweepVar::users;
  if (s == "files") return SweepVar::files;
  if (s == "zipf") return SweepVar::zipf;
  if (s == "none" || s.empty()) return SweepVar::none;
  throw ConfigError("sweep must be users, files or zipf (got '" + s + "')");
}

std::vector<double> parse_grid(const std::string& s) {
  double a = 0;
  double b = 0;
  double step = 0;
  char c1 = 0;
  char c2 = 0;
  char extra = 0;
  if (std::sscanf(s.c_str(), "%lf%c%lf%c%lf %c", &a, &c1, &b, &c2, &step, &extra) != 5 || c1 != ':' || c2 != ':') {
    throw ConfigError("grid must look like a:b:step (got '" + s + "')");
  }
  if (!(step > 0) || b < a) throw ConfigError("grid needs a <= b and step > 0");
  std::vector<double> grid;
  const auto count = static_cast<long>(std::floor((b - a) / step + 1e-9));
  if (count > 100000) throw ConfigError("grid is too long");
  for (long k = 0; k <= count; ++k) grid.push_back(a + static_cast<double>(k) * step);
  return grid;
}

ScenarioConfig apply_sweep(ScenarioConfig cfg, SweepVar var, double value) {
  switch (var) {
    case SweepVar::none: break;
    case SweepVar::users: cfg.n_users = static_cast<int>(std::lround(value)); break;
    case SweepVar::files: cfg.n_files = static_cast<int>(std::lround(value)); break;
    case SweepVar::zipf: cfg.zipf_exponent = value; break;
  }
  cfg.validate();
  return cfg;
}

std::vector<std::uint64_t> seed_range(std::uint64_t base, int count) {
  if (count < 1) throw ConfigError("need at least one seed");
  std::vector<std::uint64_t> seeds;
  for (int k = 0; k < count; ++k) seeds.push_back(base + static_cast<std::uint64_t>(k));
  return seeds;
}

std::uint64_t scenario_hash(const ScenarioConfig& cfg) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : to_json(cfg).dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

nlohmann::json to_json(const RunRecord& r) {
  return {{"scenario_hash", r.scenario_hash},
          {"seed", r.seed},
          {"algo", r.algo},
          {"partition", to_json(Collection(r.partition))},
          {"total_energy_J", r.total_energy_j},
          {"user_energy_J", r.user_energy_j},
          {"wall_time_s", r.wall_time_s},
          {"complete", r.complete}};
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<double> user_totals(const std::vector<UserEnergy>& energies) {
  std::vector<double> out;
  for (const auto& e : energies) out.push_back(e.total());
  return out;
}

double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

RunRecord binary_record(const NetworkInstance& inst, const BinaryAssignment& a, std::string algo,
                        std::uint64_t hash, std::uint64_t seed, Clock::time_point start) {
  RunRecord r;
  r.scenario_hash = hash;
  r.seed = seed;
  r.algo = std::move(algo);
  r.partition = {inst.everyone()};
  r.complete = a.complete();
  r.user_energy_j = user_totals(to_plan(inst, a).energies);
  r.total_energy_j = r.complete ? sum(r.user_energy_j) : std::numeric_limits<double>::quiet_NaN();
  r.wall_time_s = seconds_since(start);
  return r;
}

}  // namespace

std::vector<RunRecord> cooperation_point(const ScenarioConfig& cfg) {
  if (cfg.layout != Layout::clustered) throw ConfigError("the cooperation comparison needs a clustered layout");
  const auto start = Clock::now();
  const Scenario sc = build_instance(cfg);
  const NetworkInstance& inst = sc.instance;
  const std::uint64_t hash = scenario_hash(cfg);
  const Partition clusters = Partition::from_labels(sc.placement.cluster_of);

  RunRecord coop;
  coop.scenario_hash = hash;
  coop.seed = cfg.seed;
  coop.algo = "cooperation";
  coop.partition = clusters.blocks();
  coop.user_energy_j.assign(static_cast<std::size_t>(inst.n_users()), 0.0);
  for (Coalition block : clusters.blocks()) {
    const ModelASolution sol = solve_model_a_lp(inst, block);
    if (!sol.feasible) {
      coop.complete = false;
      continue;
    }
    const auto totals = user_totals(sol.plan.energies);
    block.for_each([&](int i) { coop.user_energy_j[static_cast<std::size_t>(i)] = totals[static_cast<std::size_t>(i)]; });
  }
  coop.total_energy_j = coop.complete ? sum(coop.user_energy_j) : std::numeric_limits<double>::quiet_NaN();
  coop.wall_time_s = seconds_since(start);

  RunRecord alone;
  alone.scenario_hash = hash;
  alone.seed = cfg.seed;
  alone.algo = "no-cooperation";
  alone.partition = Partition::singletons(inst.n_users()).blocks();
  for (int i = 0; i < inst.n_users(); ++i) {
    alone.user_energy_j.push_back(direct_download_energy(inst, Coalition::singleton(i)));
  }
  alone.total_energy_j = direct_download_energy(inst, inst.everyone());
  alone.wall_time_s = seconds_since(start);
  return {coop, alone};
}

std::vector<RunRecord> heuristics_point(const ScenarioConfig& cfg, std::optional<ExactCaps> exact_caps) {
  const Scenario sc = build_instance(cfg);
  const NetworkInstance& inst = sc.instance;
  const Coalition all = inst.everyone();
  const std::uint64_t hash = scenario_hash(cfg);
  std::vector<RunRecord> out;

  auto start = Clock::now();
  out.push_back(binary_record(inst, greedy_assign(inst, all, sc.popularity), "greedy", hash, cfg.seed, start));
  start = Clock::now();
  out.push_back(binary_record(inst, greedy_global_assign(inst, all), "greedy-global", hash, cfg.seed, start));
  start = Clock::now();
  // Offset keeps the random stream distinct from the scenario stream.
  out.push_back(binary_record(inst, random_assign(inst, all, cfg.seed ^ 0x9e3779b97f4a7c15ULL), "random", hash,
                              cfg.seed, start));
  if (exact_caps) {
    const auto files = static_cast<int>(inst.requested_files(all).size());
    if (files <= exact_caps->max_files && inst.n_users() <= exact_caps->max_relays) {
      start = Clock::now();
      if (auto exact = solve_model_b_exact(inst, all, *exact_caps)) {
        out.push_back(binary_record(inst, *exact, "exact", hash, cfg.seed, start));
      }
    }
  }
  return out;
}

namespace {

struct Point3 {
  SweepVar var;
  double value;
  std::uint64_t seed;
};

std::vector<Point3> expand(const Sweep& sweep, const std::vector<std::uint64_t>& seeds) {
  std::vector<Point3> pts;
  if (sweep.var == SweepVar::none) {
    for (auto s : seeds) pts.push_back({SweepVar::none, 0.0, s});
    return pts;
  }
  if (sweep.grid.empty()) throw ConfigError("a sweep needs a non-empty grid");
  for (double v : sweep.grid) {
    for (auto s : seeds) pts.push_back({sweep.var, v, s});
  }
  return pts;
}

double point_value(const Point3& p, const ScenarioConfig& base) {
  if (p.var != SweepVar::none) return p.value;
  return base.n_users;
}

}  // namespace

ExperimentOutput run_cooperation(const ScenarioConfig& base, const Sweep& sweep,
                                 const std::vector<std::uint64_t>& seeds) {
  const auto pts = expand(sweep, seeds);
  std::vector<std::vector<RunRecord>> results(pts.size());
  // Validate every grid point before spending time on any of them.
  std::vector<ScenarioConfig> cfgs;
  for (const auto& p : pts) {
    ScenarioConfig cfg = apply_sweep(base, p.var, p.value);
    cfg.seed = p.seed;
    cfgs.push_back(cfg);
  }
  parallel_for(pts.size(), [&](std::size_t k) { results[k] = cooperation_point(cfgs[k]); });

  ExperimentOutput out;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const SweepVar var = pts[k].var == SweepVar::none ? SweepVar::users : pts[k].var;
    out.cooperation.push_back(
        {var, point_value(pts[k], base), pts[k].seed, results[k][0].total_energy_j, results[k][1].total_energy_j});
    out.records.insert(out.records.end(), results[k].begin(), results[k].end());
  }
  std::sort(out.cooperation.begin(), out.cooperation.end(), [](const auto& a, const auto& b) {
    return std::tie(a.value, a.seed) < std::tie(b.value, b.seed);
  });
  return out;
}

ExperimentOutput run_heuristics(const ScenarioConfig& base, const Sweep& sweep,
                                const std::vector<std::uint64_t>& seeds, std::optional<ExactCaps> exact_caps) {
  const auto pts = expand(sweep, seeds);
  std::vector<ScenarioConfig> cfgs;
  for (const auto& p : pts) {
    ScenarioConfig cfg = apply_sweep(base, p.var, p.value);
    cfg.seed = p.seed;
    cfgs.push_back(cfg);
  }
  std::vector<std::vector<RunRecord>> results(pts.size());
  parallel_for(pts.size(), [&](std::size_t k) { results[k] = heuristics_point(cfgs[k], exact_caps); });

  ExperimentOutput out;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const SweepVar var = pts[k].var == SweepVar::none ? SweepVar::users : pts[k].var;
    bool has_exact = false;
    for (const auto& r : results[k]) {
      out.heuristics.push_back({var, point_value(pts[k], base), pts[k].seed, r.algo, r.total_energy_j});
      has_exact = has_exact || r.algo == "exact";
    }
    if (exact_caps && !has_exact) ++out.exact_skipped;
    out.records.insert(out.records.end(), results[k].begin(), results[k].end());
  }
  std::sort(out.heuristics.begin(), out.heuristics.end(), [](const auto& a, const auto& b) {
    return std::tie(a.value, a.seed, a.algo) < std::tie(b.value, b.seed, b.algo);
  });
  return out;
}

namespace {

std::string number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<CooperationRow>& rows) {
  out << "sweep_var,value,seed,coop_energy_J,nocoop_energy_J\n";
  for (const auto& r : rows) {
    out << to_string(r.var) << ',' << number(r.value) << ',' << r.seed << ',' << number(r.coop_energy_j) << ','
        << number(r.nocoop_energy_j) << '\n';
  }
}

void write_csv(std::ostream& out, const std::vector<HeuristicRow>& rows) {
  out << "sweep_var,value,seed,algo,energy_J\n";
  for (const auto& r : rows) {
    out << to_string(r.var) << ',' << number(r.value) << ',' << r.seed << ',' << r.algo << ','
        << number(r.energy_j) << '\n';
  }
}

}  // namespace d2d
