// Command-line front end: instance generation, the two energy experiments
// and game analyses on a stored instance.

#include "d2d/experiments.hpp"
#include "d2d/game.hpp"
#include "d2d/scenario.hpp"
#include "d2d/stability.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

using namespace d2d;
using nlohmann::json;

enum Exit { kOk = 0, kConfig = 2, kCap = 3, kSolver = 4 };

struct Options {
  std::string config;
  std::string instance;
  std::string out;
  std::string records;
  std::string log;
  std::optional<std::uint64_t> seed;
  int seeds = 1;
  std::string sweep;
  std::string grid;
  std::vector<std::string> analyses;
  std::string partition;
  std::string exact_caps = "12:12";
};

ScenarioConfig config_from(const Options& o) {
  if (o.config.empty()) throw ConfigError("--config is required");
  ScenarioConfig cfg = load_scenario(o.config);
  if (o.seed) cfg.seed = *o.seed;
  return cfg;
}

Sweep sweep_from(const Options& o) {
  Sweep s;
  s.var = parse_sweep_var(o.sweep);
  if (s.var != SweepVar::none) {
    if (o.grid.empty()) throw ConfigError("--sweep needs --grid a:b:step");
    s.grid = parse_grid(o.grid);
  } else if (!o.grid.empty()) {
    throw ConfigError("--grid needs --sweep");
  }
  return s;
}

std::optional<ExactCaps> caps_from(const std::string& text) {
  if (text == "off") return std::nullopt;
  ExactCaps caps;
  char colon = 0;
  std::istringstream in(text);
  if (!(in >> caps.max_files >> colon >> caps.max_relays) || colon != ':' || !in.eof() || caps.max_files < 0 ||
      caps.max_relays < 0) {
    throw ConfigError("--exact-caps must be files:relays or off (got '" + text + "')");
  }
  return caps;
}

// Writes to `path`, or to stdout when it is empty or "-".
template <typename F>
void emit(const std::string& path, F&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  write(out);
}

void write_records(const std::string& path, const std::vector<RunRecord>& records) {
  if (path.empty()) return;
  emit(path, [&](std::ostream& out) {
    for (const auto& r : records) out << to_json(r).dump() << '\n';
  });
}

int cmd_generate(const Options& o) {
  const ScenarioConfig cfg = config_from(o);
  const Scenario sc = build_instance(cfg);
  emit(o.out, [&](std::ostream& out) { out << to_json(sc.instance).dump(2) << '\n'; });
  return kOk;
}

int cmd_compare(const Options& o) {
  const ScenarioConfig cfg = config_from(o);
  if (cfg.layout != Layout::clustered) throw ConfigError("compare-cooperation needs a clustered config");
  const auto result = run_cooperation(cfg, sweep_from(o), seed_range(cfg.seed, o.seeds));
  emit(o.out, [&](std::ostream& out) { write_csv(out, result.cooperation); });
  write_records(o.records, result.records);
  return kOk;
}

int cmd_heuristics(const Options& o) {
  const ScenarioConfig cfg = config_from(o);
  const auto caps = caps_from(o.exact_caps);
  const auto result = run_heuristics(cfg, sweep_from(o), seed_range(cfg.seed, o.seeds), caps);
  emit(o.out, [&](std::ostream& out) { write_csv(out, result.heuristics); });
  write_records(o.records, result.records);
  if (result.exact_skipped > 0) {
    std::cerr << "exact solver skipped on " << result.exact_skipped << " run(s): over --exact-caps "
              << o.exact_caps << '\n';
  }
  return kOk;
}

json coalitions_json(const std::vector<Coalition>& cs) {
  json a = json::array();
  for (Coalition c : cs) a.push_back(to_json(Collection({c}))[0]);
  return a;
}

Partition partition_arg(const std::string& text, int n) {
  json j;
  try {
    if (std::filesystem::exists(text)) {
      std::ifstream in(text);
      in >> j;
    } else {
      j = json::parse(text);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("cannot read --partition: ") + e.what());
  }
  return partition_from_json(j, n);
}

json analysis(const std::string& name, const ValueOracle& v, const Options& o, std::vector<MergeSplitStep>& log) {
  const int n = v.n_players();
  if (name == "core") {
    const CoreResult r = check_core(v);
    json j = {{"status", r.nonempty ? "nonempty" : "empty"}};
    if (r.nonempty) {
      j["witness"] = std::vector<double>(r.witness.x.data(), r.witness.x.data() + r.witness.x.size());
    } else {
      j["blocking"] = coalitions_json(r.blocking);
    }
    return j;
  }
  if (name == "convex" || name == "superadditive") {
    const PairCheck r = name == "convex" ? check_convex(v) : check_superadditive(v);
    json j = {{"status", "ok"}, {name, r.holds}};
    if (!r.holds) {
      j["violating_pair"] = coalitions_json({r.first, r.second});
      j["violation"] = r.violation;
    }
    return j;
  }
  if (name == "merge-split") {
    const MergeSplitResult r = merge_and_split(v);
    log = r.log;
    json steps = json::array();
    for (const auto& s : r.log) steps.push_back(to_json(s));
    return {{"status", "ok"},
            {"partition", to_json(r.partition)},
            {"value", r.value},
            {"operations", r.log.size()},
            {"comparisons", r.comparisons},
            {"log", steps}};
  }
  if (name == "best-partition") {
    const BestPartition r = enumerate_best_partition(v);
    return {{"status", "ok"}, {"partition", to_json(r.partition)}, {"value", r.value}};
  }
  if (name == "dc-stable") {
    json j = {{"status", "ok"}};
    std::optional<Partition> p;
    if (!o.partition.empty()) {
      p = partition_arg(o.partition, n);
      j["partition_source"] = "argument";
    } else {
      p = merge_and_split(v).partition;
      j["partition_source"] = "merge-split";
    }
    const StabilityVerdict r = is_dc_stable(v, *p);
    j["partition"] = to_json(*p);
    j["verdict"] = to_string(r.status);
    j["margin"] = r.margin;
    if (r.status == Stability::unstable) {
      if (!r.witness_coalition.empty()) j["witness_coalition"] = coalitions_json({r.witness_coalition})[0];
      if (r.witness_collection.size() > 0) j["witness_collection"] = to_json(r.witness_collection);
    }
    return j;
  }
  throw ConfigError("unknown analysis '" + name +
                    "' (expected core, convex, superadditive, dc-stable, merge-split or best-partition)");
}

int cmd_analyze(const Options& o) {
  std::optional<NetworkInstance> inst;
  if (!o.instance.empty()) {
    inst = load_instance(o.instance);
  } else if (!o.config.empty()) {
    inst = build_instance(config_from(o)).instance;
  } else {
    throw ConfigError("analyze needs --instance or --config");
  }
  std::vector<std::string> names = o.analyses;
  if (names.empty()) names = {"core", "convex", "merge-split"};

  const ValueOracle v = model_a_oracle(*inst);
  json report = {{"users", inst->n_users()}};
  std::vector<MergeSplitStep> log;
  bool capped = false;
  for (const auto& name : names) {
    try {
      report[name] = analysis(name, v, o, log);
    } catch (const CapExceeded& e) {
      report[name] = {{"status", "cap"}, {"message", e.what()}};
      capped = true;
    }
  }
  report["value_evaluations"] = v.evaluations();
  emit(o.out, [&](std::ostream& out) { out << report.dump(2) << '\n'; });
  if (!o.log.empty()) emit(o.log, [&](std::ostream& out) { write_log(out, log); });
  return capped ? kCap : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coalitional D2D content distribution: instances, experiments and game analyses"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", o.config, "scenario config (JSON)");
    cmd->add_option("--seed", o.seed, "override the config seed");
    cmd->add_option("--out", o.out, "output path (stdout when omitted)");
  };
  auto add_experiment = [&](CLI::App* cmd) {
    add_common(cmd);
    cmd->add_option("--seeds", o.seeds, "number of consecutive seeds starting at --seed")->check(CLI::PositiveNumber);
    cmd->add_option("--sweep", o.sweep, "swept variable")->check(CLI::IsMember({"users", "files", "zipf"}));
    cmd->add_option("--grid", o.grid, "sweep grid a:b:step");
    cmd->add_option("--records", o.records, "also write one JSON run record per line here");
  };

  auto* gen = app.add_subcommand("generate", "build one network instance from a scenario config");
  add_common(gen);
  auto* coop = app.add_subcommand("compare-cooperation", "cluster coalitions versus direct downloads (CSV)");
  add_experiment(coop);
  auto* heur = app.add_subcommand("heuristics", "single-relay heuristics on the whole cell (CSV)");
  add_experiment(heur);
  heur->add_option("--exact-caps", o.exact_caps, "files:relays limit for the exact solver, or off");
  auto* analyze = app.add_subcommand("analyze", "game analyses on one instance (JSON report)");
  add_common(analyze);
  analyze->add_option("--instance", o.instance, "network instance (JSON)");
  analyze
      ->add_option("--analysis", o.analyses,
                   "core, convex, superadditive, dc-stable, merge-split or best-partition; repeatable")
      ->delimiter(',');
  analyze->add_option("--partition", o.partition, "partition for dc-stable: JSON like [[1,2],[3]] or a file");
  analyze->add_option("--log", o.log, "write the merge-split log here as JSON lines");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (gen->parsed()) return cmd_generate(o);
    if (coop->parsed()) return cmd_compare(o);
    if (heur->parsed()) return cmd_heuristics(o);
    return cmd_analyze(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const CapExceeded& e) {
    std::cerr << "cap exceeded: " << e.what() << '\n';
    return kCap;
  } catch (const SolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSolver;
  }
}
