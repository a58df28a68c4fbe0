#include "support.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + std::string(D2D_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  for (std::size_t n; (n = fread(buf, 1, sizeof buf, pipe)) > 0;) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("d2dgame_test_" + name)).string();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

const std::string kGolden = testing::fixture("golden_config.json");
// FNV-1a of `generate` on the golden config, frozen from the first run.
constexpr std::uint64_t kGoldenDigest = 3693480465163607687ULL;

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("golden instance digest") {
    const auto r = run("generate --config " + kGolden);
    REQUIRE(r.code == 0);
    CHECK(fnv1a(r.out) == kGoldenDigest);
  }

  TEST_CASE("seed override changes the instance, same seed does not") {
    const auto a = run("generate --config " + kGolden);
    const auto b = run("generate --config " + kGolden + " --seed 43");
    const auto c = run("generate --config " + kGolden + " --seed 42");
    CHECK(a.out != b.out);
    CHECK(a.out == c.out);
  }

  TEST_CASE("exit codes") {
    CHECK(run("generate --config /nonexistent.json").code == 2);
    CHECK(run("generate --bogus-flag").code == 2);
    CHECK(run("").code == 2);
    CHECK(run("--help").code == 0);
    CHECK(run("heuristics --config " + kGolden + " --sweep users").code == 2);
    CHECK(run("heuristics --config " + kGolden + " --exact-caps 3").code == 2);
    CHECK(run("heuristics --config " + kGolden + " --sweep users --grid 4:2:1").code == 2);
    CHECK(run("compare-cooperation --config " + std::string(D2D_CONFIGS) + "/random.json").code == 2);
    CHECK(run("analyze --instance " + testing::fixture("worked_example.json") + " --analysis nonsense").code == 2);
    CHECK(run("analyze --instance " + testing::fixture("worked_example.json") +
              " --analysis dc-stable --partition '[[1,2]]'").code == 2);
  }

  TEST_CASE("cap exceeded exits with 3 and says so") {
    const auto big = temp_path("big.json");
    {
      std::ofstream out(big);
      out << R"({"layout":"random","n_users":17,"n_files":3,"seed":1})";
    }
    const auto r = run("analyze --config " + big + " --analysis core");
    CHECK(r.code == 3);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["core"]["status"] == "cap");
  }

  TEST_CASE("analyze: worked example has an empty core") {
    const auto r = run("analyze --instance " + testing::fixture("worked_example.json") + " --analysis core,superadditive");
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["core"]["status"] == "empty");
    CHECK(j["superadditive"]["superadditive"] == false);
    CHECK(j["superadditive"]["violating_pair"] == nlohmann::json::parse("[[1,2,3],[4,5,6]]"));
  }

  TEST_CASE("analyze: symmetric instance is convex with a nonempty core") {
    const auto r = run("analyze --instance " + testing::fixture("symmetric.json") + " --analysis core --analysis convex");
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["core"]["status"] == "nonempty");
    CHECK(j["core"]["witness"].size() == 6);
    CHECK(j["convex"]["convex"] == true);
  }

  TEST_CASE("analyze: merge-and-split finds the clusters, log as JSON lines") {
    const auto log = temp_path("log.jsonl");
    const auto r = run("analyze --instance " + testing::fixture("clustered.json") +
                       " --analysis merge-split,best-partition,dc-stable --log " + log);
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    const auto clusters = nlohmann::json::parse("[[1,2],[3,4],[5,6],[7,8]]");
    CHECK(j["merge-split"]["partition"] == clusters);
    CHECK(j["best-partition"]["partition"] == clusters);
    CHECK(j["merge-split"]["value"].get<double>() ==
          doctest::Approx(j["best-partition"]["value"].get<double>()).epsilon(1e-9));
    CHECK(j["dc-stable"]["verdict"] != "unstable");

    std::ifstream in(log);
    std::stringstream text;
    text << in.rdbuf();
    const auto rows = lines(text.str());
    CHECK(rows.size() == j["merge-split"]["operations"].get<std::size_t>());
    for (const auto& line : rows) {
      const auto step = nlohmann::json::parse(line);
      for (const char* key : {"op", "blocks_before", "blocks_after", "delta_v"}) CHECK(step.contains(key));
      CHECK(step["delta_v"].get<double>() > 0.0);
    }
  }

  TEST_CASE("experiment CSVs have the documented columns") {
    const auto coop = run("compare-cooperation --config " + kGolden + " --seeds 2 --sweep users --grid 4:8:4");
    REQUIRE(coop.code == 0);
    const auto c = lines(coop.out);
    REQUIRE(c.size() == 5);
    CHECK(c[0] == "sweep_var,value,seed,coop_energy_J,nocoop_energy_J");
    CHECK(c[1].rfind("users,4,42,", 0) == 0);

    const auto heur = run("heuristics --config " + kGolden + " --seeds 2");
    REQUIRE(heur.code == 0);
    const auto h = lines(heur.out);
    CHECK(h[0] == "sweep_var,value,seed,algo,energy_J");
    CHECK(h.size() == 1 + 2 * 4);
    for (const char* algo : {",greedy,", ",greedy-global,", ",random,", ",exact,"}) {
      CHECK(std::count_if(h.begin(), h.end(), [&](const std::string& l) { return l.find(algo) != std::string::npos; }) == 2);
    }
    const auto off = run("heuristics --config " + kGolden + " --seeds 1 --exact-caps off");
    CHECK(lines(off.out).size() == 4);
  }

  TEST_CASE("worker count does not change results") {
    const std::string args = "heuristics --config " + kGolden + " --seeds 3 --sweep zipf --grid 0.5:1.0:0.5";
    const auto many = run(args);
    const auto one = run(args, "D2D_THREADS=1 ");
    REQUIRE(many.code == 0);
    REQUIRE(one.code == 0);
    CHECK(one.out == many.out);
  }

  TEST_CASE("records carry the run metadata") {
    const auto rec = temp_path("records.jsonl");
    REQUIRE(run("heuristics --config " + kGolden + " --seeds 1 --records " + rec).code == 0);
    std::ifstream in(rec);
    std::string line;
    REQUIRE(std::getline(in, line));
    const auto j = nlohmann::json::parse(line);
    for (const char* key : {"scenario_hash", "seed", "algo", "partition", "total_energy_J", "user_energy_J", "wall_time_s"}) {
      CHECK(j.contains(key));
    }
  }
}
