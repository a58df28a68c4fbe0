#include "d2d/scenario.hpp"

#include <doctest.h>

#include <cmath>

using namespace d2d;

namespace {

ScenarioConfig clustered(int n_users) {
  ScenarioConfig cfg;
  cfg.layout = Layout::clustered;
  cfg.n_users = n_users;
  cfg.n_files = 10;
  return cfg;
}

}  // namespace

TEST_SUITE("scenario") {
  TEST_CASE("hexagon containment") {
    CHECK(inside_hexagon({0, 0}, 300));
    CHECK(inside_hexagon({300, 0}, 300));
    CHECK_FALSE(inside_hexagon({300.01, 0}, 300));
    CHECK(inside_hexagon({0, 259.8}, 300));
    CHECK_FALSE(inside_hexagon({0, 259.9}, 300));
    CHECK(inside_hexagon({150, 259.8}, 300));
    CHECK_FALSE(inside_hexagon({160, 259.8}, 300));
  }

  TEST_CASE("random layout stays in the cell") {
    ScenarioConfig cfg;
    cfg.n_users = 60;
    Rng rng(3);
    const auto p = sample_positions(cfg, rng);
    REQUIRE(p.positions.size() == 60);
    for (auto q : p.positions) CHECK(inside_hexagon(q, cfg.cell_radius_m));
    cfg.n_users = 1;
    CHECK(inside_hexagon(sample_positions(cfg, rng).positions.front(), cfg.cell_radius_m));
  }

  TEST_CASE("clustered layout: equal clusters within their disks") {
    const auto cfg = clustered(8);
    Rng rng(9);
    const auto p = sample_positions(cfg, rng);
    std::vector<int> count(4, 0);
    for (std::size_t i = 0; i < p.positions.size(); ++i) {
      const int k = p.cluster_of[i];
      ++count[static_cast<std::size_t>(k)];
      const double a = 2.0 * std::numbers::pi * k / 4;
      const double d = std::hypot(p.positions[i].x - 200.0 * std::cos(a), p.positions[i].y - 200.0 * std::sin(a));
      CHECK(d <= 60.0);
    }
    CHECK(count == std::vector<int>{2, 2, 2, 2});
    CHECK_THROWS_AS(sample_positions(clustered(10), rng), ConfigError);
  }

  TEST_CASE("path loss law and Shannon monotonicity") {
    ChannelParams ch;
    const double ratio_db = path_loss_db(ch, 100.0) - path_loss_db(ch, 50.0);
    CHECK(std::pow(10.0, ratio_db / 10.0) == doctest::Approx(std::pow(2.0, 3.3)).epsilon(1e-12));
    CHECK(path_loss_db(ch, 0.0) == path_loss_db(ch, 1.0));
    CHECK(shannon_rate(ch, 0.35, 1e-9) < shannon_rate(ch, 0.35, 1e-8));
    CHECK(shannon_rate(ch, 0.35, 0.0) == 1.0);

    ScenarioConfig cfg;
    cfg.channel.shadowing = false;
    cfg.channel.fading = false;
    Placement pl;
    pl.positions = {{0, 0}, {50, 0}, {100, 0}};
    pl.cluster_of = {-1, -1, -1};
    Rng rng(1);
    const auto draw = realize_rates(cfg, pl, rng);
    const double gain_near = std::pow(10.0, -draw.d2d_path_loss_db(0, 1) / 10.0);
    const double gain_far = std::pow(10.0, -draw.d2d_path_loss_db(0, 2) / 10.0);
    CHECK(gain_near / gain_far == doctest::Approx(std::pow(2.0, 3.3)).epsilon(1e-12));
    CHECK(draw.d2d_rate(0, 1) > draw.d2d_rate(0, 2));
    CHECK(draw.d2d_rate(0, 1) == draw.d2d_rate(1, 0));
  }

  TEST_CASE("Zipf closed forms") {
    const auto uniform = zipf_probabilities(5, 0.0);
    for (Index i = 0; i < 5; ++i) CHECK(uniform(i) == doctest::Approx(0.2));
    const auto two = zipf_probabilities(2, 1.0);
    CHECK(two(0) == doctest::Approx(2.0 / 3));
    CHECK(two(1) == doctest::Approx(1.0 / 3));
    CHECK(std::abs(zipf_probabilities(50, 0.8).sum() - 1.0) <= 1e-12);
    CHECK_THROWS_AS(zipf_probabilities(0, 1.0), ConfigError);
  }

  TEST_CASE("empirical popularity of the top file within three sigma") {
    ScenarioConfig cfg;
    cfg.n_users = 100000;
    cfg.n_files = 20;
    cfg.zipf_exponent = 0.8;
    Rng rng(17);
    const auto d = sample_demands(cfg, rng);
    const double p1 = zipf_probabilities(20, 0.8)(0);
    const double hits = static_cast<double>(std::count(d.request.begin(), d.request.end(), 0));
    const double sigma = std::sqrt(cfg.n_users * p1 * (1 - p1));
    CHECK(std::abs(hits - cfg.n_users * p1) <= 3 * sigma);
    CHECK(d.popularity.front() == 0);
  }

  TEST_CASE("built instance: default powers, sizes on the grid, positive rates") {
    ScenarioConfig cfg;
    cfg.n_users = 20;
    cfg.n_files = 30;
    cfg.seed = 5;
    const auto sc = build_instance(cfg);
    const auto& inst = sc.instance;
    for (int m = 0; m < inst.n_files(); ++m) {
      const double x = inst.file_size(m);
      CHECK(x >= 1e6);
      CHECK(x <= 1e7);
      CHECK(std::fmod(x, 1e6) == 0.0);
    }
    for (int i = 0; i < inst.n_users(); ++i) {
      CHECK(inst.request_of(i) >= 0);
      CHECK(inst.bs_rx_power(i) == 0.25);
      CHECK(inst.budget(i) == 1e6);
      CHECK(inst.bs_rate(i) >= 1.0);
      for (int j = 0; j < inst.n_users(); ++j) {
        if (i == j) continue;
        CHECK(inst.tx_power(i, j) == 0.35);
        CHECK(inst.rx_power(i, j) == 0.2);
        CHECK(inst.d2d_rate(i, j) >= 1.0);
      }
    }
    CHECK(inst.cost_coeff() == 1.0);
  }

  TEST_CASE("same seed gives a byte-identical instance") {
    ScenarioConfig cfg = clustered(12);
    cfg.seed = 77;
    const auto a = to_json(build_instance(cfg).instance).dump();
    CHECK(a == to_json(build_instance(cfg).instance).dump());
    cfg.seed = 78;
    CHECK(a != to_json(build_instance(cfg).instance).dump());
  }

  TEST_CASE("idealized clusters are exactly symmetric") {
    ScenarioConfig cfg = clustered(12);
    cfg.idealized = true;
    const auto sc = build_instance(cfg);
    const auto p = Partition::from_labels(sc.placement.cluster_of);
    const auto sym = cluster_symmetry(sc.instance, p);
    CHECK(sym.n_clusters() == 4);
    for (int k = 0; k < 4; ++k) {
      for (int l = 0; l < 4; ++l) {
        if (k != l) CHECK(sym.pair_rate(k, l) == sym.pair_rate(l, k));
      }
    }
    cfg.idealized = false;
    CHECK_THROWS_AS(cluster_symmetry(build_instance(cfg).instance, p), ConfigError);
  }

  TEST_CASE("config JSON: round trip, unknown keys, invalid values") {
    ScenarioConfig cfg = clustered(16);
    cfg.zipf_exponent = 1.1;
    cfg.channel.fading = false;
    const auto j = to_json(cfg);
    CHECK(to_json(scenario_from_json(j)) == j);

    auto bad = j;
    bad["colour"] = 1;
    CHECK_THROWS_AS(scenario_from_json(bad), ConfigError);
    bad = j;
    bad["n_users"] = 15;
    CHECK_THROWS_AS(scenario_from_json(bad), ConfigError);
    bad = j;
    bad["zipf_exponent"] = -1;
    CHECK_THROWS_AS(scenario_from_json(bad), ConfigError);
    bad = j;
    bad["layout"] = "ring";
    CHECK_THROWS_AS(scenario_from_json(bad), ConfigError);
    bad = j;
    bad["clusters"]["center_distance_m"] = 400;
    CHECK_THROWS_AS(scenario_from_json(bad), ConfigError);
    CHECK_THROWS_AS(load_scenario("/nonexistent/config.json"), ConfigError);
  }

  TEST_CASE("synthetic symmetric instances") {
    SymmetricParams sym;
    sym.d2d_rate = 5.0;
    const auto inst = symmetric_instance(sym, 5, 3);
    CHECK(inst.requested_files(inst.everyone()) == std::vector<int>{0});
    CHECK(inst.requesters(inst.everyone(), 0) == Coalition{0, 1, 2});
    CHECK_THROWS_AS(symmetric_instance(sym, 3, 4), ConfigError);
    CHECK(cluster_partition({2, 1, 3}) == Partition::from_labels({0, 0, 1, 2, 2, 2}));
  }
}
