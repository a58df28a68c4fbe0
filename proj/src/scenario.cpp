#include "d2d/scenario.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

namespace d2d {

namespace {

constexpr double kSlackBudget = 1e6;

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

template <typename T>
void read(const nlohmann::json& j, const char* key, T& slot) {
  if (j.contains(key)) slot = j.at(key).get<T>();
}

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown " + where + " key '" + key + "'");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

void ScenarioConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("invalid scenario: " + what);
  };
  require(cell_radius_m > 0, "cell_radius_m must be positive");
  require(n_users >= 1 && n_users <= Coalition::kMaxUsers, "n_users must be in 1..63");
  require(n_files >= 1, "n_files must be at least 1");
  require(zipf_exponent >= 0 && std::isfinite(zipf_exponent), "zipf_exponent must be >= 0");
  require(file_size_min_bits > 0 && file_size_max_bits >= file_size_min_bits && file_size_step_bits > 0,
          "file size range must be positive and ordered");
  require(requester_fraction >= 0 && requester_fraction <= 1, "requester_fraction must be in [0,1]");
  require(energy_budget_j >= 0, "energy_budget_j must be non-negative");
  require(cost_coeff > 0, "cost_coeff must be positive");
  require(channel.bandwidth_hz > 0 && channel.path_loss_exponent > 0 && channel.shadow_sigma_db >= 0,
          "channel parameters must be positive");
  require(channel.d2d_tx_mw >= 0 && channel.relay_rx_mw >= 0 && channel.d2d_rx_mw >= 0,
          "powers must be non-negative");
  if (layout == Layout::clustered) {
    require(n_clusters >= 1, "n_clusters must be at least 1");
    require(cluster_radius_m > 0 && center_distance_m >= 0, "cluster radii must be positive");
    require(n_users % n_clusters == 0, "n_users must be divisible by n_clusters");
    for (int k = 0; k < n_clusters; ++k) {
      const double a = 2.0 * std::numbers::pi * k / n_clusters;
      require(inside_hexagon({center_distance_m * std::cos(a), center_distance_m * std::sin(a)}, cell_radius_m),
              "cluster centers must lie inside the cell");
    }
  }
}

ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw ConfigError("scenario config must be a JSON object");
    reject_unknown(j,
                   {"layout", "cell_radius_m", "clusters", "n_users", "n_files", "zipf_exponent",
                    "file_size_range_bits", "file_size_step_bits", "requester_fraction", "energy_budget_j",
                    "valuation", "cost_coeff", "idealized", "channel", "seed"},
                   "scenario");
    ScenarioConfig cfg;
    if (j.contains("layout")) {
      const auto layout = j.at("layout").get<std::string>();
      if (layout == "random") {
        cfg.layout = Layout::random;
      } else if (layout == "clustered") {
        cfg.layout = Layout::clustered;
      } else {
        throw ConfigError("layout must be 'random' or 'clustered'");
      }
    }
    read(j, "cell_radius_m", cfg.cell_radius_m);
    if (j.contains("clusters")) {
      const auto& c = j.at("clusters");
      reject_unknown(c, {"count", "radius_m", "center_distance_m"}, "clusters");
      read(c, "count", cfg.n_clusters);
      read(c, "radius_m", cfg.cluster_radius_m);
      read(c, "center_distance_m", cfg.center_distance_m);
    }
    read(j, "n_users", cfg.n_users);
    read(j, "n_files", cfg.n_files);
    read(j, "zipf_exponent", cfg.zipf_exponent);
    if (j.contains("file_size_range_bits")) {
      const auto range = j.at("file_size_range_bits").get<std::vector<double>>();
      if (range.size() != 2) throw ConfigError("file_size_range_bits must be [min, max]");
      cfg.file_size_min_bits = range[0];
      cfg.file_size_max_bits = range[1];
    }
    read(j, "file_size_step_bits", cfg.file_size_step_bits);
    read(j, "requester_fraction", cfg.requester_fraction);
    read(j, "energy_budget_j", cfg.energy_budget_j);
    read(j, "valuation", cfg.valuation);
    read(j, "cost_coeff", cfg.cost_coeff);
    read(j, "idealized", cfg.idealized);
    read(j, "seed", cfg.seed);
    if (j.contains("channel")) {
      const auto& c = j.at("channel");
      reject_unknown(c,
                     {"noise_psd_dbm_hz", "shadow_sigma_db", "path_loss_exponent", "ref_loss_db_at_1m", "bs_tx_dbm",
                      "d2d_tx_mw", "relay_rx_mw", "d2d_rx_mw", "bandwidth_hz", "shadowing", "fading"},
                     "channel");
      auto& ch = cfg.channel;
      read(c, "noise_psd_dbm_hz", ch.noise_psd_dbm_hz);
      read(c, "shadow_sigma_db", ch.shadow_sigma_db);
      read(c, "path_loss_exponent", ch.path_loss_exponent);
      read(c, "ref_loss_db_at_1m", ch.ref_loss_db_at_1m);
      read(c, "bs_tx_dbm", ch.bs_tx_dbm);
      read(c, "d2d_tx_mw", ch.d2d_tx_mw);
      read(c, "relay_rx_mw", ch.relay_rx_mw);
      read(c, "d2d_rx_mw", ch.d2d_rx_mw);
      read(c, "bandwidth_hz", ch.bandwidth_hz);
      read(c, "shadowing", ch.shadowing);
      read(c, "fading", ch.fading);
    }
    cfg.validate();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed scenario config: ") + e.what());
  }
}

nlohmann::json to_json(const ScenarioConfig& cfg) {
  const auto& ch = cfg.channel;
  return {
      {"layout", cfg.layout == Layout::random ? "random" : "clustered"},
      {"cell_radius_m", cfg.cell_radius_m},
      {"clusters",
       {{"count", cfg.n_clusters}, {"radius_m", cfg.cluster_radius_m}, {"center_distance_m", cfg.center_distance_m}}},
      {"n_users", cfg.n_users},
      {"n_files", cfg.n_files},
      {"zipf_exponent", cfg.zipf_exponent},
      {"file_size_range_bits", {cfg.file_size_min_bits, cfg.file_size_max_bits}},
      {"file_size_step_bits", cfg.file_size_step_bits},
      {"requester_fraction", cfg.requester_fraction},
      {"energy_budget_j", cfg.energy_budget_j},
      {"valuation", cfg.valuation},
      {"cost_coeff", cfg.cost_coeff},
      {"idealized", cfg.idealized},
      {"channel",
       {{"noise_psd_dbm_hz", ch.noise_psd_dbm_hz},
        {"shadow_sigma_db", ch.shadow_sigma_db},
        {"path_loss_exponent", ch.path_loss_exponent},
        {"ref_loss_db_at_1m", ch.ref_loss_db_at_1m},
        {"bs_tx_dbm", ch.bs_tx_dbm},
        {"d2d_tx_mw", ch.d2d_tx_mw},
        {"relay_rx_mw", ch.relay_rx_mw},
        {"d2d_rx_mw", ch.d2d_rx_mw},
        {"bandwidth_hz", ch.bandwidth_hz},
        {"shadowing", ch.shadowing},
        {"fading", ch.fading}}},
      {"seed", cfg.seed},
  };
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse " + path + ": " + e.what());
  }
  return scenario_from_json(j);
}

// ---------------------------------------------------------------------------
// Geometry

bool inside_hexagon(Point p, double radius) {
  const double s3 = std::numbers::sqrt3;
  const double ax = std::abs(p.x);
  const double ay = std::abs(p.y);
  return ay <= s3 / 2.0 * radius && s3 * ax + ay <= s3 * radius;
}

Placement sample_positions(const ScenarioConfig& cfg, Rng& rng) {
  cfg.validate();
  Placement out;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (cfg.layout == Layout::random) {
    const double r = cfg.cell_radius_m;
    std::uniform_real_distribution<double> box(-r, r);
    while (static_cast<int>(out.positions.size()) < cfg.n_users) {
      const Point p{box(rng), box(rng)};
      if (inside_hexagon(p, r)) out.positions.push_back(p);
    }
    out.cluster_of.assign(out.positions.size(), -1);
    return out;
  }
  const int per_cluster = cfg.n_users / cfg.n_clusters;
  for (int k = 0; k < cfg.n_clusters; ++k) {
    const double a = 2.0 * std::numbers::pi * k / cfg.n_clusters;
    const Point c{cfg.center_distance_m * std::cos(a), cfg.center_distance_m * std::sin(a)};
    for (int u = 0; u < per_cluster; ++u) {
      const double rho = cfg.cluster_radius_m * std::sqrt(unit(rng));
      const double theta = 2.0 * std::numbers::pi * unit(rng);
      out.positions.push_back({c.x + rho * std::cos(theta), c.y + rho * std::sin(theta)});
      out.cluster_of.push_back(k);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Channel

double path_loss_db(const ChannelParams& ch, double distance_m) {
  return ch.ref_loss_db_at_1m + 10.0 * ch.path_loss_exponent * std::log10(std::max(distance_m, 1.0));
}

double shannon_rate(const ChannelParams& ch, double tx_watts, double gain) {
  const double noise = dbm_to_watts(ch.noise_psd_dbm_hz) * ch.bandwidth_hz;
  return std::max(1.0, ch.bandwidth_hz * std::log2(1.0 + tx_watts * gain / noise));
}

ChannelDraw realize_rates(const ScenarioConfig& cfg, const Placement& placement, Rng& rng) {
  const auto& ch = cfg.channel;
  const auto n = static_cast<Index>(placement.positions.size());
  std::normal_distribution<double> shadow(0.0, ch.shadow_sigma_db);
  std::exponential_distribution<double> rayleigh(1.0);
  auto draw = [&](double distance, double& loss, double& sh, double& fade) {
    loss = path_loss_db(ch, distance);
    sh = ch.shadowing ? shadow(rng) : 0.0;
    fade = ch.fading ? rayleigh(rng) : 1.0;
    return std::pow(10.0, -(loss + sh) / 10.0) * fade;
  };

  ChannelDraw out;
  out.positions = placement.positions;
  out.bs_path_loss_db.resize(n);
  out.bs_shadow_db.resize(n);
  out.bs_fading.resize(n);
  out.bs_rate.resize(n);
  const double bs_watts = dbm_to_watts(ch.bs_tx_dbm);
  for (Index i = 0; i < n; ++i) {
    const Point p = placement.positions[static_cast<std::size_t>(i)];
    const double g = draw(std::hypot(p.x, p.y), out.bs_path_loss_db(i), out.bs_shadow_db(i), out.bs_fading(i));
    out.bs_rate(i) = shannon_rate(ch, bs_watts, g);
  }

  out.d2d_path_loss_db = MatrixXd::Zero(n, n);
  out.d2d_shadow_db = MatrixXd::Zero(n, n);
  out.d2d_fading = MatrixXd::Ones(n, n);
  out.d2d_rate = MatrixXd::Ones(n, n);
  const double d2d_watts = ch.d2d_tx_mw / 1000.0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const Point a = placement.positions[static_cast<std::size_t>(i)];
      const Point b = placement.positions[static_cast<std::size_t>(j)];
      const double g = draw(std::hypot(a.x - b.x, a.y - b.y), out.d2d_path_loss_db(i, j), out.d2d_shadow_db(i, j),
                            out.d2d_fading(i, j));
      out.d2d_rate(i, j) = shannon_rate(ch, d2d_watts, g);
    }
  }

  if (cfg.idealized && cfg.layout == Layout::clustered) {
    const int k = cfg.n_clusters;
    VectorXd bs_sum = VectorXd::Zero(k), bs_count = VectorXd::Zero(k);
    MatrixXd pair_sum = MatrixXd::Zero(k, k), pair_count = MatrixXd::Zero(k, k);
    auto cluster = [&](Index i) { return placement.cluster_of[static_cast<std::size_t>(i)]; };
    for (Index i = 0; i < n; ++i) {
      bs_sum(cluster(i)) += out.bs_rate(i);
      bs_count(cluster(i)) += 1;
      for (Index j = 0; j < n; ++j) {
        if (i == j) continue;
        const int a = std::min(cluster(i), cluster(j));
        const int b = std::max(cluster(i), cluster(j));
        pair_sum(a, b) += out.d2d_rate(i, j);
        pair_count(a, b) += 1;
      }
    }
    for (Index i = 0; i < n; ++i) {
      out.bs_rate(i) = bs_sum(cluster(i)) / bs_count(cluster(i));
      for (Index j = 0; j < n; ++j) {
        if (i == j) continue;
        const int a = std::min(cluster(i), cluster(j));
        const int b = std::max(cluster(i), cluster(j));
        out.d2d_rate(i, j) = pair_sum(a, b) / pair_count(a, b);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Demands

VectorXd zipf_probabilities(int n_files, double exponent) {
  if (n_files < 1) throw ConfigError("Zipf law needs at least one file");
  VectorXd p(n_files);
  for (int i = 0; i < n_files; ++i) p(i) = std::pow(1.0 / (i + 1), exponent);
  return p / p.sum();
}

Demands sample_demands(const ScenarioConfig& cfg, Rng& rng) {
  const VectorXd p = zipf_probabilities(cfg.n_files, cfg.zipf_exponent);
  std::discrete_distribution<int> pick(p.data(), p.data() + p.size());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Demands d;
  for (int i = 0; i < cfg.n_users; ++i) {
    const bool requests = unit(rng) < cfg.requester_fraction;
    const int file = pick(rng);
    d.request.push_back(requests ? file : -1);
  }
  d.popularity.resize(static_cast<std::size_t>(cfg.n_files));
  for (int m = 0; m < cfg.n_files; ++m) d.popularity[static_cast<std::size_t>(m)] = m;
  return d;
}

Scenario build_instance(const ScenarioConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  Placement placement = sample_positions(cfg, rng);
  ChannelDraw channel = realize_rates(cfg, placement, rng);
  Demands demands = sample_demands(cfg, rng);

  const auto steps = static_cast<int>(std::floor((cfg.file_size_max_bits - cfg.file_size_min_bits) /
                                                 cfg.file_size_step_bits + 1e-9));
  std::uniform_int_distribution<int> size_step(0, steps);
  NetworkParams p;
  p.file_sizes.resize(cfg.n_files);
  for (int m = 0; m < cfg.n_files; ++m) {
    p.file_sizes(m) = cfg.file_size_min_bits + size_step(rng) * cfg.file_size_step_bits;
  }
  const Index n = cfg.n_users;
  p.request = demands.request;
  p.bs_rate = channel.bs_rate;
  p.d2d_rate = channel.d2d_rate;
  p.bs_rx_power = VectorXd::Constant(n, cfg.channel.relay_rx_mw / 1000.0);
  p.d2d_tx_power = MatrixXd::Constant(n, n, cfg.channel.d2d_tx_mw / 1000.0);
  p.d2d_rx_power = MatrixXd::Constant(n, n, cfg.channel.d2d_rx_mw / 1000.0);
  p.d2d_tx_power.diagonal().setZero();
  p.d2d_rx_power.diagonal().setZero();
  p.energy_budget = VectorXd::Constant(n, cfg.energy_budget_j);
  p.valuation = MatrixXd::Constant(n, cfg.n_files, cfg.valuation);
  p.cost_coeff = cfg.cost_coeff;
  return {NetworkInstance(std::move(p)), std::move(channel), std::move(placement), std::move(demands.popularity)};
}

// ---------------------------------------------------------------------------
// Synthetic symmetric instances

NetworkInstance symmetric_instance(const SymmetricParams& sym, int n_users, int n_requesters) {
  if (n_requesters < 0 || n_requesters > n_users) throw ConfigError("requester count out of range");
  const Index n = n_users;
  NetworkParams p;
  p.file_sizes = VectorXd::Ones(1);
  p.request.assign(static_cast<std::size_t>(n_users), -1);
  for (int i = 0; i < n_requesters; ++i) p.request[static_cast<std::size_t>(i)] = 0;
  p.bs_rate = VectorXd::Constant(n, sym.bs_rate);
  p.d2d_rate = MatrixXd::Constant(n, n, sym.d2d_rate);
  p.bs_rx_power = VectorXd::Constant(n, sym.bs_power);
  p.d2d_tx_power = MatrixXd::Constant(n, n, sym.tx_power);
  p.d2d_rx_power = MatrixXd::Constant(n, n, sym.rx_power);
  p.energy_budget = VectorXd::Constant(n, kSlackBudget);
  p.valuation = MatrixXd::Zero(n, 1);
  p.cost_coeff = 1.0;
  return NetworkInstance(std::move(p));
}

NetworkInstance clustered_instance(const ClusterSymmetry& sym) {
  sym.validate();
  std::vector<int> cluster;
  for (int k = 0; k < sym.n_clusters(); ++k) cluster.insert(cluster.end(), static_cast<std::size_t>(sym.sizes[static_cast<std::size_t>(k)]), k);
  const auto n = static_cast<Index>(cluster.size());
  NetworkParams p;
  p.file_sizes = VectorXd::Ones(1);
  p.request.assign(cluster.size(), 0);
  p.bs_rate.resize(n);
  p.bs_rx_power.resize(n);
  p.d2d_rate = MatrixXd::Ones(n, n);
  p.d2d_tx_power = MatrixXd::Zero(n, n);
  p.d2d_rx_power = MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    const int k = cluster[static_cast<std::size_t>(i)];
    p.bs_rate(i) = sym.bs_rate(k);
    p.bs_rx_power(i) = sym.bs_power(k);
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const int l = cluster[static_cast<std::size_t>(j)];
      if (k == l) {
        p.d2d_rate(i, j) = sym.d2d_rate(k);
        p.d2d_tx_power(i, j) = sym.tx_power(k);
        p.d2d_rx_power(i, j) = sym.rx_power(k);
      } else {
        p.d2d_rate(i, j) = sym.pair_rate(k, l);
        p.d2d_tx_power(i, j) = sym.pair_tx_power(k, l);
        p.d2d_rx_power(i, j) = sym.pair_rx_power(k, l);
      }
    }
  }
  p.energy_budget = VectorXd::Constant(n, kSlackBudget);
  p.valuation = MatrixXd::Zero(n, 1);
  p.cost_coeff = 1.0;
  return NetworkInstance(std::move(p));
}

ClusterSymmetry sample_stable_clusters(const std::vector<int>& sizes, Rng& rng) {
  const auto n = static_cast<Index>(sizes.size());
  std::uniform_real_distribution<double> bs(0.2, 0.25);
  std::uniform_real_distribution<double> intra(2.0, 5.0);
  std::uniform_real_distribution<double> inter(0.1, 0.15);
  ClusterSymmetry sym;
  sym.sizes = sizes;
  sym.bs_power = VectorXd::Constant(n, 0.25);
  sym.tx_power = VectorXd::Constant(n, 0.35);
  sym.rx_power = VectorXd::Constant(n, 0.2);
  sym.bs_rate.resize(n);
  sym.d2d_rate.resize(n);
  for (Index k = 0; k < n; ++k) {
    sym.bs_rate(k) = bs(rng);
    sym.d2d_rate(k) = intra(rng);
  }
  sym.pair_rate = MatrixXd::Ones(n, n);
  sym.pair_tx_power = MatrixXd::Constant(n, n, 0.35);
  sym.pair_rx_power = MatrixXd::Constant(n, n, 0.2);
  for (Index k = 0; k < n; ++k) {
    for (Index l = k + 1; l < n; ++l) {
      sym.pair_rate(k, l) = sym.pair_rate(l, k) = inter(rng);
    }
  }
  sym.validate();
  return sym;
}

Partition cluster_partition(const std::vector<int>& sizes) {
  std::vector<int> labels;
  for (std::size_t k = 0; k < sizes.size(); ++k) labels.insert(labels.end(), static_cast<std::size_t>(sizes[k]), static_cast<int>(k));
  return Partition::from_labels(labels);
}

}  // namespace d2d
