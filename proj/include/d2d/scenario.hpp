#pragma once

#include "d2d/model.hpp"
#include "d2d/stability.hpp"

#include <json.hpp>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace d2d {

using Rng = std::mt19937_64;

struct ChannelParams {
  double noise_psd_dbm_hz = -174.0;
  double shadow_sigma_db = 8.0;
  double path_loss_exponent = 3.3;
  double ref_loss_db_at_1m = 38.5;
  double bs_tx_dbm = 40.0;
  double d2d_tx_mw = 350.0;    // radiated and consumed by a transmitting relay
  double relay_rx_mw = 250.0;  // consumed while downloading from the BS
  double d2d_rx_mw = 200.0;    // consumed while receiving over D2D
  double bandwidth_hz = 10e6;
  bool shadowing = true;
  bool fading = true;
};

enum class Layout { random, clustered };

struct ScenarioConfig {
  Layout layout = Layout::random;
  double cell_radius_m = 300.0;
  int n_clusters = 4;
  double cluster_radius_m = 60.0;
  double center_distance_m = 200.0;
  int n_users = 40;
  int n_files = 50;
  double zipf_exponent = 0.5;
  double file_size_min_bits = 1e6;
  double file_size_max_bits = 10e6;
  double file_size_step_bits = 1e6;  // sizes are drawn from min, min+step, .., max
  double requester_fraction = 1.0;
  double energy_budget_j = 1e6;
  double valuation = 0.0;
  double cost_coeff = 1.0;
  bool idealized = false;  // replace clustered per-link rates by group means
  ChannelParams channel;
  std::uint64_t seed = 1;

  /// Throws ConfigError on any invalid field.
  void validate() const;
};

ScenarioConfig scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScenarioConfig& cfg);
ScenarioConfig load_scenario(const std::string& path);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Hexagon with circumradius `radius` centered at the origin, vertices on
/// the x axis.
bool inside_hexagon(Point p, double radius);

struct Placement {
  std::vector<Point> positions;
  std::vector<int> cluster_of;  // -1 in the random layout
};

Placement sample_positions(const ScenarioConfig& cfg, Rng& rng);

/// One realization of every link. Gains are linear power gains; the dB
/// parts are kept for inspection.
struct ChannelDraw {
  std::vector<Point> positions;
  VectorXd bs_path_loss_db, bs_shadow_db, bs_fading;
  MatrixXd d2d_path_loss_db, d2d_shadow_db, d2d_fading;
  VectorXd bs_rate;   // bits/s
  MatrixXd d2d_rate;  // bits/s, (transmitter, receiver)
};

/// Path loss in dB at distance d (clamped to at least 1 m).
double path_loss_db(const ChannelParams& ch, double distance_m);
/// Shannon rate for a transmit power and a linear channel gain, floored at
/// 1 bit/s so every rate stays positive.
double shannon_rate(const ChannelParams& ch, double tx_watts, double gain);

ChannelDraw realize_rates(const ScenarioConfig& cfg, const Placement& placement, Rng& rng);

/// Request probability of each file, most popular first.
VectorXd zipf_probabilities(int n_files, double exponent);

struct Demands {
  std::vector<int> request;     // file per user, -1 for none
  std::vector<int> popularity;  // file ids, most popular first
};

Demands sample_demands(const ScenarioConfig& cfg, Rng& rng);

struct Scenario {
  NetworkInstance instance;
  ChannelDraw channel;
  Placement placement;
  std::vector<int> popularity;
};

/// Everything drawn from one RNG stream seeded by cfg.seed, in the order
/// positions, links, demands, file sizes.
Scenario build_instance(const ScenarioConfig& cfg);

/// Single-file instance where every link and user is identical. The first
/// `n_requesters` users request the file of size 1; budgets are slack.
NetworkInstance symmetric_instance(const SymmetricParams& sym, int n_users, int n_requesters);

/// Instance whose rates and powers are exactly those of `sym`, one unit
/// file requested by every user, slack budgets, zero valuations and a = 1.
/// Users are numbered cluster by cluster.
NetworkInstance clustered_instance(const ClusterSymmetry& sym);

/// Random cluster-level parameters with cheap in-cluster D2D, moderately
/// slow BS links and expensive cross-cluster D2D, so that the cluster
/// partition meets the sufficient stability conditions.
ClusterSymmetry sample_stable_clusters(const std::vector<int>& sizes, Rng& rng);

/// The cluster partition of clustered_instance(sym).
Partition cluster_partition(const std::vector<int>& sizes);

}  // namespace d2d
