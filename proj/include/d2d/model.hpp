#pragma once

#include "d2d/coalition.hpp"
#include "d2d/types.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace d2d {

/// Raw per-user and per-link parameters of one time slot.
///
/// Users and files are 0-based here; the JSON form and every printed id are
/// 1-based. Link matrices are indexed (relay, receiver); diagonals are unused.
struct NetworkParams {
  VectorXd file_sizes;       // X_m, bits
  std::vector<int> request;  // requested file per user, -1 for none
  VectorXd bs_rate;          // R_s,i, bits/s
  MatrixXd d2d_rate;         // R_D2D,i,j, bits/s
  VectorXd bs_rx_power;      // P_s,i, W consumed while downloading from the BS
  MatrixXd d2d_tx_power;     // P_Tx,i,j, W
  MatrixXd d2d_rx_power;     // P_Rx,i,j, W consumed at receiver j listening to relay i
  VectorXd energy_budget;    // E_i, J available for relaying
  MatrixXd valuation;        // U_i,m
  double cost_coeff = 1.0;   // a, utility per joule
};

/// Validated, immutable game input.
class NetworkInstance {
 public:
  explicit NetworkInstance(NetworkParams params);

  [[nodiscard]] int n_users() const { return static_cast<int>(params_.request.size()); }
  [[nodiscard]] int n_files() const { return static_cast<int>(params_.file_sizes.size()); }
  [[nodiscard]] const NetworkParams& params() const { return params_; }

  [[nodiscard]] double file_size(int m) const { return params_.file_sizes(m); }
  [[nodiscard]] int request_of(int i) const { return params_.request[static_cast<std::size_t>(i)]; }
  [[nodiscard]] bool demands(int i, int m) const { return request_of(i) == m; }
  [[nodiscard]] double bs_rate(int i) const { return params_.bs_rate(i); }
  [[nodiscard]] double d2d_rate(int i, int j) const { return params_.d2d_rate(i, j); }
  [[nodiscard]] double bs_rx_power(int i) const { return params_.bs_rx_power(i); }
  [[nodiscard]] double tx_power(int i, int j) const { return params_.d2d_tx_power(i, j); }
  [[nodiscard]] double rx_power(int relay, int receiver) const { return params_.d2d_rx_power(relay, receiver); }
  [[nodiscard]] double budget(int i) const { return params_.energy_budget(i); }
  [[nodiscard]] double valuation(int i, int m) const { return params_.valuation(i, m); }
  [[nodiscard]] double cost_coeff() const { return params_.cost_coeff; }

  [[nodiscard]] Coalition everyone() const { return Coalition::all(n_users()); }
  /// S_m: members of `s` requesting file m.
  [[nodiscard]] Coalition requesters(Coalition s, int m) const;
  /// Files requested by at least one member of `s`, increasing id.
  [[nodiscard]] std::vector<int> requested_files(Coalition s) const;
  /// Sum of d_i,m U_i,m over members of `s`.
  [[nodiscard]] double total_valuation(Coalition s) const;

 private:
  NetworkParams params_;
};

nlohmann::json to_json(const NetworkInstance& inst);
NetworkInstance instance_from_json(const nlohmann::json& j);
NetworkInstance load_instance(const std::string& path);
void save_instance(const NetworkInstance& inst, const std::string& path);

enum class RelayMode { fractional, binary };

struct UserEnergy {
  double download = 0.0;   // E_s,i
  double multicast = 0.0;  // E_t,i
  double receive = 0.0;    // sum over requested m of E^m_r,i
  [[nodiscard]] double total() const { return download + multicast + receive; }
};

/// Fraction of each file sent to each relay of a coalition, plus the
/// per-user energies that assignment induces.
struct AssignmentPlan {
  Coalition coalition;
  RelayMode mode = RelayMode::fractional;
  MatrixXd alpha;                   // n_users x n_files, zero outside the coalition
  std::vector<UserEnergy> energies;  // indexed by user, zero outside the coalition

  [[nodiscard]] double total_energy() const;
};

/// Builds a plan and fills its per-user energies.
AssignmentPlan make_plan(const NetworkInstance& inst, Coalition s, MatrixXd alpha,
                         RelayMode mode = RelayMode::fractional);

/// Checks the file-coverage rows, the binary restriction and the relay
/// budgets; returns a description of the first violation.
std::optional<std::string> plan_violation(const NetworkInstance& inst, const AssignmentPlan& plan,
                                          double tol = 1e-9);

// Rate used when a relay multicasts to nobody but itself. Any positive value
// works since the d_m(S_m \ {i}) factor zeroes the term it appears in.
inline constexpr double kEmptyMulticastRate = 1.0;

/// Slowest D2D rate from `relay` to `receivers` minus the relay itself.
double multicast_rate(const NetworkInstance& inst, int relay, Coalition receivers);
/// Power needed to reach every receiver: the largest per-link transmit power.
double multicast_power(const NetworkInstance& inst, int relay, Coalition receivers);

double relay_download_energy(const NetworkInstance& inst, const AssignmentPlan& plan, int i);
double relay_multicast_energy(const NetworkInstance& inst, const AssignmentPlan& plan, int i);
double destination_receive_energy(const NetworkInstance& inst, const AssignmentPlan& plan, int i, int m);
double file_transfer_energy(const NetworkInstance& inst, const AssignmentPlan& plan, int m);

/// Energy of moving one whole file m through relay i inside coalition s:
/// download, multicast and every destination's reception.
double unit_transfer_cost(const NetworkInstance& inst, Coalition s, int relay, int m);
/// The part of unit_transfer_cost charged against the relay's budget.
double unit_relay_load(const NetworkInstance& inst, Coalition s, int relay, int m);

struct CoalitionValue {
  double value = -kInfinity;  // -inf marks an infeasible coalition
  double min_energy = kInfinity;
  bool feasible = false;
  AssignmentPlan plan;
};

/// v(S) under Model A (LP) or Model B (exact search).
CoalitionValue coalition_value(const NetworkInstance& inst, Coalition s,
                               RelayMode mode = RelayMode::fractional);

/// Parameters of the fully symmetric single-cell game.
struct SymmetricParams {
  double bs_rate = 1.0;
  double d2d_rate = 1.0;
  double bs_power = 1.0;
  double tx_power = 1.0;
  double rx_power = 1.0;

  /// R_s / R_D2D < P_s / (P_Rx + P_Tx).
  [[nodiscard]] bool d2d_dominates() const;
};

/// Closed-form optimal cost of one unit-size file with `n_requesters`
/// requesters in the symmetric game. Throws ConfigError when D2D does not
/// dominate the BS link, since the form is then not guaranteed.
double special_case_cost(const SymmetricParams& sym, int n_requesters);

/// Energy when every requester downloads its own file from the BS.
double direct_download_energy(const NetworkInstance& inst, Coalition s);

}  // namespace d2d
