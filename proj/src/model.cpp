#include "d2d/model.hpp"

#include "d2d/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace d2d {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("invalid network instance: " + what);
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.allFinite();
}

}  // namespace

NetworkInstance::NetworkInstance(NetworkParams params) : params_(std::move(params)) {
  const auto n = static_cast<Index>(params_.request.size());
  const Index m = params_.file_sizes.size();
  require(n >= 1, "at least one user");
  require(n <= Coalition::kMaxUsers, "at most 63 users");
  require(m >= 1, "at least one file");
  require(params_.bs_rate.size() == n && params_.bs_rx_power.size() == n &&
              params_.energy_budget.size() == n,
          "per-user vectors must have one entry per user");
  require(params_.d2d_rate.rows() == n && params_.d2d_rate.cols() == n &&
              params_.d2d_tx_power.rows() == n && params_.d2d_tx_power.cols() == n &&
              params_.d2d_rx_power.rows() == n && params_.d2d_rx_power.cols() == n,
          "link matrices must be N x N");
  require(params_.valuation.rows() == n && params_.valuation.cols() == m,
          "valuation must be N x M");
  require(all_finite(params_.file_sizes) && (params_.file_sizes.array() > 0).all(),
          "file sizes must be finite and positive");
  require(all_finite(params_.bs_rate) && (params_.bs_rate.array() > 0).all(),
          "BS rates must be finite and positive");
  require((params_.bs_rx_power.array() >= 0).all() && all_finite(params_.bs_rx_power),
          "BS reception powers must be non-negative");
  for (Index i = 0; i < n; ++i) {
    const int r = params_.request[static_cast<std::size_t>(i)];
    require(r >= -1 && r < m, "request index out of range");
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      require(std::isfinite(params_.d2d_rate(i, j)) && params_.d2d_rate(i, j) > 0,
              "D2D rates must be finite and positive");
      require(params_.d2d_tx_power(i, j) >= 0 && params_.d2d_rx_power(i, j) >= 0,
              "D2D powers must be non-negative");
    }
  }
  require((params_.energy_budget.array() >= 0).all(), "budgets must be non-negative");
  require(std::isfinite(params_.cost_coeff) && params_.cost_coeff > 0, "cost coefficient a must be positive");
}

Coalition NetworkInstance::requesters(Coalition s, int m) const {
  Coalition out;
  s.for_each([&](int i) {
    if (request_of(i) == m) out = out | Coalition::singleton(i);
  });
  return out;
}

std::vector<int> NetworkInstance::requested_files(Coalition s) const {
  std::vector<int> files;
  s.for_each([&](int i) {
    if (request_of(i) >= 0) files.push_back(request_of(i));
  });
  std::sort(files.begin(), files.end());
  files.erase(std::unique(files.begin(), files.end()), files.end());
  return files;
}

double NetworkInstance::total_valuation(Coalition s) const {
  double sum = 0.0;
  s.for_each([&](int i) {
    if (request_of(i) >= 0) sum += valuation(i, request_of(i));
  });
  return sum;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

nlohmann::json vec_json(const VectorXd& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

nlohmann::json mat_json(const MatrixXd& m) {
  nlohmann::json a = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    a.push_back(std::move(row));
  }
  return a;
}

VectorXd json_vec(const nlohmann::json& a, Index n, const char* what) {
  if (!a.is_array() || static_cast<Index>(a.size()) != n) {
    throw ConfigError(std::string("instance field '") + what + "' must be an array of length " +
                      std::to_string(n));
  }
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) v(i) = a[static_cast<std::size_t>(i)].get<double>();
  return v;
}

MatrixXd json_mat(const nlohmann::json& a, Index rows, Index cols, const char* what) {
  if (!a.is_array() || static_cast<Index>(a.size()) != rows) {
    throw ConfigError(std::string("instance field '") + what + "' must have " + std::to_string(rows) + " rows");
  }
  MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const auto& row = a[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      throw ConfigError(std::string("instance field '") + what + "' must have " + std::to_string(cols) +
                        " columns");
    }
    for (Index j = 0; j < cols; ++j) m(i, j) = row[static_cast<std::size_t>(j)].get<double>();
  }
  return m;
}

}  // namespace

nlohmann::json to_json(const NetworkInstance& inst) {
  const auto& p = inst.params();
  nlohmann::json j;
  j["users"] = inst.n_users();
  nlohmann::json files = nlohmann::json::array();
  for (int m = 0; m < inst.n_files(); ++m) files.push_back({{"id", m + 1}, {"size_bits", p.file_sizes(m)}});
  j["files"] = std::move(files);
  nlohmann::json demand = nlohmann::json::array();
  for (int i = 0; i < inst.n_users(); ++i) {
    std::vector<int> row(static_cast<std::size_t>(inst.n_files()), 0);
    if (inst.request_of(i) >= 0) row[static_cast<std::size_t>(inst.request_of(i))] = 1;
    demand.push_back(row);
  }
  j["demand"] = std::move(demand);
  j["rates"] = {{"bs", vec_json(p.bs_rate)}, {"d2d", mat_json(p.d2d_rate)}};
  j["powers"] = {{"bs_rx", vec_json(p.bs_rx_power)},
                 {"d2d_tx", mat_json(p.d2d_tx_power)},
                 {"d2d_rx", mat_json(p.d2d_rx_power)}};
  j["budgets"] = vec_json(p.energy_budget);
  j["valuations"] = mat_json(p.valuation);
  j["cost_coeff"] = p.cost_coeff;
  return j;
}

NetworkInstance instance_from_json(const nlohmann::json& j) {
  try {
    NetworkParams p;
    const Index n = j.at("users").get<Index>();
    if (n < 1) throw ConfigError("instance needs at least one user");
    const auto& files = j.at("files");
    if (!files.is_array() || files.empty()) throw ConfigError("instance needs at least one file");
    const auto m = static_cast<Index>(files.size());
    p.file_sizes.resize(m);
    for (Index k = 0; k < m; ++k) {
      const auto& f = files[static_cast<std::size_t>(k)];
      if (f.at("id").get<Index>() != k + 1) throw ConfigError("file ids must be 1..M in order");
      p.file_sizes(k) = f.at("size_bits").get<double>();
    }
    const MatrixXd demand = json_mat(j.at("demand"), n, m, "demand");
    p.request.assign(static_cast<std::size_t>(n), -1);
    for (Index i = 0; i < n; ++i) {
      for (Index k = 0; k < m; ++k) {
        if (demand(i, k) == 0.0) continue;
        if (demand(i, k) != 1.0) throw ConfigError("demand entries must be 0 or 1");
        if (p.request[static_cast<std::size_t>(i)] >= 0) {
          throw ConfigError("user " + std::to_string(i + 1) + " requests more than one file");
        }
        p.request[static_cast<std::size_t>(i)] = static_cast<int>(k);
      }
    }
    const auto& rates = j.at("rates");
    p.bs_rate = json_vec(rates.at("bs"), n, "rates.bs");
    p.d2d_rate = json_mat(rates.at("d2d"), n, n, "rates.d2d");
    const auto& powers = j.at("powers");
    p.bs_rx_power = json_vec(powers.at("bs_rx"), n, "powers.bs_rx");
    p.d2d_tx_power = json_mat(powers.at("d2d_tx"), n, n, "powers.d2d_tx");
    p.d2d_rx_power = json_mat(powers.at("d2d_rx"), n, n, "powers.d2d_rx");
    p.energy_budget = json_vec(j.at("budgets"), n, "budgets");
    p.valuation = json_mat(j.at("valuations"), n, m, "valuations");
    p.cost_coeff = j.at("cost_coeff").get<double>();
    return NetworkInstance(std::move(p));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed instance JSON: ") + e.what());
  }
}

NetworkInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open instance file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse " + path + ": " + e.what());
  }
  return instance_from_json(j);
}

void save_instance(const NetworkInstance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write instance file: " + path);
  out << to_json(inst).dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Energies

double multicast_rate(const NetworkInstance& inst, int relay, Coalition receivers) {
  const Coalition others = receivers.without(relay);
  if (others.empty()) return kEmptyMulticastRate;
  double rate = kInfinity;
  others.for_each([&](int j) { rate = std::min(rate, inst.d2d_rate(relay, j)); });
  return rate;
}

double multicast_power(const NetworkInstance& inst, int relay, Coalition receivers) {
  double power = 0.0;
  receivers.without(relay).for_each([&](int j) { power = std::max(power, inst.tx_power(relay, j)); });
  return power;
}

namespace {

void require_member(const AssignmentPlan& plan, int i) {
  if (!plan.coalition.contains(i)) {
    throw ConfigError("user " + std::to_string(i + 1) + " is not in coalition " + plan.coalition.to_string());
  }
}

}  // namespace

double relay_download_energy(const NetworkInstance& inst, const AssignmentPlan& plan, int i) {
  require_member(plan, i);
  double e = 0.0;
  for (int m = 0; m < inst.n_files(); ++m) {
    e += plan.alpha(i, m) * inst.file_size(m) * inst.bs_rx_power(i) / inst.bs_rate(i);
  }
  return e;
}

double relay_multicast_energy(const NetworkInstance& inst, const AssignmentPlan& plan, int i) {
  require_member(plan, i);
  double e = 0.0;
  for (int m = 0; m < inst.n_files(); ++m) {
    const double a = plan.alpha(i, m);
    if (a == 0.0) continue;
    const Coalition sm = inst.requesters(plan.coalition, m);
    if (sm.without(i).empty()) continue;  // d_m(S_m \ {i}) = 0
    e += a * inst.file_size(m) * multicast_power(inst, i, sm) / multicast_rate(inst, i, sm);
  }
  return e;
}

double destination_receive_energy(const NetworkInstance& inst, const AssignmentPlan& plan, int i, int m) {
  require_member(plan, i);
  if (!inst.demands(i, m)) {
    throw ConfigError("user " + std::to_string(i + 1) + " does not request file " + std::to_string(m + 1));
  }
  const Coalition sm = inst.requesters(plan.coalition, m);
  double e = 0.0;
  plan.coalition.without(i).for_each([&](int j) {
    const double a = plan.alpha(j, m);
    if (a != 0.0) e += a * inst.file_size(m) * inst.rx_power(j, i) / multicast_rate(inst, j, sm);
  });
  return e;
}

double file_transfer_energy(const NetworkInstance& inst, const AssignmentPlan& plan, int m) {
  const Coalition sm = inst.requesters(plan.coalition, m);
  double e = 0.0;
  plan.coalition.for_each([&](int i) {
    const double a = plan.alpha(i, m);
    if (a == 0.0) return;
    e += a * inst.file_size(m) * inst.bs_rx_power(i) / inst.bs_rate(i);
    if (!sm.without(i).empty()) {
      e += a * inst.file_size(m) * multicast_power(inst, i, sm) / multicast_rate(inst, i, sm);
    }
  });
  sm.for_each([&](int i) { e += destination_receive_energy(inst, plan, i, m); });
  return e;
}

double unit_relay_load(const NetworkInstance& inst, Coalition s, int relay, int m) {
  const Coalition sm = inst.requesters(s, m);
  double per_bit = inst.bs_rx_power(relay) / inst.bs_rate(relay);
  if (!sm.without(relay).empty()) per_bit += multicast_power(inst, relay, sm) / multicast_rate(inst, relay, sm);
  return inst.file_size(m) * per_bit;
}

double unit_transfer_cost(const NetworkInstance& inst, Coalition s, int relay, int m) {
  const Coalition sm = inst.requesters(s, m);
  const double rate = multicast_rate(inst, relay, sm);
  double receive = 0.0;
  sm.without(relay).for_each([&](int j) { receive += inst.rx_power(relay, j); });
  return unit_relay_load(inst, s, relay, m) + inst.file_size(m) * receive / rate;
}

double AssignmentPlan::total_energy() const {
  double sum = 0.0;
  for (const auto& e : energies) sum += e.total();
  return sum;
}

AssignmentPlan make_plan(const NetworkInstance& inst, Coalition s, MatrixXd alpha, RelayMode mode) {
  if (alpha.rows() != inst.n_users() || alpha.cols() != inst.n_files()) {
    throw ConfigError("assignment matrix must be N x M");
  }
  AssignmentPlan plan{s, mode, std::move(alpha), {}};
  plan.energies.assign(static_cast<std::size_t>(inst.n_users()), UserEnergy{});
  s.for_each([&](int i) {
    auto& e = plan.energies[static_cast<std::size_t>(i)];
    e.download = relay_download_energy(inst, plan, i);
    e.multicast = relay_multicast_energy(inst, plan, i);
    const int m = inst.request_of(i);
    if (m >= 0) e.receive = destination_receive_energy(inst, plan, i, m);
  });
  return plan;
}

std::optional<std::string> plan_violation(const NetworkInstance& inst, const AssignmentPlan& plan,
                                          double tol) {
  for (int m = 0; m < inst.n_files(); ++m) {
    const double want = inst.requesters(plan.coalition, m).empty() ? 0.0 : 1.0;
    double got = 0.0;
    for (int i = 0; i < inst.n_users(); ++i) {
      const double a = plan.alpha(i, m);
      if (!plan.coalition.contains(i) && a != 0.0) {
        return "user " + std::to_string(i + 1) + " outside the coalition relays file " + std::to_string(m + 1);
      }
      if (a < -tol || a > 1.0 + tol) return "fraction outside [0,1]";
      if (plan.mode == RelayMode::binary && a != 0.0 && a != 1.0) return "non-binary fraction in binary plan";
      got += a;
    }
    if (std::abs(got - want) > tol) return "file " + std::to_string(m + 1) + " coverage is " + std::to_string(got);
  }
  std::optional<std::string> over;
  plan.coalition.for_each([&](int i) {
    const auto& e = plan.energies[static_cast<std::size_t>(i)];
    if (!over && e.download + e.multicast > inst.budget(i) + tol * std::max(1.0, inst.budget(i))) {
      over = "relay " + std::to_string(i + 1) + " exceeds its energy budget";
    }
  });
  return over;
}

// ---------------------------------------------------------------------------
// Values

CoalitionValue coalition_value(const NetworkInstance& inst, Coalition s, RelayMode mode) {
  if (s.empty()) throw ConfigError("coalition_value needs a non-empty coalition");
  if (!s.subset_of(inst.everyone())) throw ConfigError("coalition has users outside the instance");
  CoalitionValue out;
  if (mode == RelayMode::fractional) {
    ModelASolution sol = solve_model_a_lp(inst, s);
    if (!sol.feasible) {
      out.plan = make_plan(inst, s, MatrixXd::Zero(inst.n_users(), inst.n_files()), mode);
      return out;
    }
    out.feasible = true;
    out.min_energy = sol.min_energy;
    out.plan = std::move(sol.plan);
  } else {
    auto sol = solve_model_b_exact(inst, s);
    if (!sol) {
      out.plan = make_plan(inst, s, MatrixXd::Zero(inst.n_users(), inst.n_files()), mode);
      return out;
    }
    out.feasible = true;
    out.plan = to_plan(inst, *sol);
    out.min_energy = sol->energy;
  }
  out.value = inst.total_valuation(s) - inst.cost_coeff() * out.min_energy;
  return out;
}

bool SymmetricParams::d2d_dominates() const {
  return bs_rate / d2d_rate < bs_power / (rx_power + tx_power);
}

double special_case_cost(const SymmetricParams& sym, int n_requesters) {
  if (!sym.d2d_dominates()) {
    throw ConfigError("closed form needs R_s/R_D2D < P_s/(P_Rx+P_Tx)");
  }
  if (n_requesters < 0) throw ConfigError("negative requester count");
  if (n_requesters == 0) return 0.0;
  const double download = sym.bs_power / sym.bs_rate;
  if (n_requesters == 1) return download;
  return download + (n_requesters - 1) * sym.rx_power / sym.d2d_rate + sym.tx_power / sym.d2d_rate;
}

double direct_download_energy(const NetworkInstance& inst, Coalition s) {
  double e = 0.0;
  s.for_each([&](int i) {
    const int m = inst.request_of(i);
    if (m >= 0) e += inst.file_size(m) * inst.bs_rx_power(i) / inst.bs_rate(i);
  });
  return e;
}

}  // namespace d2d
