#include "d2d/optimizer.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace d2d {

namespace {

bool fits(double load, double remaining) {
  return load <= remaining + 1e-9 * std::max(1.0, std::abs(remaining));
}

int index_of(const std::vector<int>& v, int value) {
  const auto it = std::lower_bound(v.begin(), v.end(), value);
  return (it != v.end() && *it == value) ? static_cast<int>(it - v.begin()) : -1;
}

// Energy of a complete or partial binary assignment, summed in file order so
// every solver reports bit-identical totals for identical assignments.
double assignment_energy(const CoalitionCosts& costs, const std::map<int, int>& relay_of) {
  double e = 0.0;
  for (const auto& [file, relay] : relay_of) {
    e += costs.unit_cost(index_of(costs.relays, relay), index_of(costs.files, file));
  }
  return e;
}

BinaryAssignment finish(const CoalitionCosts& costs, std::map<int, int> relay_of, std::vector<int> stranded) {
  BinaryAssignment out;
  out.coalition = costs.coalition;
  out.energy = assignment_energy(costs, relay_of);
  out.relay_of = std::move(relay_of);
  std::sort(stranded.begin(), stranded.end());
  out.stranded = std::move(stranded);
  return out;
}

// Relay rows of one file column ordered by (cost, user id).
std::vector<int> rows_by_cost(const CoalitionCosts& costs, int col) {
  std::vector<int> rows(costs.relays.size());
  std::iota(rows.begin(), rows.end(), 0);
  std::stable_sort(rows.begin(), rows.end(),
                   [&](int a, int b) { return costs.unit_cost(a, col) < costs.unit_cost(b, col); });
  return rows;
}

}  // namespace

CoalitionCosts coalition_costs(const NetworkInstance& inst, Coalition s) {
  CoalitionCosts c;
  c.coalition = s;
  c.relays = s.members();
  c.files = inst.requested_files(s);
  const auto r = static_cast<Index>(c.relays.size());
  const auto f = static_cast<Index>(c.files.size());
  c.unit_cost.resize(r, f);
  c.relay_load.resize(r, f);
  c.budget.resize(r);
  for (Index i = 0; i < r; ++i) {
    const int relay = c.relays[static_cast<std::size_t>(i)];
    c.budget(i) = inst.budget(relay);
    for (Index k = 0; k < f; ++k) {
      const int file = c.files[static_cast<std::size_t>(k)];
      c.unit_cost(i, k) = unit_transfer_cost(inst, s, relay, file);
      c.relay_load(i, k) = unit_relay_load(inst, s, relay, file);
    }
  }
  return c;
}

LpProblem<double> model_a_problem(const CoalitionCosts& costs) {
  const Index r = costs.unit_cost.rows();
  const Index f = costs.unit_cost.cols();
  auto p = LpProblem<double>::unit_box(r * f);
  p.objective = costs.unit_cost.reshaped();

  p.eq_matrix = MatrixXd::Zero(f, r * f);
  p.eq_rhs = VectorXd::Ones(f);
  for (Index k = 0; k < f; ++k) p.eq_matrix.block(k, k * r, 1, r).setOnes();

  // A budget row that even full relaying of every file cannot violate is
  // dropped.
  std::vector<Index> binding;
  for (Index i = 0; i < r; ++i) {
    if (!fits(costs.relay_load.row(i).sum(), costs.budget(i))) binding.push_back(i);
  }
  p.ub_matrix = MatrixXd::Zero(static_cast<Index>(binding.size()), r * f);
  p.ub_rhs.resize(static_cast<Index>(binding.size()));
  for (std::size_t b = 0; b < binding.size(); ++b) {
    const Index i = binding[b];
    const auto row = static_cast<Index>(b);
    for (Index k = 0; k < f; ++k) p.ub_matrix(row, k * r + i) = costs.relay_load(i, k);
    p.ub_rhs(row) = costs.budget(i);
  }
  return p;
}

ModelASolution solve_model_a_lp(const NetworkInstance& inst, Coalition s) {
  if (s.empty()) throw ConfigError("solve_model_a_lp needs a non-empty coalition");
  const CoalitionCosts costs = coalition_costs(inst, s);
  MatrixXd alpha = MatrixXd::Zero(inst.n_users(), inst.n_files());
  ModelASolution out;
  if (costs.files.empty()) {
    out.feasible = true;
    out.min_energy = 0.0;
    out.plan = make_plan(inst, s, std::move(alpha));
    return out;
  }

  const LpResult<double> lp = solve_lp(model_a_problem(costs));
  if (lp.status == LpStatus::unbounded) throw SolverFailure("relaying LP reported unbounded");
  if (lp.status == LpStatus::infeasible) {
    out.plan = make_plan(inst, s, std::move(alpha));
    return out;
  }
  const auto r = static_cast<Index>(costs.relays.size());
  for (std::size_t k = 0; k < costs.files.size(); ++k) {
    for (Index i = 0; i < r; ++i) {
      const double a = std::clamp(lp.x(static_cast<Index>(k) * r + i), 0.0, 1.0);
      alpha(costs.relays[static_cast<std::size_t>(i)], costs.files[k]) = a;
    }
  }
  out.feasible = true;
  out.plan = make_plan(inst, s, std::move(alpha));
  out.min_energy = out.plan.total_energy();
  return out;
}

AssignmentPlan to_plan(const NetworkInstance& inst, const BinaryAssignment& a) {
  MatrixXd alpha = MatrixXd::Zero(inst.n_users(), inst.n_files());
  for (const auto& [file, relay] : a.relay_of) alpha(relay, file) = 1.0;
  return make_plan(inst, a.coalition, std::move(alpha), RelayMode::binary);
}

std::optional<BinaryAssignment> solve_model_b_exact(const NetworkInstance& inst, Coalition s, ExactCaps caps) {
  if (s.empty()) throw ConfigError("solve_model_b_exact needs a non-empty coalition");
  const CoalitionCosts costs = coalition_costs(inst, s);
  const auto n_files = static_cast<int>(costs.files.size());
  const auto n_relays = static_cast<int>(costs.relays.size());
  if (n_files > caps.max_files || n_relays > caps.max_relays) {
    throw CapExceeded("exact single-relay search is capped at " + std::to_string(caps.max_files) + " files and " +
                      std::to_string(caps.max_relays) + " relays (got " + std::to_string(n_files) + " and " +
                      std::to_string(n_relays) + ")");
  }
  if (n_files == 0) return finish(costs, {}, {});

  // Branch on files with the largest cheapest-cost first: they dominate the
  // bound and fail budgets earliest.
  std::vector<int> order(static_cast<std::size_t>(n_files));
  std::iota(order.begin(), order.end(), 0);
  const VectorXd cheapest = costs.unit_cost.colwise().minCoeff();
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return cheapest(a) > cheapest(b); });
  std::vector<double> tail(static_cast<std::size_t>(n_files) + 1, 0.0);
  for (int d = n_files - 1; d >= 0; --d) tail[static_cast<std::size_t>(d)] = tail[static_cast<std::size_t>(d) + 1] + cheapest(order[static_cast<std::size_t>(d)]);
  std::vector<std::vector<int>> candidates;
  for (int col : order) candidates.push_back(rows_by_cost(costs, col));

  VectorXd remaining = costs.budget;
  std::vector<int> choice(static_cast<std::size_t>(n_files), -1);
  std::vector<int> best_choice;
  double best = kInfinity;

  auto leaf_energy = [&] {
    double e = 0.0;
    for (int col = 0; col < n_files; ++col) {
      const auto depth = static_cast<std::size_t>(std::find(order.begin(), order.end(), col) - order.begin());
      e += costs.unit_cost(choice[depth], col);
    }
    return e;
  };

  auto dfs = [&](auto&& self, int depth, double partial) -> void {
    if (depth == n_files) {
      const double e = leaf_energy();
      if (e < best) {
        best = e;
        best_choice = choice;
      }
      return;
    }
    const int col = order[static_cast<std::size_t>(depth)];
    for (int row : candidates[static_cast<std::size_t>(depth)]) {
      const double cost = costs.unit_cost(row, col);
      const double bound = partial + cost + tail[static_cast<std::size_t>(depth) + 1];
      // Candidates are cost-sorted, so the first bound over the incumbent
      // ends the loop; the slack keeps float-level ties explorable.
      if (bound > best + 1e-12 * std::max(1.0, std::abs(best))) break;
      const double load = costs.relay_load(row, col);
      if (!fits(load, remaining(row))) continue;
      remaining(row) -= load;
      choice[static_cast<std::size_t>(depth)] = row;
      self(self, depth + 1, partial + cost);
      remaining(row) += load;
    }
    choice[static_cast<std::size_t>(depth)] = -1;
  };
  dfs(dfs, 0, 0.0);

  if (best_choice.empty()) return std::nullopt;
  std::map<int, int> relay_of;
  for (int d = 0; d < n_files; ++d) {
    const int col = order[static_cast<std::size_t>(d)];
    relay_of[costs.files[static_cast<std::size_t>(col)]] = costs.relays[static_cast<std::size_t>(best_choice[static_cast<std::size_t>(d)])];
  }
  return finish(costs, std::move(relay_of), {});
}

BinaryAssignment greedy_assign(const NetworkInstance& inst, Coalition s, const std::vector<int>& popularity) {
  const CoalitionCosts costs = coalition_costs(inst, s);
  std::vector<int> sequence;
  for (int file : popularity) {
    if (index_of(costs.files, file) >= 0 && std::find(sequence.begin(), sequence.end(), file) == sequence.end()) {
      sequence.push_back(file);
    }
  }
  if (sequence.size() != costs.files.size()) {
    throw ConfigError("popularity order does not cover every requested file");
  }
  VectorXd remaining = costs.budget;
  std::map<int, int> relay_of;
  std::vector<int> stranded;
  for (int file : sequence) {
    const int col = index_of(costs.files, file);
    bool placed = false;
    for (int row : rows_by_cost(costs, col)) {
      if (!fits(costs.relay_load(row, col), remaining(row))) continue;
      remaining(row) -= costs.relay_load(row, col);
      relay_of[file] = costs.relays[static_cast<std::size_t>(row)];
      placed = true;
      break;
    }
    if (!placed) stranded.push_back(file);
  }
  return finish(costs, std::move(relay_of), std::move(stranded));
}

BinaryAssignment greedy_global_assign(const NetworkInstance& inst, Coalition s) {
  const CoalitionCosts costs = coalition_costs(inst, s);
  const auto n_files = static_cast<int>(costs.files.size());
  std::vector<std::vector<int>> queue;  // remaining rows per file, cheapest first
  for (int col = 0; col < n_files; ++col) queue.push_back(rows_by_cost(costs, col));
  std::vector<std::size_t> head(static_cast<std::size_t>(n_files), 0);
  std::vector<bool> open(static_cast<std::size_t>(n_files), true);

  VectorXd remaining = costs.budget;
  std::map<int, int> relay_of;
  std::vector<int> stranded;
  for (;;) {
    int pick = -1;
    double pick_regret = -kInfinity;
    for (int col = 0; col < n_files; ++col) {
      const auto c = static_cast<std::size_t>(col);
      if (!open[c]) continue;
      const auto& q = queue[c];
      const std::size_t h = head[c];
      const double regret =
          q.size() - h >= 2 ? costs.unit_cost(q[h + 1], col) - costs.unit_cost(q[h], col) : kInfinity;
      if (regret > pick_regret) {
        pick = col;
        pick_regret = regret;
      }
    }
    if (pick < 0) break;
    const auto p = static_cast<std::size_t>(pick);
    const int row = queue[p][head[p]];
    if (fits(costs.relay_load(row, pick), remaining(row))) {
      remaining(row) -= costs.relay_load(row, pick);
      relay_of[costs.files[p]] = costs.relays[static_cast<std::size_t>(row)];
      open[p] = false;
    } else if (++head[p] == queue[p].size()) {
      stranded.push_back(costs.files[p]);
      open[p] = false;
    }
  }
  return finish(costs, std::move(relay_of), std::move(stranded));
}

BinaryAssignment random_assign(const NetworkInstance& inst, Coalition s, std::uint64_t seed,
                               int max_tries_per_file) {
  const CoalitionCosts costs = coalition_costs(inst, s);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick_row(0, static_cast<int>(costs.relays.size()) - 1);
  VectorXd remaining = costs.budget;
  std::map<int, int> relay_of;
  std::vector<int> stranded;
  for (std::size_t col = 0; col < costs.files.size(); ++col) {
    bool placed = false;
    for (int t = 0; t < max_tries_per_file && !placed; ++t) {
      const int row = pick_row(rng);
      const double load = costs.relay_load(row, static_cast<Index>(col));
      if (!fits(load, remaining(row))) continue;
      remaining(row) -= load;
      relay_of[costs.files[col]] = costs.relays[static_cast<std::size_t>(row)];
      placed = true;
    }
    if (!placed) stranded.push_back(costs.files[col]);
  }
  return finish(costs, std::move(relay_of), std::move(stranded));
}

NetworkInstance reduce_gap(const GapInstance& gap, double offset) {
  const Index agents = gap.weight.rows();
  const Index jobs = gap.weight.cols();
  if (agents < 1 || jobs < 1 || gap.profit.rows() != agents || gap.profit.cols() != jobs ||
      gap.capacity.size() != agents) {
    throw ConfigError("GAP instance dimensions are inconsistent");
  }
  if ((gap.weight.array() < 0).any() || (gap.capacity.array() < 0).any()) {
    throw ConfigError("GAP weights and capacities must be non-negative");
  }
  if (offset < (gap.profit + gap.weight).maxCoeff()) {
    throw ConfigError("GAP offset must be at least max(profit + weight)");
  }
  const Index n = agents + jobs;
  NetworkParams p;
  p.file_sizes = VectorXd::Ones(jobs);
  p.request.assign(static_cast<std::size_t>(n), -1);
  for (Index m = 0; m < jobs; ++m) p.request[static_cast<std::size_t>(agents + m)] = static_cast<int>(m);
  p.bs_rate = VectorXd::Ones(n);
  p.d2d_rate = MatrixXd::Ones(n, n);
  p.bs_rx_power = VectorXd::Zero(n);
  p.bs_rx_power.tail(jobs).setOnes();
  p.d2d_tx_power = MatrixXd::Zero(n, n);
  p.d2d_rx_power = MatrixXd::Zero(n, n);
  p.d2d_tx_power.topRightCorner(agents, jobs) = gap.weight;
  p.d2d_rx_power.topRightCorner(agents, jobs) =
      (MatrixXd::Constant(agents, jobs, offset) - gap.profit - gap.weight);
  p.energy_budget = VectorXd::Zero(n);
  p.energy_budget.head(agents) = gap.capacity;
  p.valuation = MatrixXd::Zero(n, jobs);
  p.cost_coeff = 1.0;
  return NetworkInstance(std::move(p));
}

}  // namespace d2d
