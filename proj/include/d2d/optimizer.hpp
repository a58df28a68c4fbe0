#pragma once

#include "d2d/lp.hpp"
#include "d2d/model.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace d2d {

/// Per-coalition tables shared by every Model A / Model B solver: rows are
/// the coalition's members, columns the files they request.
struct CoalitionCosts {
  Coalition coalition;
  std::vector<int> relays;  // members, increasing id
  std::vector<int> files;   // requested files, increasing id
  MatrixXd unit_cost;       // unit_transfer_cost(relay, file)
  MatrixXd relay_load;      // unit_relay_load(relay, file)
  VectorXd budget;          // E_i per relay row
};

CoalitionCosts coalition_costs(const NetworkInstance& inst, Coalition s);

/// LP for the fractional relaying problem of `s`: one variable per
/// (relay, file) pair in column-major order of CoalitionCosts.
LpProblem<double> model_a_problem(const CoalitionCosts& costs);

struct ModelASolution {
  bool feasible = false;
  double min_energy = kInfinity;
  AssignmentPlan plan;
};

/// Minimum-energy fractional assignment for coalition `s`.
ModelASolution solve_model_a_lp(const NetworkInstance& inst, Coalition s);

/// One relay per requested file; files that found no budget-feasible relay
/// are listed in `stranded`.
struct BinaryAssignment {
  Coalition coalition;
  std::map<int, int> relay_of;  // file -> relay
  std::vector<int> stranded;
  double energy = 0.0;          // over assigned files only

  [[nodiscard]] bool complete() const { return stranded.empty(); }
};

/// Total energy and per-user breakdown of a binary assignment.
AssignmentPlan to_plan(const NetworkInstance& inst, const BinaryAssignment& a);

struct ExactCaps {
  int max_files = 12;
  int max_relays = 12;
};

/// Global optimum of the single-relay problem by depth-first branch and
/// bound; nullopt when no assignment satisfies the budgets. Throws
/// CapExceeded above `caps`.
std::optional<BinaryAssignment> solve_model_b_exact(const NetworkInstance& inst, Coalition s,
                                                    ExactCaps caps = {});

/// Files in decreasing popularity, cheapest budget-feasible relay each.
/// `popularity` lists file ids, most popular first, and must cover every
/// file requested in `s`.
BinaryAssignment greedy_assign(const NetworkInstance& inst, Coalition s,
                               const std::vector<int>& popularity);

/// Max-regret assignment: repeatedly serve the file whose two cheapest
/// remaining relays differ most.
BinaryAssignment greedy_global_assign(const NetworkInstance& inst, Coalition s);

/// Uniformly random budget-feasible relay per file, reproducible per seed.
BinaryAssignment random_assign(const NetworkInstance& inst, Coalition s, std::uint64_t seed,
                               int max_tries_per_file = 64);

/// Generalized assignment instance: assign each job to one agent.
struct GapInstance {
  MatrixXd weight;   // agents x jobs, consumed from the agent budget
  MatrixXd profit;   // agents x jobs
  VectorXd capacity; // per agent
};

/// Encodes a GAP instance as a single-relay problem on the coalition of all
/// users: agents become relays (users 0..A-1) and each job becomes a file
/// requested by one dedicated destination (users A..A+J-1) that cannot
/// relay. Relay load equals the GAP weight, and transfer cost equals
/// `offset - profit`, so minimum energy is maximum profit.
NetworkInstance reduce_gap(const GapInstance& gap, double offset);

}  // namespace d2d
