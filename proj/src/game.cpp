#include "d2d/game.hpp"

#include "d2d/lp.hpp"
#include "d2d/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

namespace d2d {

ValueOracle::ValueOracle(int n_players, Function f)
    : n_(n_players), f_(std::move(f)), state_(std::make_shared<State>()) {
  if (n_players < 1 || n_players > Coalition::kMaxUsers) {
    throw ConfigError("a game needs between 1 and 63 players");
  }
}

ValueOracle ValueOracle::from_table(int n_players, std::vector<double> table) {
  if (n_players < 1 || n_players > 30 || table.size() != (std::size_t{1} << n_players)) {
    throw ConfigError("value table must have 2^n entries");
  }
  auto shared = std::make_shared<const std::vector<double>>(std::move(table));
  return ValueOracle(n_players, [shared](Coalition s) { return (*shared)[s.mask()]; });
}

double ValueOracle::operator()(Coalition s) const {
  if (s.empty()) return 0.0;
  if (!s.subset_of(Coalition::all(n_))) {
    throw ConfigError("coalition " + s.to_string() + " is outside a game of " + std::to_string(n_) + " players");
  }
  {
    std::shared_lock lock(state_->mutex);
    const auto it = state_->memo.find(s.mask());
    if (it != state_->memo.end()) return it->second;
  }
  const double value = f_(s);
  ++state_->evaluations;
  std::unique_lock lock(state_->mutex);
  state_->memo.emplace(s.mask(), value);
  return value;
}

void ValueOracle::clear_cache() {
  std::unique_lock lock(state_->mutex);
  state_->memo.clear();
}

std::vector<double> ValueOracle::table() const {
  if (n_ > 24) throw CapExceeded("value table is capped at 24 players");
  const std::size_t size = std::size_t{1} << n_;
  std::vector<double> t(size, 0.0);
  parallel_for(size - 1, [&](std::size_t k) { t[k + 1] = (*this)(Coalition(k + 1)); });
  return t;
}

ValueOracle model_a_oracle(const NetworkInstance& inst) {
  return ValueOracle(inst.n_users(), [inst](Coalition s) { return coalition_value(inst, s).value; });
}

double PayoffProfile::of(Coalition s) const {
  double sum = 0.0;
  s.for_each([&](int j) { sum += x(j); });
  return sum;
}

double max_excess(const ValueOracle& v, const PayoffProfile& p) {
  const auto t = v.table();
  double worst = -kInfinity;
  for (std::size_t mask = 1; mask < t.size(); ++mask) {
    worst = std::max(worst, t[mask] - p.of(Coalition(mask)));
  }
  return worst;
}

namespace {

void require_cap(const ValueOracle& v, int cap, const char* what) {
  if (v.n_players() > cap) {
    throw CapExceeded(std::string(what) + " is capped at " + std::to_string(cap) + " players (got " +
                      std::to_string(v.n_players()) + ")");
  }
}

// Balancing program over a family F of coalitions:
//   maximize sum lambda_S v(S)  s.t.  sum_{S in F, S contains j} lambda_S = 1,  lambda >= 0.
// The core constraints restricted to F plus efficiency are infeasible exactly
// when this program is feasible with optimum above v(N).
LpResult<double> balancing_lp(int n, const std::vector<Coalition::Mask>& family, const std::vector<double>& t) {
  const auto cols = static_cast<Index>(family.size());
  LpProblem<double> p = LpProblem<double>::unit_box(cols);
  p.upper.setConstant(kInfinity);
  p.eq_matrix = MatrixXd::Zero(n, cols);
  p.eq_rhs = VectorXd::Ones(n);
  for (Index c = 0; c < cols; ++c) {
    const Coalition s(family[static_cast<std::size_t>(c)]);
    p.objective(c) = -t[s.mask()];
    s.for_each([&](int j) { p.eq_matrix(j, c) = 1.0; });
  }
  return solve_lp(p);
}

bool blocks(int n, const std::vector<Coalition::Mask>& family, const std::vector<double>& t, double grand) {
  const auto lp = balancing_lp(n, family, t);
  return lp.status == LpStatus::optimal && -lp.objective > grand + game_tolerance(grand);
}

}  // namespace

CoreResult check_core(const ValueOracle& v) {
  require_cap(v, 16, "core check");
  const int n = v.n_players();
  const auto t = v.table();
  const Coalition::Mask everyone = Coalition::all(n).mask();
  const double grand = t[everyone];
  CoreResult out;
  if (std::isinf(grand)) {
    out.blocking = {Coalition(everyone)};
    return out;
  }

  std::vector<Coalition::Mask> family;
  for (Coalition::Mask s = 1; s <= everyone; ++s) {
    if (std::isfinite(t[s])) family.push_back(s);
  }
  const auto lp = balancing_lp(n, family, t);
  if (lp.status != LpStatus::optimal) throw SolverFailure("balancing LP is not optimal although N is balanced");
  const double best = -lp.objective;

  if (best <= grand + game_tolerance(grand)) {
    out.nonempty = true;
    out.witness.x = -lp.eq_duals;
    out.witness.x(0) += grand - out.witness.total();
    const double excess = max_excess(v, out.witness);
    if (excess > 1e-7) {
      throw SolverFailure("core witness violates a coalition by " + std::to_string(excess));
    }
    return out;
  }

  std::vector<Coalition::Mask> certificate;
  for (std::size_t c = 0; c < family.size(); ++c) {
    if (lp.x(static_cast<Index>(c)) > 1e-9) certificate.push_back(family[c]);
  }
  if (!blocks(n, certificate, t, grand)) certificate = family;
  for (std::size_t k = 0; k < certificate.size();) {
    auto trial = certificate;
    trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(k));
    if (blocks(n, trial, t, grand)) {
      certificate = std::move(trial);
    } else {
      ++k;
    }
  }
  for (auto s : certificate) out.blocking.emplace_back(s);
  return out;
}

namespace {

// lhs <= rhs up to the game tolerance, with -inf handled as a value.
double excess_over(double lhs, double rhs) {
  if (lhs == -kInfinity) return 0.0;
  if (rhs == -kInfinity) return kInfinity;
  const double gap = lhs - rhs;
  return gap > game_tolerance(std::max(std::abs(lhs), std::abs(rhs))) ? gap : 0.0;
}

}  // namespace

PairCheck check_convex(const ValueOracle& v) {
  require_cap(v, 10, "convexity check");
  const auto t = v.table();
  const Coalition::Mask full = t.size() - 1;
  PairCheck out;
  for (Coalition::Mask a = 1; a <= full; ++a) {
    for (Coalition::Mask b = a + 1; b <= full; ++b) {
      if ((a & b) == a || (a & b) == b) continue;
      const double gap = excess_over(t[a] + t[b], t[a | b] + t[a & b]);
      if (gap > out.violation) out = {false, Coalition(a), Coalition(b), gap};
    }
  }
  return out;
}

PairCheck check_superadditive(const ValueOracle& v) {
  require_cap(v, 10, "superadditivity check");
  const auto t = v.table();
  const Coalition::Mask full = t.size() - 1;
  PairCheck out;
  for (Coalition::Mask a = 1; a <= full; ++a) {
    const Coalition::Mask rest = full & ~a;
    for (Coalition::Mask b = rest; b != 0; b = (b - 1) & rest) {
      if (b < a) continue;
      const double gap = excess_over(t[a] + t[b], t[a | b]);
      if (gap > out.violation) out = {false, Coalition(a), Coalition(b), gap};
    }
  }
  return out;
}

PayoffProfile marginal_vector(const ValueOracle& v, std::span<const int> ordering) {
  const int n = v.n_players();
  std::vector<int> sorted(ordering.begin(), ordering.end());
  std::sort(sorted.begin(), sorted.end());
  bool ok = static_cast<int>(sorted.size()) == n;
  for (int k = 0; ok && k < n; ++k) ok = sorted[static_cast<std::size_t>(k)] == k;
  if (!ok) throw ConfigError("ordering must be a permutation of all players");

  PayoffProfile p{VectorXd::Zero(n)};
  Coalition prefix;
  double before = 0.0;
  for (int j : ordering) {
    prefix = prefix | Coalition::singleton(j);
    const double after = v(prefix);
    p.x(j) = after - before;
    before = after;
  }
  return p;
}

}  // namespace d2d
