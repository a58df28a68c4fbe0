#pragma once

#include "d2d/coalition.hpp"
#include "d2d/model.hpp"
#include "d2d/types.hpp"

#include <atomic>
#include <functional>
#include <memory>
#include <shared_mutex>
#include <span>
#include <unordered_map>
#include <vector>

namespace d2d {

/// Memoized characteristic function v over coalitions of n players.
///
/// v(empty) is 0 without calling the wrapped function. Lookups and inserts are
/// safe from several threads; two threads may evaluate the same coalition
/// concurrently, which is harmless because the function is deterministic.
class ValueOracle {
 public:
  using Function = std::function<double(Coalition)>;

  ValueOracle(int n_players, Function f);

  /// Game given by a table indexed by coalition mask; entry 0 is ignored.
  static ValueOracle from_table(int n_players, std::vector<double> table);

  double operator()(Coalition s) const;

  [[nodiscard]] int n_players() const { return n_; }
  /// Calls made to the wrapped function so far.
  [[nodiscard]] long evaluations() const { return state_->evaluations.load(); }
  void clear_cache();

  /// Every v(S), S a subset of the first n players, indexed by mask.
  [[nodiscard]] std::vector<double> table() const;

 private:
  struct State {
    std::shared_mutex mutex;
    std::unordered_map<Coalition::Mask, double> memo;
    std::atomic<long> evaluations{0};
  };
  int n_;
  Function f_;
  std::shared_ptr<State> state_;
};

/// v(S) of the fractional-relaying game, -inf where S has no feasible plan.
ValueOracle model_a_oracle(const NetworkInstance& inst);

struct PayoffProfile {
  VectorXd x;

  [[nodiscard]] double total() const { return x.sum(); }
  /// x(S).
  [[nodiscard]] double of(Coalition s) const;
};

/// Largest v(S) - x(S) over nonempty S (negative when every coalition is
/// strictly satisfied).
double max_excess(const ValueOracle& v, const PayoffProfile& p);

struct CoreResult {
  bool nonempty = false;
  PayoffProfile witness;            // set when nonempty
  std::vector<Coalition> blocking;  // set when empty: an irreducible infeasible family
};

/// Decides core non-emptiness; capped at 16 players.
CoreResult check_core(const ValueOracle& v);

/// Result of a pairwise inequality sweep with the worst violating pair.
struct PairCheck {
  bool holds = true;
  Coalition first;
  Coalition second;
  double violation = 0.0;
};

/// v(S1)+v(S2) <= v(S1 u S2)+v(S1 n S2) for all pairs; capped at 10 players.
PairCheck check_convex(const ValueOracle& v);
/// v(S1)+v(S2) <= v(S1 u S2) for all disjoint pairs; capped at 10 players.
PairCheck check_superadditive(const ValueOracle& v);

/// Marginal contributions along `ordering`, a permutation of 0..n-1.
PayoffProfile marginal_vector(const ValueOracle& v, std::span<const int> ordering);

}  // namespace d2d
