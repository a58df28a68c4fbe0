#pragma once

#include "d2d/model.hpp"
#include "d2d/optimizer.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/eigen.hpp>

#include <random>
#include <string>
#include <type_traits>

// Boost's byte-container probe reads Eigen's `const_iterator`, which is void
// for matrices and hard-errors under C++20 while Eigen tries scalar
// conversions. Eigen expressions are never byte containers.
namespace boost::multiprecision::detail {
template <class C>
  requires std::is_base_of_v<Eigen::EigenBase<C>, C>
struct is_byte_container<C> : boost::false_type {};
}  // namespace boost::multiprecision::detail

namespace testing {

using Rational = boost::multiprecision::cpp_rational;

inline std::string fixture(const std::string& name) { return std::string(D2D_FIXTURES) + "/" + name; }

/// Doubles in these tests are dyadic, so this conversion is exact.
inline Rational exact(double v) { return Rational(v); }

/// Random instance for solver cross-checks. Budgets are drawn so that some
/// of them bind.
inline d2d::NetworkInstance random_instance(std::mt19937_64& rng, int n_users, int n_files, bool slack_budgets) {
  using namespace d2d;
  std::uniform_real_distribution<double> rate(1.0, 10.0);
  std::uniform_real_distribution<double> power(0.1, 1.0);
  std::uniform_int_distribution<int> size(1, 5);
  std::uniform_int_distribution<int> file(-1, n_files - 1);
  std::uniform_real_distribution<double> budget(0.5, 4.0);
  NetworkParams p;
  p.file_sizes.resize(n_files);
  for (int m = 0; m < n_files; ++m) p.file_sizes(m) = size(rng);
  for (int i = 0; i < n_users; ++i) p.request.push_back(file(rng));
  p.bs_rate.resize(n_users);
  p.bs_rx_power.resize(n_users);
  p.energy_budget.resize(n_users);
  p.d2d_rate.resize(n_users, n_users);
  p.d2d_tx_power.resize(n_users, n_users);
  p.d2d_rx_power.resize(n_users, n_users);
  for (int i = 0; i < n_users; ++i) {
    p.bs_rate(i) = rate(rng);
    p.bs_rx_power(i) = power(rng);
    p.energy_budget(i) = slack_budgets ? 1e6 : budget(rng);
    for (int j = 0; j < n_users; ++j) {
      p.d2d_rate(i, j) = rate(rng);
      p.d2d_tx_power(i, j) = power(rng);
      p.d2d_rx_power(i, j) = power(rng);
    }
  }
  p.valuation = MatrixXd::Zero(n_users, n_files);
  return NetworkInstance(std::move(p));
}

// Cost of routing all of file m through `relay`, re-derived in exact
// arithmetic from the raw link data.
inline Rational rational_unit_cost(const d2d::NetworkInstance& inst, d2d::Coalition s, int relay, int m) {
  const d2d::Coalition receivers = inst.requesters(s, m).without(relay);
  const Rational x = exact(inst.file_size(m));
  Rational cost = x * exact(inst.bs_rx_power(relay)) / exact(inst.bs_rate(relay));
  if (receivers.empty()) return cost;
  Rational rate = -1, ptx = 0;
  receivers.for_each([&](int j) {
    const Rational r = exact(inst.d2d_rate(relay, j));
    if (rate < 0 || r < rate) rate = r;
    ptx = std::max(ptx, exact(inst.tx_power(relay, j)));
  });
  cost += x * ptx / rate;
  receivers.for_each([&](int j) { cost += x * exact(inst.rx_power(relay, j)) / rate; });
  return cost;
}

// With one file and slack budgets the LP has a single equality row, so some
// optimal vertex routes the whole file through one relay.
inline Rational rational_single_file_optimum(const d2d::NetworkInstance& inst, d2d::Coalition s) {
  Rational best = -1;
  s.for_each([&](int i) {
    const Rational c = rational_unit_cost(inst, s, i, 0);
    if (best < 0 || c < best) best = c;
  });
  return best;
}

struct Enumerated {
  bool feasible = false;
  double energy = d2d::kInfinity;
};

/// Brute force over every single-relay map, budgets checked with the same
/// absolute-relative slack the solvers use. Energies are summed in file
/// order directly from the model's per-file cost function.
inline Enumerated enumerate_single_relay(const d2d::NetworkInstance& inst, d2d::Coalition s) {
  using namespace d2d;
  const auto files = inst.requested_files(s);
  const auto relays = s.members();
  Enumerated best;
  std::vector<std::size_t> pick(files.size(), 0);
  for (;;) {
    std::vector<double> load(relays.size(), 0.0);
    double e = 0.0;
    for (std::size_t f = 0; f < files.size(); ++f) {
      load[pick[f]] += unit_relay_load(inst, s, relays[pick[f]], files[f]);
      e += unit_transfer_cost(inst, s, relays[pick[f]], files[f]);
    }
    bool ok = true;
    for (std::size_t r = 0; r < relays.size(); ++r) {
      const double b = inst.budget(relays[r]);
      ok = ok && load[r] <= b + 1e-9 * std::max(1.0, std::abs(b));
    }
    if (ok && e < best.energy) best = {true, e};
    std::size_t k = 0;
    while (k < pick.size() && ++pick[k] == relays.size()) pick[k++] = 0;
    if (k == pick.size()) break;
  }
  return best;
}

}  // namespace testing
