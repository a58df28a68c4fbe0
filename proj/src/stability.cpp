#include "d2d/stability.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>

namespace d2d {

// ---------------------------------------------------------------------------
// Collections and partitions

Collection::Collection(std::vector<Coalition> coalitions) : coalitions_(std::move(coalitions)) {
  Coalition seen;
  for (Coalition c : coalitions_) {
    if (c.empty()) throw ConfigError("a collection cannot contain the empty coalition");
    if (c.intersects(seen)) throw ConfigError("coalitions of a collection must be disjoint");
    seen = seen | c;
  }
  std::sort(coalitions_.begin(), coalitions_.end(), ByFrontMember{});
}

Coalition Collection::support() const {
  Coalition all;
  for (Coalition c : coalitions_) all = all | c;
  return all;
}

std::string Collection::to_string() const {
  std::string s = "{";
  for (std::size_t k = 0; k < coalitions_.size(); ++k) {
    if (k != 0) s += ",";
    s += coalitions_[k].to_string();
  }
  return s + "}";
}

Partition::Partition(std::vector<Coalition> blocks, int n_players) : Collection(std::move(blocks)), n_(n_players) {
  if (support() != Coalition::all(n_players)) {
    throw ConfigError("partition blocks must cover players 1.." + std::to_string(n_players));
  }
}

Partition Partition::singletons(int n_players) {
  std::vector<Coalition> blocks;
  for (int i = 0; i < n_players; ++i) blocks.push_back(Coalition::singleton(i));
  return {std::move(blocks), n_players};
}

Partition Partition::grand(int n_players) { return {{Coalition::all(n_players)}, n_players}; }

Partition Partition::from_labels(const std::vector<int>& labels) {
  std::vector<int> distinct(labels);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<Coalition> blocks(distinct.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto k = std::lower_bound(distinct.begin(), distinct.end(), labels[i]) - distinct.begin();
    blocks[static_cast<std::size_t>(k)] = blocks[static_cast<std::size_t>(k)] | Coalition::singleton(static_cast<int>(i));
  }
  return {std::move(blocks), static_cast<int>(labels.size())};
}

std::size_t Partition::block_of(int player) const {
  for (std::size_t k = 0; k < coalitions_.size(); ++k) {
    if (coalitions_[k].contains(player)) return k;
  }
  throw ConfigError("player " + std::to_string(player + 1) + " is not in the partition");
}

nlohmann::json to_json(const Collection& c) {
  nlohmann::json j = nlohmann::json::array();
  for (Coalition s : c.coalitions()) {
    std::vector<int> ids;
    s.for_each([&](int i) { ids.push_back(i + 1); });
    j.push_back(ids);
  }
  return j;
}

Partition partition_from_json(const nlohmann::json& j, int n_players) {
  try {
    std::vector<Coalition> blocks;
    for (const auto& block : j) {
      std::vector<int> members;
      for (const auto& id : block) members.push_back(id.get<int>() - 1);
      blocks.push_back(Coalition::from_members(members));
    }
    return {std::move(blocks), n_players};
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed partition: ") + e.what());
  }
}

Collection collection_under_partition(const Collection& s, const Partition& p) {
  const Coalition u = s.support();
  std::vector<Coalition> out;
  for (Coalition block : p.blocks()) {
    const Coalition piece = u & block;
    if (!piece.empty()) out.push_back(piece);
  }
  return Collection(std::move(out));
}

double partition_value(const ValueOracle& v, const Collection& c) {
  double sum = 0.0;
  for (Coalition s : c.coalitions()) sum += v(s);
  return sum;
}

const char* to_string(Stability s) {
  switch (s) {
    case Stability::unstable: return "unstable";
    case Stability::stable: return "stable";
    case Stability::strictly_stable: return "strictly-stable";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// D_c-stability

namespace {

// lhs - rhs where -inf values are ordered like numbers.
double slack(double lhs, double rhs) {
  if (rhs == -kInfinity) return kInfinity;
  if (lhs == -kInfinity) return -kInfinity;
  return lhs - rhs;
}

double tolerance_for(double a, double b) {
  double m = 0.0;
  if (std::isfinite(a)) m = std::max(m, std::abs(a));
  if (std::isfinite(b)) m = std::max(m, std::abs(b));
  return game_tolerance(m);
}

}  // namespace

StabilityVerdict is_dc_stable(const ValueOracle& v, const Partition& p) {
  const int n = v.n_players();
  if (n > 12) throw CapExceeded("D_c-stability test is capped at 12 players (got " + std::to_string(n) + ")");
  if (p.n_players() != n) throw ConfigError("partition and game sizes differ");
  const auto t = v.table();
  const std::size_t size = t.size();

  StabilityVerdict out;
  out.margin = kInfinity;
  bool violated = false;
  bool strict = true;
  auto record = [&](double s, double tol) {
    out.margin = std::min(out.margin, s);
    if (s <= tol) strict = false;
    return s < -tol;
  };

  // Within each block: best[T] is the most a disjoint split of T can earn,
  // split[T] the best with at least two parts. v(T) >= split[T] for every T
  // is the same as the inequality for every compatible collection.
  std::vector<double> best(size, -kInfinity);
  std::vector<double> split(size, -kInfinity);
  std::vector<Coalition::Mask> split_at(size, 0);
  double worst = 0.0;
  for (Coalition block : p.blocks()) {
    const Coalition::Mask b = block.mask();
    // Submasks in increasing numeric order so parts precede wholes.
    std::vector<Coalition::Mask> subs;
    for (Coalition::Mask s = b; s != 0; s = (s - 1) & b) subs.push_back(s);
    std::reverse(subs.begin(), subs.end());
    for (Coalition::Mask s : subs) {
      const Coalition T(s);
      if (T.size() == 1) {
        best[s] = t[s];
        continue;
      }
      const Coalition::Mask low = Coalition::Mask{1} << T.front();
      const Coalition::Mask rest = s & ~low;
      for (Coalition::Mask r = rest; ; r = (r - 1) & rest) {
        const Coalition::Mask a = low | (rest & ~r);
        const Coalition::Mask c = s & ~a;
        if (c != 0) {
          const double value = best[a] + best[c];
          if (value > split[s]) {
            split[s] = value;
            split_at[s] = a;
          }
        }
        if (r == 0) break;
      }
      best[s] = std::max(t[s], split[s]);
      const double sl = slack(t[s], split[s]);
      if (record(sl, tolerance_for(t[s], split[s])) && sl < worst) {
        worst = sl;
        violated = true;
        std::vector<Coalition> parts;
        std::function<void(Coalition::Mask)> expand = [&](Coalition::Mask m) {
          if (Coalition(m).size() > 1 && split[m] > t[m]) {
            expand(split_at[m]);
            expand(m & ~split_at[m]);
          } else {
            parts.emplace_back(m);
          }
        };
        expand(split_at[s]);
        expand(s & ~split_at[s]);
        out.witness_collection = Collection(std::move(parts));
        out.witness_coalition = Coalition();
      }
    }
  }

  // Coalitions straddling blocks must not beat their pieces under P.
  for (Coalition::Mask s = 1; s < size; ++s) {
    const Coalition S(s);
    double pieces = 0.0;
    int touched = 0;
    for (Coalition block : p.blocks()) {
      const Coalition piece = S & block;
      if (piece.empty()) continue;
      ++touched;
      pieces += t[piece.mask()];
    }
    if (touched < 2) continue;
    const double sl = slack(pieces, t[s]);
    if (record(sl, tolerance_for(pieces, t[s])) && sl < worst) {
      worst = sl;
      violated = true;
      out.witness_coalition = S;
      out.witness_collection = Collection();
    }
  }

  if (violated) {
    out.status = Stability::unstable;
  } else {
    out.status = strict ? Stability::strictly_stable : Stability::stable;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Clustered symmetric instances

void ClusterSymmetry::validate() const {
  const auto n = static_cast<Index>(sizes.size());
  if (n < 1) throw ConfigError("cluster symmetry needs at least one cluster");
  auto same = [n](Index s) { return s == n; };
  if (!same(bs_rate.size()) || !same(bs_power.size()) || !same(d2d_rate.size()) || !same(tx_power.size()) ||
      !same(rx_power.size()) || pair_rate.rows() != n || pair_rate.cols() != n || pair_tx_power.rows() != n ||
      pair_tx_power.cols() != n || pair_rx_power.rows() != n || pair_rx_power.cols() != n) {
    throw ConfigError("cluster symmetry fields must have one entry per cluster");
  }
  for (Index k = 0; k < n; ++k) {
    if (sizes[static_cast<std::size_t>(k)] < 1) throw ConfigError("empty cluster");
    if (!(bs_rate(k) > 0)) throw ConfigError("cluster BS rates must be positive");
    if (sizes[static_cast<std::size_t>(k)] > 1 && !(d2d_rate(k) > 0)) {
      throw ConfigError("intra-cluster D2D rates must be positive");
    }
    for (Index l = 0; l < n; ++l) {
      if (k == l) continue;
      if (!(pair_rate(k, l) > 0)) throw ConfigError("inter-cluster D2D rates must be positive");
      if (pair_rate(k, l) != pair_rate(l, k) || pair_tx_power(k, l) != pair_tx_power(l, k) ||
          pair_rx_power(k, l) != pair_rx_power(l, k)) {
        throw ConfigError("inter-cluster fields must be symmetric");
      }
    }
  }
}

ClusterSymmetry cluster_symmetry(const NetworkInstance& inst, const Partition& p, double rel_tol) {
  if (p.n_players() != inst.n_users()) throw ConfigError("partition and instance sizes differ");
  const auto n = static_cast<Index>(p.size());
  ClusterSymmetry sym;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  sym.bs_rate.resize(n);
  sym.bs_power.resize(n);
  sym.d2d_rate = VectorXd::Constant(n, nan);
  sym.tx_power = VectorXd::Constant(n, nan);
  sym.rx_power = VectorXd::Constant(n, nan);
  sym.pair_rate = MatrixXd::Constant(n, n, nan);
  sym.pair_tx_power = MatrixXd::Constant(n, n, nan);
  sym.pair_rx_power = MatrixXd::Constant(n, n, nan);

  auto take = [rel_tol](double& slot, double value, const char* what) {
    if (std::isnan(slot)) {
      slot = value;
    } else if (std::abs(slot - value) > rel_tol * std::max(std::abs(slot), std::abs(value))) {
      throw ConfigError(std::string("instance is not cluster-symmetric in ") + what);
    }
  };
  for (Index k = 0; k < n; ++k) {
    const Coalition ck = p.blocks()[static_cast<std::size_t>(k)];
    sym.sizes.push_back(ck.size());
    sym.bs_rate(k) = nan;
    sym.bs_power(k) = nan;
    ck.for_each([&](int i) {
      take(sym.bs_rate(k), inst.bs_rate(i), "BS rate");
      take(sym.bs_power(k), inst.bs_rx_power(i), "BS power");
    });
    for (Index l = 0; l < n; ++l) {
      const Coalition cl = p.blocks()[static_cast<std::size_t>(l)];
      ck.for_each([&](int i) {
        cl.for_each([&](int j) {
          if (i == j) return;
          if (k == l) {
            take(sym.d2d_rate(k), inst.d2d_rate(i, j), "intra-cluster rate");
            take(sym.tx_power(k), inst.tx_power(i, j), "intra-cluster transmit power");
            take(sym.rx_power(k), inst.rx_power(i, j), "intra-cluster receive power");
          } else {
            take(sym.pair_rate(k, l), inst.d2d_rate(i, j), "inter-cluster rate");
            take(sym.pair_tx_power(k, l), inst.tx_power(i, j), "inter-cluster transmit power");
            take(sym.pair_rx_power(k, l), inst.rx_power(i, j), "inter-cluster receive power");
          }
        });
      });
    }
  }
  for (Index k = 0; k < n; ++k) {
    for (Index l = k + 1; l < n; ++l) {
      take(sym.pair_rate(k, l), sym.pair_rate(l, k), "inter-cluster rate direction");
      take(sym.pair_tx_power(k, l), sym.pair_tx_power(l, k), "inter-cluster transmit power direction");
      take(sym.pair_rx_power(k, l), sym.pair_rx_power(l, k), "inter-cluster receive power direction");
      sym.pair_rate(l, k) = sym.pair_rate(k, l);
      sym.pair_tx_power(l, k) = sym.pair_tx_power(k, l);
      sym.pair_rx_power(l, k) = sym.pair_rx_power(k, l);
    }
  }
  sym.validate();
  return sym;
}

ExtremalEnergies extremal_energies(const ClusterSymmetry& sym) {
  sym.validate();
  const int n = sym.n_clusters();
  const VectorXd bs = sym.bs_power.cwiseQuotient(sym.bs_rate);
  ExtremalEnergies e;
  e.bs_min = bs.minCoeff();
  e.bs_max = bs.maxCoeff();
  for (int k = 0; k < n; ++k) {
    if (sym.sizes[static_cast<std::size_t>(k)] > 1) {
      e.d2d_max = std::max(e.d2d_max, (sym.tx_power(k) + sym.rx_power(k)) / sym.d2d_rate(k));
    }
    for (int l = 0; l < n; ++l) {
      if (k == l) continue;
      e.tx_min = std::min(e.tx_min, sym.pair_tx_power(k, l) / sym.pair_rate(k, l));
      e.rx_min = std::min(e.rx_min, sym.pair_rx_power(k, l) / sym.pair_rate(k, l));
    }
  }
  return e;
}

ClusterConditionCheck check_cluster_conditions(const ClusterSymmetry& sym) {
  const ExtremalEnergies e = extremal_energies(sym);
  ClusterConditionCheck c;
  c.margin[0] = -kInfinity;
  for (int k = 2; k <= sym.n_clusters(); ++k) {
    c.margin[0] = std::max(c.margin[0], k * e.bs_max - (e.bs_min + e.tx_min + (k - 1) * e.rx_min));
  }
  c.margin[1] = e.rx_min == kInfinity ? -kInfinity : e.d2d_max - e.rx_min;
  c.margin[2] = e.bs_min - e.d2d_max;
  c.condition = {c.margin[0] <= 0.0, c.margin[1] <= 0.0, c.margin[2] > 0.0};
  c.holds = c.condition[0] && c.condition[1] && c.condition[2];
  return c;
}

// ---------------------------------------------------------------------------
// Merge and split

MergeSplitResult merge_and_split(const ValueOracle& v, const Partition& initial) {
  const int n = v.n_players();
  if (n > 20) throw CapExceeded("merge-and-split is capped at 20 players (got " + std::to_string(n) + ")");
  if (initial.n_players() != n) throw ConfigError("partition and game sizes differ");

  std::vector<Coalition> blocks = initial.blocks();
  MergeSplitResult out{initial, 0.0, {}, 0};
  auto improves = [](double after, double before) {
    if (after == -kInfinity) return false;
    if (before == -kInfinity) return true;
    return after > before + tolerance_for(after, before);
  };

  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      for (std::size_t j = i + 1; j < blocks.size();) {
        ++out.comparisons;
        const Coalition a = blocks[i];
        const Coalition b = blocks[j];
        const double apart = v(a) + v(b);
        const double together = v(a | b);
        if (improves(together, apart)) {
          out.log.push_back({"merge", {a, b}, {a | b}, together - apart});
          blocks[i] = a | b;
          blocks.erase(blocks.begin() + static_cast<std::ptrdiff_t>(j));
          changed = true;
        } else {
          ++j;
        }
      }
    }
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const Coalition s = blocks[i];
      if (s.size() < 2) continue;
      const double whole = v(s);
      const Coalition::Mask low = Coalition::Mask{1} << s.front();
      const Coalition::Mask rest = s.mask() & ~low;
      double best_gain = 0.0;
      bool found = false;
      Coalition best_a;
      for (Coalition::Mask r = rest; r != 0; r = (r - 1) & rest) {
        ++out.comparisons;
        const Coalition b(r);
        const Coalition a = s - b;
        const double parts = v(a) + v(b);
        if (improves(parts, whole) && (!found || parts - whole > best_gain)) {
          found = true;
          best_gain = parts - whole;
          best_a = a;
        }
      }
      if (!found) continue;
      const Coalition best_b = s - best_a;
      out.log.push_back({"split", {s}, {best_a, best_b}, best_gain});
      blocks[i] = best_a;
      blocks.push_back(best_b);
      std::sort(blocks.begin(), blocks.end(), ByFrontMember{});
      changed = true;
    }
  }
  out.partition = Partition(blocks, n);
  out.value = partition_value(v, out.partition);
  return out;
}

MergeSplitResult merge_and_split(const ValueOracle& v) {
  return merge_and_split(v, Partition::singletons(v.n_players()));
}

nlohmann::json to_json(const MergeSplitStep& step) {
  return {{"op", step.op},
          {"blocks_before", to_json(Collection(step.before))},
          {"blocks_after", to_json(Collection(step.after))},
          {"delta_v", step.delta_v}};
}

void write_log(std::ostream& out, const std::vector<MergeSplitStep>& log) {
  for (const auto& step : log) out << to_json(step).dump() << '\n';
}

BestPartition enumerate_best_partition(const ValueOracle& v) {
  const int n = v.n_players();
  if (n > 10) throw CapExceeded("partition enumeration is capped at 10 players (got " + std::to_string(n) + ")");
  const auto t = v.table();
  std::vector<Coalition::Mask> blocks;
  std::vector<Coalition::Mask> best_blocks;
  double best = -kInfinity;
  bool any = false;
  // Restricted growth strings: player k joins an existing block or opens
  // the next one.
  std::function<void(int)> grow = [&](int k) {
    if (k == n) {
      double value = 0.0;
      for (auto b : blocks) value += t[b];
      if (!any || value > best) {
        any = true;
        best = value;
        best_blocks = blocks;
      }
      return;
    }
    const Coalition::Mask bit = Coalition::Mask{1} << k;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      blocks[b] |= bit;
      grow(k + 1);
      blocks[b] &= ~bit;
    }
    blocks.push_back(bit);
    grow(k + 1);
    blocks.pop_back();
  };
  grow(0);
  std::vector<Coalition> out;
  for (auto b : best_blocks) out.emplace_back(b);
  return {Partition(std::move(out), n), best};
}

}  // namespace d2d
