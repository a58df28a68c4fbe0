#pragma once

#include "d2d/game.hpp"

#include <json.hpp>

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace d2d {

/// Pairwise disjoint nonempty coalitions, kept sorted by smallest member.
class Collection {
 public:
  Collection() = default;
  explicit Collection(std::vector<Coalition> coalitions);

  [[nodiscard]] const std::vector<Coalition>& coalitions() const { return coalitions_; }
  [[nodiscard]] std::size_t size() const { return coalitions_.size(); }
  [[nodiscard]] Coalition support() const;
  [[nodiscard]] std::string to_string() const;

  bool operator==(const Collection&) const = default;

 protected:
  std::vector<Coalition> coalitions_;
};

/// A collection that covers players 0..n-1.
class Partition : public Collection {
 public:
  Partition(std::vector<Coalition> blocks, int n_players);

  static Partition singletons(int n_players);
  static Partition grand(int n_players);
  /// Block label per player; labels need not be contiguous.
  static Partition from_labels(const std::vector<int>& labels);

  [[nodiscard]] const std::vector<Coalition>& blocks() const { return coalitions_; }
  [[nodiscard]] int n_players() const { return n_; }
  /// Index of the block holding `player`.
  [[nodiscard]] std::size_t block_of(int player) const;

  bool operator==(const Partition& o) const { return coalitions_ == o.coalitions_; }

 private:
  int n_ = 0;
};

nlohmann::json to_json(const Collection& c);
Partition partition_from_json(const nlohmann::json& j, int n_players);

/// S[P]: the union of S's coalitions intersected with each block of P.
Collection collection_under_partition(const Collection& s, const Partition& p);

double partition_value(const ValueOracle& v, const Collection& c);

enum class Stability { unstable, stable, strictly_stable };
const char* to_string(Stability s);

struct StabilityVerdict {
  Stability status = Stability::unstable;
  // Violation found when unstable: a collection inside one block whose
  // union is worth less than its parts, or a straddling coalition worth
  // more than its pieces under P.
  Collection witness_collection;
  Coalition witness_coalition;
  double margin = 0.0;  // smallest slack over every inequality checked
};

/// Exact D_c-stability test; capped at 12 players.
StabilityVerdict is_dc_stable(const ValueOracle& v, const Partition& p);

/// Cluster-level rates and powers of a clustered symmetric instance.
/// Intra-cluster fields of a single-user cluster are NaN (no such link).
struct ClusterSymmetry {
  std::vector<int> sizes;
  VectorXd bs_rate, bs_power;
  VectorXd d2d_rate, tx_power, rx_power;           // within cluster k
  MatrixXd pair_rate, pair_tx_power, pair_rx_power;  // between clusters k, l

  [[nodiscard]] int n_clusters() const { return static_cast<int>(sizes.size()); }
  /// Throws ConfigError on asymmetric pair fields or non-positive rates.
  void validate() const;
};

/// Reads the cluster-level parameters from an instance whose links are
/// exactly symmetric per cluster and cluster pair; throws ConfigError when
/// they are not.
ClusterSymmetry cluster_symmetry(const NetworkInstance& inst, const Partition& p, double rel_tol = 1e-12);

struct ExtremalEnergies {
  double bs_min = 0.0;     // min P_s/R_s over clusters
  double bs_max = 0.0;     // max P_s/R_s over clusters
  double tx_min = kInfinity;   // min inter-cluster P_Tx/R; +inf with one cluster
  double rx_min = kInfinity;   // min inter-cluster P_Rx/R; +inf with one cluster
  double d2d_max = -kInfinity;  // max intra-cluster (P_Tx+P_Rx)/R; -inf without intra links
};

ExtremalEnergies extremal_energies(const ClusterSymmetry& sym);

struct ClusterConditionCheck {
  bool holds = false;
  std::array<bool, 3> condition{};
  // LHS - RHS. Conditions 1 and 2 hold when the margin is <= 0, condition 3
  // when it is > 0. Condition 1 takes the worst k and is -inf with one cluster.
  std::array<double, 3> margin{};
};

/// Sufficient conditions for the cluster partition to be D_c-stable.
ClusterConditionCheck check_cluster_conditions(const ClusterSymmetry& sym);

struct MergeSplitStep {
  std::string op;  // "merge" or "split"
  std::vector<Coalition> before;
  std::vector<Coalition> after;
  double delta_v = 0.0;
};

struct MergeSplitResult {
  Partition partition;
  double value = 0.0;
  std::vector<MergeSplitStep> log;
  long comparisons = 0;  // candidate merges and splits evaluated
};

/// Merge-and-split from `initial` with pairwise merges and bipartition
/// splits; capped at 20 players.
MergeSplitResult merge_and_split(const ValueOracle& v, const Partition& initial);
MergeSplitResult merge_and_split(const ValueOracle& v);

nlohmann::json to_json(const MergeSplitStep& step);
/// One JSON object per line.
void write_log(std::ostream& out, const std::vector<MergeSplitStep>& log);

struct BestPartition {
  Partition partition;
  double value;
};

/// Exhaustive maximum of the partition value; capped at 10 players.
BestPartition enumerate_best_partition(const ValueOracle& v);

}  // namespace d2d
