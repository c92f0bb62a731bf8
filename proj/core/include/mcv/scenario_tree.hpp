#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mcv/partition.hpp"
#include "mcv/random_variable.hpp"
#include "mcv/real.hpp"

namespace mcv {

struct TreeNode {
  int id = 0;
  std::string label;
  int time = 0;
  int parent = -1;
  std::vector<int> children;
  std::vector<Real> stock;
  Real insurance;
  Real branch_prob{1};  ///< P(node | parent)
  Real mass{1};         ///< P(node)
  int leaf_begin = 0;   ///< leaves under the node occupy [leaf_begin, leaf_end)
  int leaf_end = 0;
};

struct NodeConfig {
  std::string id;
  std::optional<std::string> parent;
  std::vector<Real> stock;
  std::optional<Real> insurance;  ///< defaults to the parent's value
  std::optional<Real> prob;       ///< P(node | parent)
};

/// Node-table description of a tree, as read from a configuration file.
struct TreeConfig {
  std::optional<int> horizon;
  std::vector<NodeConfig> nodes;
  Real bond_rate;
  std::vector<int> reveal_times;
  /// Optional alternative to per-node branch probabilities.
  std::map<std::string, Real> leaf_prob;
  /// Optional initial information G, as blocks of leaf ids. Trivial if empty.
  std::vector<std::vector<std::string>> g_blocks;
};

/// Independent financial/insurance moves per step; convenient for generated trees.
struct FinancialMove {
  std::vector<Real> factor;  ///< S_{t+1} = S_t * factor (componentwise)
  Real prob;
};
struct InsuranceMove {
  Real increment;  ///< Y_{t+1} = Y_t + increment
  Real prob;
};
struct ProductStep {
  std::vector<FinancialMove> financial;  ///< empty: stock unchanged
  std::vector<InsuranceMove> insurance;  ///< empty: no reveal at this step
};
struct ProductTreeSpec {
  std::vector<Real> s0{Real(1)};
  Real y0;
  Real bond_rate;
  std::vector<ProductStep> steps;
};

TreeConfig product_tree_config(const ProductTreeSpec& spec);

/// Finite filtered probability space: a tree of (stock vector, insurance value)
/// states with positive branch probabilities. Immutable once built.
class ScenarioTree {
 public:
  int horizon() const { return horizon_; }
  int num_stocks() const { return num_stocks_; }
  int num_leaves() const { return static_cast<int>(leaves_.size()); }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& node(int id) const { return nodes_.at(static_cast<size_t>(id)); }
  const TreeNode& root() const { return nodes_.front(); }
  const std::vector<int>& nodes_at(int t) const;
  int leaf_node(int leaf) const { return leaves_.at(static_cast<size_t>(leaf)); }
  /// Node on the path of `leaf` at time t.
  int ancestor(int leaf, int t) const;
  const std::vector<Real>& leaf_prob() const { return leaf_prob_; }

  const Real& bond_rate() const { return bond_rate_; }
  /// Bond value (1 + r)^t.
  Real bond(int t) const;
  const std::set<int>& reveal_times() const { return reveal_times_; }
  bool is_reveal_time(int t) const { return reveal_times_.count(t) > 0; }
  const Partition& g_partition() const { return g_partition_; }
  ScenarioTree with_g_partition(const Partition& g) const;

  /// Stock vector along the path of `leaf` at time t.
  const std::vector<Real>& stock(int leaf, int t) const { return node(ancestor(leaf, t)).stock; }
  const Real& insurance(int leaf, int t) const { return node(ancestor(leaf, t)).insurance; }
  /// Label identifying the stock path up to time t (equal labels = equal paths).
  int stock_path_label(int leaf, int t) const;
  std::optional<int> leaf_index(const std::string& label) const;

  friend ScenarioTree build_tree(const TreeConfig& cfg);

 private:
  int horizon_ = 0;
  int num_stocks_ = 0;
  std::vector<TreeNode> nodes_;
  std::vector<std::vector<int>> by_time_;
  std::vector<int> leaves_;
  std::vector<Real> leaf_prob_;
  std::vector<std::vector<int>> ancestors_;   ///< [t][leaf] -> node id
  std::vector<std::vector<int>> stock_paths_;  ///< [t][leaf] -> path label
  Real bond_rate_;
  std::set<int> reveal_times_;
  Partition g_partition_;
};

/// Validates the configuration and builds the tree. Throws Error(InvalidConfig).
ScenarioTree build_tree(const TreeConfig& cfg);

/// Selects one of the sigma-algebras used by the engine.
struct ObservableSpec {
  enum class Kind {
    Trivial,          ///< {empty, Omega}
    Initial,          ///< G
    Financial,        ///< F^S_t: stock path up to t, joined with G
    Full,             ///< F_t: full path up to t, joined with G
    FinancialAfter,   ///< stock path up to `time` joined with F_from (and G)
  };
  Kind kind = Kind::Trivial;
  int time = 0;
  int from = 0;

  static ObservableSpec trivial() { return {Kind::Trivial, 0, 0}; }
  static ObservableSpec initial() { return {Kind::Initial, 0, 0}; }
  static ObservableSpec financial(int t) { return {Kind::Financial, t, 0}; }
  static ObservableSpec full(int t) { return {Kind::Full, t, 0}; }
  static ObservableSpec financial_after(int sigma, int tau) { return {Kind::FinancialAfter, tau, sigma}; }
};

/// Throws Error(UnknownTime) for times outside 0..horizon.
Partition partition_for(const ScenarioTree& tree, const ObservableSpec& spec);

/// Per block B of `part`: sum_B P xi H / sum_B P xi. `xi.base` must be coarser
/// than (or equal to) `part`. Throws Error(ZeroBlockMass) when a block carries
/// no xi-mass.
ConditionalValue cond_expectation(const ScenarioTree& tree, const Payoff& h, const Partition& part,
                                  const Density& xi);
/// Same, with explicit leaf probabilities.
ConditionalValue cond_expectation(const std::vector<Real>& prob, const Payoff& h, const Partition& part,
                                  const Density& xi);
/// Conditional expectation under the physical measure.
ConditionalValue cond_expectation(const ScenarioTree& tree, const Payoff& h, const Partition& part);

/// Asset used to deflate prices when solving for the martingale measure.
struct Numeraire {
  int stock = -1;  ///< -1 selects the bond
  static Numeraire bond() { return {-1}; }
  static Numeraire stock_index(int i) { return {i}; }
  bool is_bond() const { return stock < 0; }
};

/// Unique martingale measure of the financial sub-market between two times,
/// conditional on a base sigma-algebra.
struct RiskNeutral {
  Partition base;       ///< conditioning sigma-algebra (G or F_from)
  Partition financial;  ///< stock path up to `to` joined with base
  Density density;      ///< dQ/dP relative to base; constant on `financial` blocks
  int from = 0;
  int to = 0;
};

/// Solves the one-step martingale equations at every node of the financial
/// quotient tree. Completeness is a checked precondition: a node with more
/// distinct financial successors than traded assets throws
/// Error(IncompleteMarket); inconsistent or nonpositive solutions throw
/// Error(Arbitrage). `base` must determine the stock path up to `from`.
RiskNeutral risk_neutral(const ScenarioTree& tree, const Partition& base, int from, int to,
                         Numeraire numeraire = Numeraire::bond());

/// The risk-neutral density of the whole horizon relative to G.
Density risk_neutral_measure(const ScenarioTree& tree);

}  // namespace mcv
