#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "mcv/duality.hpp"
#include "mcv/principles.hpp"
#include "mcv/sampling.hpp"
#include "mcv/scenario_tree.hpp"
#include "mcv/twostep.hpp"

namespace mcv {

/// Time-indexed evaluation: Pi_t(H) on the full-information partition F_t.
using FamilyOracle = std::function<ConditionalValue(int t, const Payoff& h)>;

/// Backward recursion of one-period two-step evaluations:
/// Pi_T = H, Pi_t = E_Q[ Pi_{F^S_{t+1} v F_t}(Pi_{t+1}) | F_t ].
class BackwardEvaluator {
 public:
  /// Throws Error(IncompleteMarket) / Error(Arbitrage) at a bad node.
  BackwardEvaluator(const ScenarioTree& tree, PrincipleSpec spec);

  /// Values at every time 0..T.
  std::vector<ConditionalValue> run(const Payoff& h) const;
  /// Pi_t(H), recursing from T down to t only.
  ConditionalValue at(int t, const Payoff& h) const;
  /// One backward step: Pi_t applied to an F_{t+1}-measurable payoff.
  ConditionalValue step(int t, const Payoff& next) const;
  const TwoStepEvaluator& stage(int t) const { return stages_.at(static_cast<size_t>(t)); }
  int horizon() const { return static_cast<int>(stages_.size()); }
  FamilyOracle family() const;

 private:
  std::vector<TwoStepEvaluator> stages_;
  Partition terminal_;
};

std::vector<ConditionalValue> backward_evaluate(const PrincipleSpec& spec, const Payoff& h, const ScenarioTree& tree);
FamilyOracle backward_family(const PrincipleSpec& spec, const ScenarioTree& tree);
/// Non-recursive family: a single two-step evaluation from t straight to T.
FamilyOracle static_family(const PrincipleSpec& spec, const ScenarioTree& tree);
/// E_Q[H | F_t] for the recursively pasted one-step martingale measure.
FamilyOracle risk_neutral_family(const ScenarioTree& tree);

struct DynamicReport {
  bool passed = true;
  bool exhaustive = false;
  long trials = 0;
  std::uint64_t seed = 0;
  std::string check;    ///< name of the failing check
  std::string witness;
};

/// Checks Pi_s(H) = Pi_s(Pi_t(H)) for every requested pair s <= t on random
/// lattice payoffs.
DynamicReport time_consistency_check(const FamilyOracle& family, const ScenarioTree& tree,
                                     const std::vector<std::pair<int, int>>& pairs, const SearchConfig& cfg);
/// All pairs 0 <= s < t <= T.
std::vector<std::pair<int, int>> all_time_pairs(const ScenarioTree& tree);

/// For each s, with t the next reveal time after s (or T): on F_t-measurable
/// payoffs, the segment evaluation Pi_s must satisfy the market local property
/// on the financial sets of the window F_s -> stock path to t, admit a lift
/// satisfying the characteristic equation, and reduce to E_Q when no
/// insurance is revealed in (s, T].
DynamicReport reveal_structure_check(const FamilyOracle& family, const ScenarioTree& tree, const SearchConfig& cfg);

}  // namespace mcv
