#pragma once

#include <vector>

#include "mcv/principles.hpp"
#include "mcv/sampling.hpp"
#include "mcv/scenario_tree.hpp"

namespace mcv {

/// Two-step market evaluation over one window [from, to]: the principle is
/// applied conditionally on the stock path up to `to` (joined with the base
/// information), and the result is averaged under the risk-neutral measure
/// conditional on the base. The default window is G -> F^S_T.
class TwoStepEvaluator {
 public:
  TwoStepEvaluator(const ScenarioTree& tree, PrincipleSpec spec);
  TwoStepEvaluator(const ScenarioTree& tree, PrincipleSpec spec, const Partition& base, int from, int to);

  ConditionalValue operator()(const Payoff& h) const;
  /// The inner, financially conditioned evaluation.
  ConditionalValue inner(const Payoff& h) const;
  /// E_Q[X | base] for a payoff X.
  ConditionalValue outer(const Payoff& x) const;

  const PrincipleSpec& spec() const { return spec_; }
  const RiskNeutral& measure() const { return measure_; }
  const Partition& inner_partition() const { return measure_.financial; }
  const std::vector<Real>& prob() const { return prob_; }
  EvaluationOracle oracle() const;

 private:
  PrincipleSpec spec_;
  std::vector<Real> prob_;
  RiskNeutral measure_;
};

ConditionalValue two_step(const PrincipleSpec& spec, const Payoff& h, const ScenarioTree& tree);
/// Uses `g_part` as the initial information instead of the tree's own G.
ConditionalValue two_step(const PrincipleSpec& spec, const Payoff& h, const ScenarioTree& tree, const Partition& g_part);

/// Oracle for H -> E_Q[H | G].
EvaluationOracle risk_neutral_oracle(const ScenarioTree& tree);

struct NumeraireResult {
  ConditionalValue transformed;  ///< valuation of H / S^i_T in units of stock i
  ConditionalValue rescaled;     ///< S^i_0 times the above; equals the two-step value of H
};

/// Change of numeraire to discounted stock i. The martingale measure for the
/// new numeraire is solved from scratch and the inner principle is
/// transported through X -> Pi(S^i_T X) / S^i_T. Throws
/// Error(NonpositiveNumeraire) for an invalid index.
NumeraireResult numeraire_transform(int stock, const Payoff& h, const ScenarioTree& tree, const PrincipleSpec& spec);

/// Searches pairs (H^S, H), H^S financial, for a violation of
/// Pi(H^S + H) = E_Q[H^S | G] + Pi(H).
WitnessReport market_consistency_witness(const EvaluationOracle& op, const ScenarioTree& tree, const SearchConfig& cfg);
/// Searches financial payoffs H^S for a violation of Pi(H^S) = E_Q[H^S | G].
WitnessReport financial_agreement_witness(const EvaluationOracle& op, const ScenarioTree& tree, const SearchConfig& cfg);

}  // namespace mcv
