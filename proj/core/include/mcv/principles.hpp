#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mcv/random_variable.hpp"
#include "mcv/real.hpp"
#include "mcv/scenario_tree.hpp"

namespace mcv {

/// Black-box conditional evaluation: payoff in, conditional value out.
using EvaluationOracle = std::function<ConditionalValue(const Payoff&)>;

/// Parameter record selecting one conditional actuarial principle.
struct PrincipleSpec {
  enum class Kind { MeanVariance, StdDev, SemiDeviation, AVaR, Exponential, Expectation };

  Kind kind = Kind::Expectation;
  Real alpha;       ///< mean-variance loading
  Real beta;        ///< standard-deviation loading
  Real lambda;      ///< semi-deviation loading
  Real q{1};        ///< semi-deviation exponent, q >= 1
  Real delta;       ///< AV@R loading
  Real level{1};    ///< AV@R confidence level in (0, 1]
  Real gamma{1};    ///< exponential risk aversion, gamma > 0

  static PrincipleSpec expectation() { return {}; }
  static PrincipleSpec mean_variance(Real alpha);
  static PrincipleSpec std_dev(Real beta);
  static PrincipleSpec semi_deviation(Real lambda, Real q);
  static PrincipleSpec avar(Real delta, Real level);
  static PrincipleSpec exponential(Real gamma);

  /// Accepts "e", "mv:alpha=1", "sd:beta=1/2", "semi:lambda=1,q=2",
  /// "avar:delta=1/2,level=1/4", "exp:gamma=2". Throws Error(InvalidSpec).
  static PrincipleSpec parse(std::string_view text);
  /// Canonical text form, accepted by parse().
  std::string str() const;

  /// Throws Error(InvalidSpec) when a parameter is out of range.
  void validate() const;
  /// Results stay exact for exact payoffs.
  bool is_exact_kind() const;
  bool is_positively_homogeneous() const;
  /// Sufficient parameter condition for monotonicity.
  bool is_known_monotone() const;
};

/// Per block of `part`, the principle under the conditional measure given by
/// leaf weights `prob` (need not be normalised). Throws Error(InvalidSpec).
ConditionalValue evaluate(const PrincipleSpec& spec, const Payoff& h, const Partition& part,
                          const std::vector<Real>& prob);
/// Same, under the physical measure of `tree`.
ConditionalValue evaluate(const PrincipleSpec& spec, const Payoff& h, const Partition& part,
                          const ScenarioTree& tree);

/// Average value at risk of the loss H at `level`: mean of the worst
/// `level` share of each block's mass. Throws Error(InvalidLevel).
ConditionalValue avar(const Payoff& h, const Partition& part, const std::vector<Real>& prob, const Real& level);
/// Value at risk, lower-quantile convention: inf{x : P(H > x | B) <= level}.
ConditionalValue value_at_risk(const Payoff& h, const Partition& part, const std::vector<Real>& prob,
                               const Real& level);

/// Blockwise selection: on each event, the value attached to it. The events
/// must partition the leaves and be measurable for every attached value.
/// Throws Error(NotMeasurable).
ConditionalValue local_glue(const std::vector<std::pair<Event, ConditionalValue>>& pieces);

/// Oracle evaluating `spec` on `part` under the physical measure of `tree`.
EvaluationOracle principle_oracle(const PrincipleSpec& spec, const ScenarioTree& tree, const Partition& part);

}  // namespace mcv
