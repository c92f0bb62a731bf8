#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mcv/principles.hpp"
#include "mcv/sampling.hpp"
#include "mcv/scenario_tree.hpp"
#include "mcv/twostep.hpp"

namespace mcv {

/// A set of densities: either an explicit list or the band
/// {Z >= 0 : lo <= Z <= hi, E[Z | block] = 1} over the evaluation partition.
class DensitySet {
 public:
  static DensitySet finite(std::vector<Density> members);
  /// Throws Error(InfeasibleBand) unless 0 <= lo <= 1 <= hi.
  static DensitySet band(Real lo, Real hi);

  bool is_band() const { return band_.has_value(); }
  const std::vector<Density>& members() const { return members_; }
  const Real& lo() const { return band_->first; }
  const Real& hi() const { return band_->second; }

 private:
  std::vector<Density> members_;
  std::optional<std::pair<Real, Real>> band_;
};

/// Penalty on densities. Tags record when a closed form is known.
struct PenaltyFn {
  enum class Tag { None, Indicator, Gini };
  std::function<Real(const Density&)> evaluator;
  Tag tag = Tag::None;

  static PenaltyFn zero();
  /// (1 / (2 alpha)) * E[xi^2 - 1] under `prob`, the conjugate of mean-variance.
  static PenaltyFn gini(Real alpha, std::vector<Real> prob);
};

/// Blockwise sup over the set of E[xi H | block] - penalty(xi).
/// Throws Error(EmptySet).
ConditionalValue dual_eval(const DensitySet& set, const PenaltyFn& penalty, const Payoff& h, const Partition& part,
                           const std::vector<Real>& prob);

/// Greedy maximiser of E[Z H | block] over the band: start from lo and pour
/// the remaining mass onto the largest outcomes up to hi.
Density band_argmax(const Payoff& h, const Real& lo, const Real& hi, const Partition& part, const std::vector<Real>& prob);
ConditionalValue band_sup(const Payoff& h, const Real& lo, const Real& hi, const Partition& part,
                          const std::vector<Real>& prob);

struct PenaltyGrid {
  Real radius{4};
  Real step{1};
  std::uint64_t budget = 200000;
  std::uint64_t seed = 0;
};

struct PenaltyEstimate {
  ConditionalValue value;     ///< best value found on the grid, per block of the oracle's output
  std::vector<bool> infinite; ///< per block: growth detected along a ray
  bool exhaustive = false;
};

/// Grid lower bound for sup_H { E[xi H | block] - op(H) }. A block is flagged
/// infinite when some lattice direction d makes E[xi t d] - op(t d) grow at
/// least linearly over t = r, 2r, 4r.
PenaltyEstimate penalty_of(const EvaluationOracle& op, const Density& xi, const std::vector<Real>& prob,
                           const PenaltyGrid& grid);
/// Closed form (1 / (2 alpha)) E[xi^2 - 1 | block] for mean-variance.
ConditionalValue gini_penalty(const Real& alpha, const Density& xi, const Partition& part, const std::vector<Real>& prob);

struct HedgedAvarResult {
  ConditionalValue value;
  Real lo;
  Real hi;
  bool clamped = false;  ///< the raw lower bound was negative and was raised to 0
};

/// Hedged AV@R: E_Q[ sup_Z E[Z H | F^S] | G ] with Z in the band
/// [max(0, 1 - delta (1 + level) / level), 1 + delta (1 - level) / level].
/// Throws Error(InvalidParam) for delta < 0 or level outside (0, 1].
HedgedAvarResult avar_hedged(const Payoff& h, const ScenarioTree& tree, const Real& delta, const Real& level);

/// E_Q[ max of H over each F^S block | G ].
ConditionalValue super_replication(const Payoff& h, const ScenarioTree& tree);
/// E_Q[ min of H over each F^S block | G ].
ConditionalValue sub_replication(const Payoff& h, const ScenarioTree& tree);

/// Pi(H) = max_i E[xi Z_i H | G] for densities Z_i in Q^+_{F^S}.
EvaluationOracle max_density_oracle(const ScenarioTree& tree, const std::vector<Payoff>& z);

struct CounterexampleTemplate {
  ScenarioTree tree;
  Payoff z1;
  Payoff z2;
};

/// Eight leaves: one binomial step (up 2, down 1/2) with four equally likely
/// non-financial states per node: two insurance outcomes times two density
/// states, Z1 = (1/2, 3/2) and Z2 = (3/2, 1/2) by density state.
CounterexampleTemplate canonical_counterexample_template();

struct CounterexampleReport {
  EvaluationOracle op;
  Event a;                      ///< the financial event used for the split
  Payoff h;
  ConditionalValue pi_h;
  ConditionalValue pi_h_a;      ///< Pi(I_A H)
  ConditionalValue pi_h_ac;     ///< Pi(I_{A^c} H)
  Real gap;                     ///< Pi(I_A H) + Pi(I_{A^c} H) - Pi(H), trivial G
  bool violation = false;
  bool consistency_certified = false;  ///< E[xi Z_i I_B] = Q(B) on every F^S atom B
  std::string certificate;
  WitnessReport consistency_search;
};

/// Builds the max-of-two-densities operator on the template and a payoff
/// that breaks the market local property. Throws Error(ConstructionFailed)
/// when the densities are not S-independent elements of Q^+_{F^S}.
CounterexampleReport counterexample(const CounterexampleTemplate& tmpl, const SearchConfig& cfg);

/// Conditioning window for lifts: base information, the financial partition
/// refining it, and the risk-neutral density relative to the base.
struct MarketWindow {
  Partition base;
  Partition financial;
  Density density;
  std::vector<Real> prob;
};

/// G -> F^S_T.
MarketWindow market_window(const ScenarioTree& tree);
/// F_from -> stock path up to `to` joined with `base`.
MarketWindow market_window(const ScenarioTree& tree, const Partition& base, int from, int to);

/// Lift of a market-consistent operator to the finest of the generating
/// partitions (joined with G): on block B, op(H I_B) / Q(B | G), with 0/0 = 0.
/// Throws Error(PreconditionViolated) when the pieces do not add up to op(H).
ConditionalValue lift(const EvaluationOracle& op, const ScenarioTree& tree, const std::vector<Partition>& generating,
                      const Payoff& h);
/// Lift onto the window's financial partition.
ConditionalValue lift(const EvaluationOracle& op, const MarketWindow& w, const Payoff& h);

struct CharacteristicReport {
  bool passed = true;
  bool exhaustive = true;
  long sets_checked = 0;
  std::string witness;  ///< failing set as block ids, or the block whose value is not unique
};

/// Checks Pi_G(I_A H) = E_Q[I_A X | G] for unions A of F^S blocks, and that X
/// is the unique solution of the single-block equations.
CharacteristicReport characteristic_check(const EvaluationOracle& op, const Payoff& h, const ConditionalValue& lifted,
                                          const ScenarioTree& tree, const SearchConfig& cfg = {});
CharacteristicReport characteristic_check(const EvaluationOracle& op, const Payoff& h, const ConditionalValue& lifted,
                                          const MarketWindow& w, const SearchConfig& cfg = {});

struct EssentialSupremum {
  ConditionalValue value;
  std::vector<int> argmax;  ///< per block, the index of a maximising member
};

/// Blockwise maximum of a family on one partition. Throws Error(EmptyFamily).
EssentialSupremum essential_supremum(const std::vector<ConditionalValue>& family);
/// I_A a + I_{A^c} b.
ConditionalValue concatenate(const ConditionalValue& a, const ConditionalValue& b, const Event& event);

}  // namespace mcv
