#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcv/principles.hpp"
#include "mcv/sampling.hpp"
#include "mcv/scenario_tree.hpp"

namespace mcv {

enum class AxiomStatus { PassExhaustive, PassSampled, Fail, Structural };

std::string to_string(AxiomStatus s);

struct AxiomResult {
  std::string axiom;
  AxiomStatus status = AxiomStatus::PassExhaustive;
  long trials = 0;
  std::string witness;  ///< "key=value;..." on failure, replayable with replay_witness
  std::uint64_t seed = 0;
  bool required = true;  ///< a failure of this axiom fails the report
};

struct AxiomReport {
  std::vector<AxiomResult> results;
  std::uint64_t seed = 0;
  /// "rational-exact" when every oracle value seen was exact, else "float-tolerance".
  std::string mode = "rational-exact";

  bool passed() const;
  const AxiomResult& at(const std::string& axiom) const;
  /// Columns: axiom,status,trials,witness,seed.
  std::string csv() const;
};

/// Sufficient bound Pi_G(H) <= lambda * E_Pbar[|H|^p | G].
struct PNormBound {
  Real p{1};
  std::vector<Real> lambda;    ///< one value per G block, or a single scalar
  std::vector<Real> measure;   ///< leaf weights of Pbar; empty means P
};

struct CheckConfig {
  SearchConfig search;
  /// Check market-consistency and the market local property.
  bool market = true;
  /// Whether market axiom failures fail the report.
  bool market_required = true;
  std::optional<PNormBound> pnorm;
};

/// Runs the axiom suite against a black-box operator on the payoff lattice
/// {-2..2}^n, exhaustively when the case count fits cfg.search.budget and on
/// cfg.search.trials seeded samples otherwise. Axioms: normalization,
/// cash-invariance, convexity (scalar and G-measurable lambda), local-property,
/// monotonicity and positive-homogeneity (scalar and G-measurable; reported
/// but not required), market-consistency, market-local-property (H >= 0),
/// p-norm-bound when configured; fatou and continuity are structural on
/// finite trees. Throws Error(OracleFailure) when the operator throws or
/// returns a value on the wrong partition.
AxiomReport check_axioms(const EvaluationOracle& op, const ScenarioTree& tree, const Partition& g, const CheckConfig& cfg);

/// Re-evaluates a failing witness; true when the violation is reproduced.
/// Throws Error(InvalidParam) for an unknown axiom or a malformed witness.
bool replay_witness(const EvaluationOracle& op, const ScenarioTree& tree, const Partition& g, const AxiomResult& result,
                    const std::optional<PNormBound>& pnorm = std::nullopt);

}  // namespace mcv
