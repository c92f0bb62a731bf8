#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mcv/random_variable.hpp"
#include "mcv/scenario_tree.hpp"

namespace mcv {

/// Seeded generator with platform-independent integer mapping. Each trial of
/// a search uses its own substream so results do not depend on scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, n).
  std::uint64_t below(std::uint64_t n);
  /// Uniform on [lo, hi].
  long range(long lo, long hi);
  /// Uniform over {k / den : lo <= k / den <= hi}.
  Real rational(const Real& lo, const Real& hi, long den);
  bool coin() { return (next() >> 63) != 0; }

 private:
  std::mt19937_64 engine_;
};

/// Seed from the MCV_SEED environment variable, or a fixed default.
std::uint64_t default_seed();

/// Number of payoffs with values in lo..hi on n leaves, or cap + 1 once it exceeds `cap`.
std::uint64_t lattice_size(int n, int lo, int hi, std::uint64_t cap);
/// The index-th lattice payoff (mixed-radix digits, leaf 0 least significant).
Payoff lattice_payoff(std::uint64_t index, int n, int lo = -2, int hi = 2);
Payoff random_lattice_payoff(Rng& rng, int n, int lo = -2, int hi = 2);
/// Values k/den with |k/den| <= max_abs and den drawn from 1..max_den.
Payoff random_rational_payoff(Rng& rng, int n, int max_abs = 4, int max_den = 8);
/// Payoff equal to values[b] on block b.
Payoff spread(const Partition& part, const std::vector<Real>& block_values);
/// Random payoff measurable with respect to `part`.
Payoff random_measurable_payoff(Rng& rng, const Partition& part, bool lattice);

struct SearchConfig {
  std::uint64_t seed = 0;
  long trials = 10000;
  /// Enumerate exhaustively when the search space has at most this many points.
  std::uint64_t budget = 200000;
};

struct WitnessReport {
  bool passed = true;
  bool exhaustive = false;
  long trials = 0;
  std::uint64_t seed = 0;
  std::string witness;  ///< empty on pass
};

struct RandomTreeOptions {
  int financial_steps = 2;  ///< steps with stock branching
  int num_stocks = 1;       ///< 1 (binomial) or 2 (trinomial)
  int reveal_step = 2;      ///< step at which insurance branches (0 = none)
  int insurance_branches = 2;
  bool correlated = true;   ///< perturb branch probabilities away from a product law
  bool random_rate = false;
};

/// Random arbitrage-free complete tree with rational data.
ScenarioTree random_tree(Rng& rng, const RandomTreeOptions& opts = {});

}  // namespace mcv
