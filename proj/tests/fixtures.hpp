#pragma once

#include <string>
#include <vector>

#include "mcv/scenario_tree.hpp"

namespace mcv::testing {

inline Real q(long num, long den = 1) { return Real::fraction(num, den); }

inline Payoff payoff(std::vector<Real> v) { return Payoff(std::move(v)); }

/// One-period binomial: S0 = 1, up 2, down 1/2, p = 1/2, no insurance.
inline ScenarioTree binomial() {
  ProductTreeSpec spec;
  spec.steps.push_back({{{{q(2)}, q(1, 2)}, {{q(1, 2)}, q(1, 2)}}, {}});
  return build_tree(product_tree_config(spec));
}

/// One step, stock up/down times an independent insurance shock 0/1: 4 leaves
/// in the order (up,0) (up,1) (down,0) (down,1).
inline ScenarioTree four_leaf(Real p_up = q(1, 2), Real p_ins = q(1, 2)) {
  ProductTreeSpec spec;
  spec.steps.push_back({{{{q(2)}, p_up}, {{q(1, 2)}, Real(1) - p_up}},
                        {{q(0), Real(1) - p_ins}, {q(1), p_ins}}});
  return build_tree(product_tree_config(spec));
}

/// Four leaves where the insurance shock is correlated with the stock move.
inline ScenarioTree four_leaf_correlated() {
  TreeConfig cfg;
  cfg.reveal_times = {1};
  cfg.nodes = {{"r", std::nullopt, {q(1)}, q(0), std::nullopt},
               {"u0", "r", {q(2)}, q(0), q(1, 8)},
               {"u1", "r", {q(2)}, q(1), q(3, 8)},
               {"d0", "r", {q(1, 2)}, q(0), q(3, 8)},
               {"d1", "r", {q(1, 2)}, q(1), q(1, 8)}};
  return build_tree(cfg);
}

/// Two binomial steps with an insurance shock revealed at step 2: 8 leaves.
inline ScenarioTree eight_leaf() {
  ProductTreeSpec spec;
  spec.steps.push_back({{{{q(2)}, q(1, 2)}, {{q(1, 2)}, q(1, 2)}}, {}});
  spec.steps.push_back({{{{q(3, 2)}, q(1, 3)}, {{q(3, 4)}, q(2, 3)}}, {{q(0), q(1, 4)}, {q(2), q(3, 4)}}});
  return build_tree(product_tree_config(spec));
}

/// Three binomial steps with one reveal at step 2: 16 leaves.
inline ScenarioTree three_period() {
  ProductTreeSpec spec;
  spec.steps.push_back({{{{q(2)}, q(1, 2)}, {{q(1, 2)}, q(1, 2)}}, {}});
  spec.steps.push_back({{{{q(3, 2)}, q(1, 3)}, {{q(3, 4)}, q(2, 3)}}, {{q(0), q(1, 4)}, {q(2), q(3, 4)}}});
  spec.steps.push_back({{{{q(2)}, q(1, 4)}, {{q(1, 2)}, q(3, 4)}}, {}});
  return build_tree(product_tree_config(spec));
}

/// No financial market: stock constant, insurance shocks only.
inline ScenarioTree insurance_only() {
  ProductTreeSpec spec;
  spec.steps.push_back({{}, {{q(0), q(1, 4)}, {q(1), q(1, 4)}, {q(2), q(1, 2)}}});
  return build_tree(product_tree_config(spec));
}

}  // namespace mcv::testing
