#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "mcv/dynamic.hpp"
#include "mcv/error.hpp"

using namespace mcv;
using mcv::testing::q;

namespace {

std::vector<PrincipleSpec> all_specs() {
  return {PrincipleSpec::expectation(),       PrincipleSpec::mean_variance(q(2)), PrincipleSpec::std_dev(q(1, 2)),
          PrincipleSpec::semi_deviation(q(1, 2), q(1)), PrincipleSpec::avar(q(1, 2), q(1, 2)),
          PrincipleSpec::exponential(q(2))};
}

Payoff sample(const ScenarioTree& t, std::uint64_t seed) {
  Rng rng(seed);
  return random_lattice_payoff(rng, t.num_leaves());
}

/// Three periods, insurance revealed at steps 1 and 3.
ScenarioTree two_reveals() {
  ProductTreeSpec spec;
  spec.steps.push_back({{{{q(2)}, q(1, 2)}, {{q(1, 2)}, q(1, 2)}}, {{q(0), q(1, 2)}, {q(1), q(1, 2)}}});
  spec.steps.push_back({{{{q(3, 2)}, q(1, 3)}, {{q(3, 4)}, q(2, 3)}}, {}});
  spec.steps.push_back({{{{q(2)}, q(1, 4)}, {{q(1, 2)}, q(3, 4)}}, {{q(0), q(1, 3)}, {q(1), q(2, 3)}}});
  return build_tree(product_tree_config(spec));
}

}  // namespace

TEST(Backward, ExpectationIsRiskNeutralPrice) {
  const ScenarioTree t = mcv::testing::three_period();
  const Payoff h = sample(t, 1);
  const auto path = backward_evaluate(PrincipleSpec::expectation(), h, t);
  ASSERT_EQ(path.size(), 4U);
  EXPECT_EQ(path.front().values[0], cond_expectation(t, h, Partition::trivial(t.num_leaves()), risk_neutral_measure(t)).values[0]);
  EXPECT_EQ(path.back().lift(), h);
}

TEST(Backward, EarlyMeasurablePayoffIsFrozen) {
  const ScenarioTree t = mcv::testing::three_period();
  std::vector<Real> v;
  for (int leaf = 0; leaf < t.num_leaves(); ++leaf) v.push_back(t.insurance(leaf, 2) + t.stock(leaf, 2)[0]);
  const Payoff h(v);
  for (const auto& spec : all_specs()) {
    const auto path = backward_evaluate(spec, h, t);
    EXPECT_EQ(path[2].lift(), h) << spec.str();
    EXPECT_EQ(path[3].lift(), h) << spec.str();
  }
}

TEST(Backward, ExponentialTowerForInsuranceOnlyRisk) {
  ProductTreeSpec spec;
  spec.steps.push_back({{}, {{q(0), q(1, 4)}, {q(1), q(3, 4)}}});
  spec.steps.push_back({{}, {{q(0), q(1, 2)}, {q(2), q(1, 2)}}});
  const ScenarioTree t = build_tree(product_tree_config(spec));
  std::vector<Real> v;
  for (int leaf = 0; leaf < t.num_leaves(); ++leaf) v.push_back(t.insurance(leaf, 2));
  const Payoff h(v);
  const PrincipleSpec e = PrincipleSpec::exponential(q(3, 2));
  const Real recursive = backward_evaluate(e, h, t).front().values[0];
  const Real one_shot = evaluate(e, h, Partition::trivial(t.num_leaves()), t).values[0];
  EXPECT_TRUE(approx_equal(recursive, one_shot)) << recursive << " vs " << one_shot;
}

TEST(Backward, AtMatchesRun) {
  const ScenarioTree t = mcv::testing::three_period();
  const BackwardEvaluator be(t, PrincipleSpec::mean_variance(q(1)));
  const Payoff h = sample(t, 2);
  const auto path = be.run(h);
  for (int s = 0; s <= 3; ++s) EXPECT_EQ(be.at(s, h).values, path[static_cast<size_t>(s)].values);
  EXPECT_THROW(be.at(4, h), Error);
  EXPECT_EQ(be.horizon(), 3);
}

TEST(TimeConsistency, BackwardFamilyPasses) {
  const ScenarioTree t = mcv::testing::three_period();
  for (const auto& spec : all_specs()) {
    const DynamicReport rep = time_consistency_check(backward_family(spec, t), t, all_time_pairs(t), {4, 30, 200000});
    EXPECT_TRUE(rep.passed) << spec.str() << " " << rep.witness;
    EXPECT_EQ(rep.trials, 30);
  }
  EXPECT_TRUE(time_consistency_check(risk_neutral_family(t), t, all_time_pairs(t), {4, 30, 200000}).passed);
}

TEST(TimeConsistency, StaticMeanVarianceFails) {
  ProductTreeSpec spec;
  spec.steps.push_back({{{{q(2)}, q(1, 2)}, {{q(1, 2)}, q(1, 2)}}, {{q(0), q(1, 2)}, {q(1), q(1, 2)}}});
  spec.steps.push_back({{{{q(3, 2)}, q(1, 3)}, {{q(3, 4)}, q(2, 3)}}, {{q(0), q(1, 4)}, {q(2), q(3, 4)}}});
  const ScenarioTree t = build_tree(product_tree_config(spec));
  const DynamicReport rep = time_consistency_check(static_family(PrincipleSpec::mean_variance(q(1)), t), t, all_time_pairs(t), {4, 50, 200000});
  EXPECT_FALSE(rep.passed);
  EXPECT_EQ(rep.check, "time-consistency");
  EXPECT_NE(rep.witness.find("H="), std::string::npos);
}

TEST(TimeConsistency, UnorderedPairIsRejected) {
  const ScenarioTree t = mcv::testing::eight_leaf();
  EXPECT_THROW(time_consistency_check(risk_neutral_family(t), t, {{2, 1}}, {4, 1, 10}), Error);
}

TEST(RevealStructure, BackwardFamiliesPass) {
  for (const ScenarioTree& t : {mcv::testing::three_period(), two_reveals()}) {
    for (const auto& spec : {PrincipleSpec::mean_variance(q(1)), PrincipleSpec::avar(q(1, 2), q(1, 2))}) {
      const DynamicReport rep = reveal_structure_check(backward_family(spec, t), t, {5, 200, 200000});
      EXPECT_TRUE(rep.passed) << spec.str() << " " << rep.check << " " << rep.witness;
    }
  }
}

TEST(RevealStructure, PurelyFinancialTree) {
  ProductTreeSpec spec;
  spec.steps.push_back({{{{q(2)}, q(1, 2)}, {{q(1, 2)}, q(1, 2)}}, {}});
  spec.steps.push_back({{{{q(3, 2)}, q(1, 3)}, {{q(3, 4)}, q(2, 3)}}, {}});
  const ScenarioTree t = build_tree(product_tree_config(spec));
  const DynamicReport rep = reveal_structure_check(backward_family(PrincipleSpec::mean_variance(q(1)), t), t, {5, 100, 200000});
  EXPECT_TRUE(rep.passed) << rep.check << " " << rep.witness;
  EXPECT_TRUE(rep.exhaustive);
}

TEST(RevealStructure, CounterexampleSegmentFails) {
  const CounterexampleTemplate tmpl = canonical_counterexample_template();
  const CounterexampleReport cx = counterexample(tmpl, {1, 10, 200000});
  const Partition terminal = partition_for(tmpl.tree, ObservableSpec::full(1));
  const EvaluationOracle op = cx.op;
  const FamilyOracle family = [op, terminal](int t, const Payoff& h) {
    if (t == 0) return op(h);
    return ConditionalValue{terminal, h.values()};
  };
  const DynamicReport rep = reveal_structure_check(family, tmpl.tree, {5, 100, 200000});
  EXPECT_FALSE(rep.passed);
  EXPECT_EQ(rep.check, "market-local-property");
  EXPECT_NE(rep.witness.find("A=blocks"), std::string::npos);
}
