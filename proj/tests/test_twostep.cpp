#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "mcv/error.hpp"
#include "mcv/twostep.hpp"

using namespace mcv;
using mcv::testing::payoff;
using mcv::testing::q;

namespace {

std::vector<PrincipleSpec> all_specs() {
  return {PrincipleSpec::expectation(),       PrincipleSpec::mean_variance(q(2)), PrincipleSpec::std_dev(q(1, 2)),
          PrincipleSpec::semi_deviation(q(1, 2), q(1)), PrincipleSpec::avar(q(1, 2), q(1, 2)),
          PrincipleSpec::exponential(q(2))};
}

Real eq0(const ScenarioTree& t, const Payoff& h) {
  return cond_expectation(t, h, Partition::trivial(t.num_leaves()), risk_neutral_measure(t)).values[0];
}

}  // namespace

TEST(TwoStep, FinancialPayoffIsPricedAtRiskNeutralValue) {
  const ScenarioTree t = mcv::testing::eight_leaf();
  std::vector<Real> s;
  for (int leaf = 0; leaf < t.num_leaves(); ++leaf) s.push_back(t.stock(leaf, 2)[0] * t.stock(leaf, 2)[0]);
  const Payoff h(s);
  for (const auto& spec : all_specs()) EXPECT_TRUE(approx_equal(two_step(spec, h, t).values[0], eq0(t, h))) << spec.str();
}

TEST(TwoStep, NoMarketReducesToThePrinciple) {
  const ScenarioTree t = mcv::testing::insurance_only();
  const Payoff h = payoff({q(3), q(-1), q(2)});
  for (const auto& spec : all_specs()) {
    EXPECT_TRUE(approx_equal(two_step(spec, h, t).values[0], evaluate(spec, h, Partition::trivial(3), t).values[0])) << spec.str();
  }
}

TEST(TwoStep, EquityLinkedFactorisation) {
  const ScenarioTree t = mcv::testing::four_leaf(q(1, 3), q(1, 4));
  std::vector<Real> fy;
  std::vector<Real> f;
  std::vector<Real> y;
  for (int leaf = 0; leaf < 4; ++leaf) {
    const Real fs = t.stock(leaf, 1)[0] + q(1);
    f.push_back(fs);
    y.push_back(t.insurance(leaf, 1) * q(3));
    fy.push_back(fs * y.back());
  }
  for (const auto& spec : {PrincipleSpec::expectation(), PrincipleSpec::std_dev(q(1)), PrincipleSpec::avar(q(1, 2), q(1, 2))}) {
    const Real lhs = two_step(spec, Payoff(fy), t).values[0];
    const Real rhs = eq0(t, Payoff(f)) * evaluate(spec, Payoff(y), Partition::trivial(4), t).values[0];
    EXPECT_TRUE(approx_equal(lhs, rhs)) << spec.str() << ": " << lhs << " vs " << rhs;
  }
}

TEST(TwoStep, InnerAndOuterSteps) {
  const ScenarioTree t = mcv::testing::four_leaf();
  const TwoStepEvaluator ev(t, PrincipleSpec::mean_variance(q(2)));
  const Payoff h = payoff({q(0), q(2), q(1), q(1)});
  const ConditionalValue inner = ev.inner(h);
  EXPECT_EQ(inner.values, (std::vector<Real>{q(2), q(1)}));
  EXPECT_EQ(ev.outer(inner.lift()).values[0], q(1, 3) * q(2) + q(2, 3) * q(1));
  EXPECT_EQ(ev(h).values[0], q(4, 3));
  EXPECT_EQ(ev.inner_partition().num_blocks(), 2);
}

TEST(TwoStep, CustomInitialInformation) {
  const ScenarioTree t = mcv::testing::eight_leaf();
  std::vector<int> labels;
  for (int leaf = 0; leaf < 8; ++leaf) labels.push_back(t.insurance(leaf, 2).sign());
  const Partition g = Partition::from_labels(labels);
  const Payoff h = payoff({q(1), q(0), q(2), q(1), q(0), q(3), q(1), q(1)});
  const ConditionalValue v = two_step(PrincipleSpec::mean_variance(q(1)), h, t, g);
  EXPECT_EQ(v.partition, g);
  // G reveals the insurance outcome, so the inner step sees everything.
  EXPECT_EQ(v.values, cond_expectation(t, h, g, risk_neutral_measure(t)).values);
}

TEST(Numeraire, StockPricesItself) {
  const ScenarioTree t = mcv::testing::eight_leaf();
  std::vector<Real> s;
  for (int leaf = 0; leaf < 8; ++leaf) s.push_back(t.stock(leaf, 2)[0]);
  const NumeraireResult r = numeraire_transform(0, Payoff(s), t, PrincipleSpec::std_dev(q(1)));
  EXPECT_EQ(r.transformed.values[0], Real(1));
  EXPECT_EQ(r.rescaled.values[0], t.root().stock[0]);
  EXPECT_THROW(numeraire_transform(1, Payoff(s), t, PrincipleSpec::std_dev(q(1))), Error);
}

TEST(Numeraire, IdentityOnRandomTrees) {
  Rng rng(17);
  for (int i = 0; i < 25; ++i) {
    RandomTreeOptions opts;
    opts.random_rate = i % 2 == 0;
    opts.num_stocks = 1 + i % 2;
    const ScenarioTree t = random_tree(rng, opts);
    const Payoff h = random_rational_payoff(rng, t.num_leaves());
    const auto specs = all_specs();
    const PrincipleSpec& spec = specs[static_cast<size_t>(i) % specs.size()];
    const NumeraireResult r = numeraire_transform(i % t.num_stocks(), h, t, spec);
    EXPECT_TRUE(approx_equal(r.rescaled, two_step(spec, h, t))) << spec.str();
  }
}

TEST(MarketConsistency, TwoStepAndRiskNeutralPass) {
  const ScenarioTree t = mcv::testing::four_leaf_correlated();
  const SearchConfig cfg{1, 2000, 200000};
  for (const auto& spec : all_specs()) {
    const WitnessReport rep = market_consistency_witness(TwoStepEvaluator(t, spec).oracle(), t, cfg);
    EXPECT_TRUE(rep.passed) << spec.str() << " " << rep.witness;
    EXPECT_TRUE(rep.exhaustive);
  }
  EXPECT_TRUE(market_consistency_witness(risk_neutral_oracle(t), t, cfg).passed);
  EXPECT_TRUE(financial_agreement_witness(risk_neutral_oracle(t), t, cfg).passed);
}

TEST(MarketConsistency, PlainPrincipleOnCorrelatedTreeFails) {
  const ScenarioTree t = mcv::testing::four_leaf_correlated();
  const EvaluationOracle plain = principle_oracle(PrincipleSpec::mean_variance(q(1)), t, Partition::trivial(4));
  const WitnessReport rep = market_consistency_witness(plain, t, {1, 2000, 200000});
  EXPECT_FALSE(rep.passed);
  EXPECT_NE(rep.witness.find("HS="), std::string::npos);
  EXPECT_FALSE(financial_agreement_witness(plain, t, {1, 2000, 200000}).passed);
}

TEST(MarketConsistency, SampledBeyondBudget) {
  const ScenarioTree t = mcv::testing::three_period();
  const WitnessReport rep = market_consistency_witness(TwoStepEvaluator(t, PrincipleSpec::mean_variance(q(1))).oracle(), t, {3, 300, 1000});
  EXPECT_TRUE(rep.passed);
  EXPECT_FALSE(rep.exhaustive);
  EXPECT_EQ(rep.trials, 300);
}
