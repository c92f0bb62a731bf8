#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "mcv/duality.hpp"
#include "mcv/error.hpp"
#include "mcv/harness.hpp"
#include "mcv/twostep.hpp"

using namespace mcv;
using mcv::testing::q;

namespace {

CheckConfig config(long trials = 400, std::uint64_t budget = 200000) {
  CheckConfig cfg;
  cfg.search = {7, trials, budget};
  return cfg;
}

Partition trivial(const ScenarioTree& t) { return Partition::trivial(t.num_leaves()); }

}  // namespace

TEST(Harness, TwoStepStdDevPassesRequiredAxioms) {
  const ScenarioTree t = mcv::testing::four_leaf_correlated();
  const AxiomReport rep = check_axioms(TwoStepEvaluator(t, PrincipleSpec::std_dev(q(1, 2))).oracle(), t, trivial(t), config());
  EXPECT_TRUE(rep.passed()) << rep.csv();
  EXPECT_EQ(rep.at("cash-invariance").status, AxiomStatus::PassExhaustive);
  EXPECT_EQ(rep.at("market-consistency").status, AxiomStatus::PassExhaustive);
  EXPECT_EQ(rep.at("positive-homogeneity").status, AxiomStatus::PassExhaustive);
  EXPECT_EQ(rep.at("fatou").status, AxiomStatus::Structural);
  EXPECT_EQ(rep.mode, "float-tolerance");
}

TEST(Harness, LargeLoadingBreaksMonotonicityOnly) {
  const ScenarioTree t = mcv::testing::insurance_only();
  const AxiomReport rep = check_axioms(principle_oracle(PrincipleSpec::std_dev(q(3)), t, trivial(t)), t, trivial(t), config());
  EXPECT_EQ(rep.at("monotonicity").status, AxiomStatus::Fail);
  EXPECT_FALSE(rep.at("monotonicity").required);
  EXPECT_TRUE(rep.passed()) << rep.csv();
  EXPECT_TRUE(replay_witness(principle_oracle(PrincipleSpec::std_dev(q(3)), t, trivial(t)), t, trivial(t), rep.at("monotonicity")));
}

TEST(Harness, RiskNeutralPassesEverything) {
  const ScenarioTree t = mcv::testing::four_leaf();
  CheckConfig cfg = config();
  cfg.pnorm = PNormBound{q(1), {q(4)}, {}};
  const AxiomReport rep = check_axioms(risk_neutral_oracle(t), t, trivial(t), cfg);
  for (const auto& r : rep.results) EXPECT_NE(r.status, AxiomStatus::Fail) << r.axiom << " " << r.witness;
  EXPECT_EQ(rep.mode, "rational-exact");
}

TEST(Harness, ConditionalOperatorOnFinerG) {
  const ScenarioTree t = mcv::testing::eight_leaf();
  std::vector<int> labels;
  for (int leaf = 0; leaf < 8; ++leaf) labels.push_back(t.insurance(leaf, 2).sign());
  const Partition g = Partition::from_labels(labels);
  const AxiomReport rep =
      check_axioms(TwoStepEvaluator(t.with_g_partition(g), PrincipleSpec::mean_variance(q(1))).oracle(), t, g, config(300, 20000));
  EXPECT_TRUE(rep.passed()) << rep.csv();
  EXPECT_EQ(rep.at("local-property").status, AxiomStatus::PassSampled);
}

TEST(Harness, PlainPrincipleFailsMarketConsistency) {
  const ScenarioTree t = mcv::testing::four_leaf_correlated();
  const EvaluationOracle plain = principle_oracle(PrincipleSpec::mean_variance(q(1)), t, trivial(t));
  const AxiomReport rep = check_axioms(plain, t, trivial(t), config());
  EXPECT_FALSE(rep.passed());
  const AxiomResult& mc = rep.at("market-consistency");
  EXPECT_EQ(mc.status, AxiomStatus::Fail);
  EXPECT_TRUE(replay_witness(plain, t, trivial(t), mc));
  CheckConfig lenient = config();
  lenient.market_required = false;
  EXPECT_TRUE(check_axioms(plain, t, trivial(t), lenient).passed());
}

TEST(Harness, CounterexampleFailsMarketLocalProperty) {
  const CounterexampleTemplate tmpl = canonical_counterexample_template();
  const CounterexampleReport cx = counterexample(tmpl, {1, 200, 200000});
  const Partition g = tmpl.tree.g_partition();
  const AxiomReport rep = check_axioms(cx.op, tmpl.tree, g, config(300, 30000));
  EXPECT_NE(rep.at("cash-invariance").status, AxiomStatus::Fail);
  EXPECT_NE(rep.at("convexity").status, AxiomStatus::Fail);
  EXPECT_NE(rep.at("market-consistency").status, AxiomStatus::Fail) << rep.at("market-consistency").witness;
  const AxiomResult& ml = rep.at("market-local-property");
  EXPECT_EQ(ml.status, AxiomStatus::Fail);
  EXPECT_TRUE(replay_witness(cx.op, tmpl.tree, g, ml));
}

TEST(Harness, PNormBoundDetectsViolation) {
  const ScenarioTree t = mcv::testing::insurance_only();
  CheckConfig cfg = config();
  cfg.pnorm = PNormBound{q(2), {q(1, 10)}, {}};
  const EvaluationOracle op = principle_oracle(PrincipleSpec::mean_variance(q(1)), t, trivial(t));
  const AxiomReport rep = check_axioms(op, t, trivial(t), cfg);
  const AxiomResult& r = rep.at("p-norm-bound");
  EXPECT_EQ(r.status, AxiomStatus::Fail);
  EXPECT_TRUE(replay_witness(op, t, trivial(t), r, cfg.pnorm));
  EXPECT_THROW(replay_witness(op, t, trivial(t), r), Error);
}

TEST(Harness, CsvQuotesAndColumns) {
  AxiomReport rep;
  rep.results.push_back({"convexity", AxiomStatus::Fail, 3, "H1=1,2;H2=0", 5, true});
  EXPECT_EQ(rep.csv(), "axiom,status,trials,witness,seed\nconvexity,fail,3,\"H1=1,2;H2=0\",5\n");
  EXPECT_FALSE(rep.passed());
  EXPECT_THROW(rep.at("missing"), Error);
}

TEST(Harness, OracleErrorsAreWrapped) {
  const ScenarioTree t = mcv::testing::four_leaf();
  const EvaluationOracle throwing = [](const Payoff&) -> ConditionalValue { throw std::runtime_error("boom"); };
  try {
    check_axioms(throwing, t, trivial(t), config());
    FAIL() << "expected OracleFailure";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OracleFailure);
  }
  const EvaluationOracle wrong = [](const Payoff& h) { return ConditionalValue{Partition::discrete(h.size()), h.values()}; };
  EXPECT_THROW(check_axioms(wrong, t, trivial(t), config()), Error);
}

TEST(Harness, MalformedWitnessIsRejected) {
  const ScenarioTree t = mcv::testing::four_leaf();
  const AxiomResult bad{"cash-invariance", AxiomStatus::Fail, 1, "H=1 2", 0, true};
  EXPECT_THROW(replay_witness(risk_neutral_oracle(t), t, trivial(t), bad), Error);
  const AxiomResult unknown{"nonsense", AxiomStatus::Fail, 1, "H=1 2 3 4", 0, true};
  EXPECT_THROW(replay_witness(risk_neutral_oracle(t), t, trivial(t), unknown), Error);
}
