#include <gtest/gtest.h>

#include <cstdlib>

#include "fixtures.hpp"
#include "mcv/error.hpp"
#include "mcv/linear_algebra.hpp"
#include "mcv/sampling.hpp"
#include "mcv/scenario_tree.hpp"

using namespace mcv;
using mcv::testing::payoff;
using mcv::testing::q;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::OracleFailure;
}

TreeConfig one_step(std::vector<std::pair<Real, Real>> moves) {
  TreeConfig cfg;
  cfg.nodes.push_back({"r", std::nullopt, {q(1)}, q(0), std::nullopt});
  int k = 0;
  for (const auto& [s, p] : moves) cfg.nodes.push_back({"c" + std::to_string(k++), "r", {s}, std::nullopt, p});
  return cfg;
}

}  // namespace

TEST(Real, ExactArithmeticAndParsing) {
  EXPECT_EQ(Real::parse("-1/4") + Real::parse("0.75"), q(1, 2));
  EXPECT_EQ(Real::parse("2.5e-3"), q(1, 400));
  EXPECT_THROW(Real::parse("abc"), std::invalid_argument);
  EXPECT_TRUE(sqrt(q(9, 4)).is_exact());
  EXPECT_EQ(sqrt(q(9, 4)), q(3, 2));
  EXPECT_FALSE(sqrt(q(2)).is_exact());
  EXPECT_EQ(root(q(8, 27), 3), q(2, 3));
  EXPECT_EQ(exp(q(0)), Real(1));
  EXPECT_EQ(log(q(1)), Real(0));
  EXPECT_EQ(q(3, 6).str(), "1/2");
}

TEST(Real, ToleranceComparison) {
  EXPECT_FALSE(approx_equal(q(1), q(1) + q(1, 1000000000000)));
  EXPECT_TRUE(approx_equal(Real::inexact(1.0), Real::inexact(1.0 + 1e-12)));
  EXPECT_FALSE(approx_equal(Real::inexact(1.0), Real::inexact(1.0 + 1e-6)));
  EXPECT_TRUE(approx_equal(Real::inexact(0.0), Real::inexact(1e-13)));
}

TEST(Partition, RefinementAndJoin) {
  const Partition a = Partition::from_blocks({{0, 1}, {2, 3}}, 4);
  const Partition b = Partition::from_blocks({{0, 2}, {1, 3}}, 4);
  EXPECT_TRUE(a.refines(Partition::trivial(4)));
  EXPECT_FALSE(a.refines(b));
  EXPECT_EQ(a.join(b), Partition::discrete(4));
  EXPECT_TRUE(a.is_measurable({true, true, false, false}));
  EXPECT_FALSE(a.is_measurable({true, false, false, false}));
  EXPECT_EQ(code_of([] { Partition::from_blocks({{0, 1}, {1, 2}}, 3); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of([] { Partition::from_blocks({{0}}, 2); }), ErrorCode::InvalidConfig);
}

TEST(LinearAlgebra, SolveStatuses) {
  const LinearSolution u = solve_linear({{q(2), q(1)}, {q(1), q(3)}}, {q(3), q(4)});
  ASSERT_EQ(u.status, LinearSolution::Status::Unique);
  EXPECT_EQ(u.x[0], q(1));
  EXPECT_EQ(u.x[1], q(1));
  EXPECT_EQ(solve_linear({{q(1), q(1)}}, {q(1)}).status, LinearSolution::Status::Underdetermined);
  EXPECT_EQ(solve_linear({{q(1)}, {q(1)}}, {q(1), q(2)}).status, LinearSolution::Status::Inconsistent);
}

TEST(BuildTree, BinomialMinimalMarket) {
  const ScenarioTree t = mcv::testing::binomial();
  EXPECT_EQ(t.num_leaves(), 2);
  EXPECT_EQ(t.horizon(), 1);
  EXPECT_EQ(t.stock(0, 1)[0], q(2));
  EXPECT_EQ(t.stock(1, 1)[0], q(1, 2));
  EXPECT_TRUE(t.reveal_times().empty());
}

TEST(BuildTree, RejectsInsuranceOffRevealTimes) {
  TreeConfig cfg = one_step({{q(2), q(1, 2)}, {q(1, 2), q(1, 2)}});
  cfg.nodes[1].insurance = q(1);
  EXPECT_EQ(code_of([&] { build_tree(cfg); }), ErrorCode::InvalidConfig);
  cfg.reveal_times = {1};
  EXPECT_NO_THROW(build_tree(cfg));
}

TEST(BuildTree, RejectsBadProbabilitiesAndStocks) {
  EXPECT_EQ(code_of([] { build_tree(one_step({{q(2), q(1, 2)}, {q(1, 2), q(1, 3)}})); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of([] { build_tree(one_step({{q(2), q(1)}, {q(1, 2), q(0)}})); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of([] { build_tree(one_step({{q(2), q(1, 2)}, {q(-1), q(1, 2)}})); }), ErrorCode::InvalidConfig);
  TreeConfig dup = one_step({{q(2), q(1, 2)}, {q(1, 2), q(1, 2)}});
  dup.nodes[2].id = "c0";
  EXPECT_EQ(code_of([&] { build_tree(dup); }), ErrorCode::InvalidConfig);
}

TEST(BuildTree, TwoPeriodWithLateReveal) {
  const ScenarioTree t = mcv::testing::eight_leaf();
  EXPECT_EQ(t.num_leaves(), 8);
  for (int leaf = 0; leaf < 8; ++leaf) EXPECT_EQ(t.insurance(leaf, 1), Real(0));
  EXPECT_EQ(t.reveal_times(), std::set<int>{2});
  Real total;
  for (const auto& p : t.leaf_prob()) total += p;
  EXPECT_EQ(total, Real(1));
}

TEST(BuildTree, LeafProbabilityTable) {
  TreeConfig cfg = one_step({{q(2), q(1, 2)}, {q(1, 2), q(1, 2)}});
  cfg.nodes[1].prob.reset();
  cfg.nodes[2].prob.reset();
  cfg.leaf_prob = {{"c0", q(1, 3)}, {"c1", q(2, 3)}};
  const ScenarioTree t = build_tree(cfg);
  EXPECT_EQ(t.leaf_prob()[0], q(1, 3));
  cfg.leaf_prob["c1"] = q(1, 3);
  EXPECT_EQ(code_of([&] { build_tree(cfg); }), ErrorCode::InvalidConfig);
}

TEST(PartitionFor, Examples) {
  const ScenarioTree bin = mcv::testing::binomial();
  EXPECT_EQ(partition_for(bin, ObservableSpec::trivial()).num_blocks(), 1);
  EXPECT_EQ(partition_for(bin, ObservableSpec::financial(1)).num_blocks(), 2);
  const ScenarioTree four = mcv::testing::four_leaf();
  const Partition fs = partition_for(four, ObservableSpec::financial(1));
  EXPECT_EQ(fs, Partition::from_blocks({{0, 1}, {2, 3}}, 4));
  EXPECT_EQ(partition_for(four, ObservableSpec::full(1)), Partition::discrete(4));
  EXPECT_EQ(code_of([&] { partition_for(four, ObservableSpec::full(2)); }), ErrorCode::UnknownTime);
}

TEST(PartitionFor, RefinementChain) {
  const ScenarioTree t = mcv::testing::three_period();
  for (int s = 0; s <= t.horizon(); ++s) {
    const Partition f = partition_for(t, ObservableSpec::full(s));
    const Partition fs = partition_for(t, ObservableSpec::financial(s));
    EXPECT_TRUE(f.refines(fs));
    EXPECT_TRUE(fs.refines(partition_for(t, ObservableSpec::initial())));
    EXPECT_TRUE(partition_for(t, ObservableSpec::financial_after(s, t.horizon())).refines(f));
  }
}

TEST(CondExpectation, Examples) {
  const ScenarioTree four = mcv::testing::four_leaf();
  const Payoff h = payoff({q(1), q(2), q(3), q(4)});
  EXPECT_EQ(cond_expectation(four, h, Partition::trivial(4)).values[0], q(5, 2));
  const ConditionalValue halves = cond_expectation(four, h, Partition::from_blocks({{0, 1}, {2, 3}}, 4));
  EXPECT_EQ(halves.values, (std::vector<Real>{q(3, 2), q(7, 2)}));
  const ConditionalValue c = cond_expectation(four, Payoff::constant(4, q(7)), Partition::discrete(4));
  for (const auto& v : c.values) EXPECT_EQ(v, q(7));
}

TEST(CondExpectation, TowerProperty) {
  Rng rng(11);
  const ScenarioTree t = random_tree(rng);
  const Density xi = risk_neutral_measure(t);
  const Partition fine = partition_for(t, ObservableSpec::financial(t.horizon()));
  const Partition coarse = partition_for(t, ObservableSpec::financial(1));
  for (int i = 0; i < 20; ++i) {
    const Payoff h = random_rational_payoff(rng, t.num_leaves());
    const ConditionalValue inner = cond_expectation(t, h, fine, xi);
    EXPECT_EQ(cond_expectation(t, inner.lift(), coarse, xi).values, cond_expectation(t, h, coarse, xi).values);
  }
}

TEST(CondExpectation, ZeroMassBlock) {
  const ScenarioTree four = mcv::testing::four_leaf();
  const Density signed_xi{{q(2), q(-2), q(3), q(1)}, Partition::trivial(4)};
  EXPECT_EQ(code_of([&] { cond_expectation(four, Payoff::constant(4, q(1)), Partition::from_blocks({{0, 1}, {2, 3}}, 4), signed_xi); }),
            ErrorCode::ZeroBlockMass);
}

TEST(RiskNeutral, BinomialWeights) {
  const ScenarioTree t = mcv::testing::binomial();
  const Density xi = risk_neutral_measure(t);
  EXPECT_EQ(xi.weight[0] * t.leaf_prob()[0], q(1, 3));
  EXPECT_EQ(xi.weight[1] * t.leaf_prob()[1], q(2, 3));
}

TEST(RiskNeutral, IncompleteAndArbitrage) {
  EXPECT_EQ(code_of([] { risk_neutral_measure(build_tree(one_step({{q(2), q(1, 3)}, {q(1), q(1, 3)}, {q(1, 2), q(1, 3)}}))); }),
            ErrorCode::IncompleteMarket);
  EXPECT_EQ(code_of([] { risk_neutral_measure(build_tree(one_step({{q(11, 10), q(1, 2)}, {q(21, 20), q(1, 2)}}))); }),
            ErrorCode::Arbitrage);
}

TEST(RiskNeutral, MartingaleAndMeasurability) {
  Rng rng(5);
  for (int i = 0; i < 10; ++i) {
    RandomTreeOptions opts;
    opts.num_stocks = 1 + i % 2;
    opts.random_rate = i % 3 == 0;
    const ScenarioTree t = random_tree(rng, opts);
    const Density xi = risk_neutral_measure(t);
    const Partition fs = partition_for(t, ObservableSpec::financial(t.horizon()));
    for (int b = 0; b < fs.num_blocks(); ++b) {
      for (int leaf : fs.block(b)) EXPECT_EQ(xi.weight[static_cast<size_t>(leaf)], xi.weight[static_cast<size_t>(fs.block(b)[0])]);
    }
    for (int j = 0; j < t.num_stocks(); ++j) {
      std::vector<Real> disc;
      for (int leaf = 0; leaf < t.num_leaves(); ++leaf) disc.push_back(t.stock(leaf, t.horizon())[static_cast<size_t>(j)] / t.bond(t.horizon()));
      EXPECT_EQ(cond_expectation(t, Payoff(disc), Partition::trivial(t.num_leaves()), xi).values[0], t.root().stock[static_cast<size_t>(j)]);
    }
  }
}

TEST(Sampling, DeterministicStreams) {
  Rng a(42, 3);
  Rng b(42, 3);
  Rng c(42, 4);
  const auto x = a.next();
  EXPECT_EQ(x, b.next());
  EXPECT_NE(x, c.next());
  EXPECT_EQ(lattice_size(16, -2, 2, 1000), 1001U);
  EXPECT_EQ(lattice_size(3, -2, 2, 1000), 125U);
  EXPECT_EQ(lattice_payoff(0, 3), payoff({q(-2), q(-2), q(-2)}));
  EXPECT_EQ(lattice_payoff(7, 3), payoff({q(0), q(-1), q(-2)}));
}

TEST(Sampling, SeedFromEnvironment) {
  setenv("MCV_SEED", "77", 1);
  EXPECT_EQ(default_seed(), 77U);
  unsetenv("MCV_SEED");
  EXPECT_EQ(default_seed(), 20240611U);
}
