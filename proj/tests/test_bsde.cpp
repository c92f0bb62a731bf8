#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "mcv/bsde.hpp"
#include "mcv/error.hpp"

using namespace mcv;
using mcv::testing::q;

namespace {

GridModel jump_model(int steps) {
  GridModel m;
  m.steps = steps;
  m.h = q(1, 4);
  m.mu = q(1, 2);
  m.sigma = q(1);
  m.r = q(1, 4);
  m.insurance_brownians = 1;
  m.marks = {{q(1), q(1)}};
  return m;
}

Payoff mixed_payoff(const GridTree& g) {
  const Payoff s = g.terminal_stock();
  const Payoff y = g.terminal_insurance();
  std::vector<Real> v;
  for (int i = 0; i < s.size(); ++i) v.push_back(s[i] * y[i] + y[i] * y[i] - s[i]);
  return Payoff(std::move(v));
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::OracleFailure;
}

}  // namespace

TEST(GridTree, BranchCountAndProbabilities) {
  const GridTree g = build_grid_tree(jump_model(2));
  EXPECT_EQ(g.tree.num_leaves(), 144);
  EXPECT_EQ(g.tree.root().children.size(), 12U);
  Real total;
  for (const auto& p : g.tree.leaf_prob()) total += p;
  EXPECT_EQ(total, Real(1));
  EXPECT_EQ(g.tree.reveal_times().size(), 2U);
}

TEST(GridTree, IncrementMomentsUnderP) {
  const GridTree g = build_grid_tree(jump_model(1));
  Real mean_w;
  Real var_w;
  Real mean_n;
  Real var_n;
  for (int c : g.tree.root().children) {
    const auto& node = g.tree.node(c);
    const auto& inc = g.increments[static_cast<size_t>(c)];
    mean_w += node.branch_prob * inc.dw[0];
    var_w += node.branch_prob * inc.dw[0] * inc.dw[0];
    mean_n += node.branch_prob * Real(inc.jumps[0]);
    var_n += node.branch_prob * Real(inc.jumps[0] * inc.jumps[0]);
  }
  var_n -= mean_n * mean_n;
  EXPECT_EQ(mean_w, Real(0));
  EXPECT_EQ(var_w, q(1, 4));
  EXPECT_EQ(mean_n, q(1, 4));
  EXPECT_EQ(var_n, q(1, 4));
}

TEST(GridTree, RejectsBadParameters) {
  GridModel m = jump_model(1);
  m.sigma = q(0);
  EXPECT_EQ(code_of([&] { build_grid_tree(m); }), ErrorCode::InvalidParam);
  m = jump_model(1);
  m.marks[0].nu = q(4);
  EXPECT_EQ(code_of([&] { build_grid_tree(m); }), ErrorCode::InvalidParam);
  m = jump_model(1);
  m.h = q(0);
  EXPECT_EQ(code_of([&] { build_grid_tree(m); }), ErrorCode::InvalidParam);
}

TEST(Drivers, MeanVarianceExamples) {
  GridModel m;
  m.mu = q(0);
  m.r = q(1, 2);
  m.marks = {};
  const DriverFn g = driver_mv(q(3), m);
  EXPECT_EQ(g.eval(0, q(0), {q(0)}, {}), Real(0));
  EXPECT_EQ(g.eval(0, q(2), {q(0)}, {}), Real(1));
  GridModel flat;
  flat.insurance_brownians = 2;
  EXPECT_EQ(driver_mv(q(2), flat).eval(0, q(5), {q(1), q(1)}, {}), Real(2));
  EXPECT_EQ(code_of([&] { driver_mv(q(-1), m); }), ErrorCode::InvalidParam);
}

TEST(Drivers, ExponentialExamples) {
  GridModel m;
  m.marks = {{q(1), q(1)}};
  const DriverFn g = driver_exp(q(1), m);
  EXPECT_EQ(g.eval(0, q(0), {q(0)}, {q(0)}), Real(0));
  EXPECT_NEAR(g.eval(0, q(0), {q(0)}, {Real::inexact(std::log(2.0))}).to_double(), 1.0 - std::log(2.0), 1e-12);
  EXPECT_EQ(driver_exp(q(2), m).eval(0, q(0), {q(2)}, {q(0)}), Real(1));
  EXPECT_EQ(code_of([&] { driver_exp(q(0), m); }), ErrorCode::InvalidParam);
}

TEST(Drivers, MarketConsistencyCriterion) {
  const GridModel m = jump_model(3);
  EXPECT_TRUE(driver_mc_check(driver_mv(q(2), m), m, 2000, 7).passed);
  EXPECT_TRUE(driver_mc_check(driver_exp(q(1, 2), m), m, 2000, 7).passed);
  const DriverFn linear{"linear", [theta = m.theta()](int, const Real& zf, const std::vector<Real>&,
                                                      const std::vector<Real>&) { return theta * zf; }};
  EXPECT_TRUE(driver_mc_check(linear, m, 500, 1).passed);
  const DriverFn square{"square", [](int, const Real& zf, const std::vector<Real>&, const std::vector<Real>&) {
                          return zf * zf;
                        }};
  const DriverCheckReport rep = driver_mc_check(square, m, 500, 1);
  EXPECT_FALSE(rep.passed);
  EXPECT_NE(rep.witness.find("zf1="), std::string::npos);
  EXPECT_EQ(code_of([&] { driver_mc_check(linear, m, 1, 1); }), ErrorCode::InvalidParam);
}

TEST(Drivers, TableCheck) {
  GridModel m;
  m.mu = q(0);
  m.r = q(1, 2);
  std::vector<DriverSample> rows{{0, q(1), {q(1)}, {}, q(1, 2) + q(3)},
                                 {0, q(2), {q(1)}, {}, q(1) + q(3)},
                                 {1, q(2), {q(0)}, {}, q(1)}};
  EXPECT_TRUE(driver_table_check(rows, m).passed);
  rows.push_back({0, q(4), {q(1)}, {}, q(16)});
  const DriverCheckReport rep = driver_table_check(rows, m);
  EXPECT_FALSE(rep.passed);
  EXPECT_FALSE(rep.witness.empty());
}

TEST(SolveDiscrete, IdentitiesHoldExactlyWithJumps) {
  for (int steps : {2, 3}) {
    const GridTree g = build_grid_tree(jump_model(steps));
    const Payoff h = mixed_payoff(g);
    const BsdeSolution sol = solve_discrete(PrincipleSpec::mean_variance(q(1)), h, g);
    ASSERT_TRUE(sol.y.front().is_exact());
    EXPECT_TRUE(reconstruction_check(sol, g, q(1)).passed);
    EXPECT_TRUE(drift_identity_check(sol, g, q(1)).passed);
    EXPECT_TRUE(orthogonality_check(sol, g).passed);
    EXPECT_TRUE(law_check(sol, g).passed);
    EXPECT_EQ(reconstruction_check(sol, g, q(1)).nodes, static_cast<long>(sol.steps.size()));
  }
}

TEST(SolveDiscrete, WrongAlphaBreaksTheIdentity) {
  const GridTree g = build_grid_tree(jump_model(2));
  const BsdeSolution sol = solve_discrete(PrincipleSpec::mean_variance(q(1)), mixed_payoff(g), g);
  const BsdeCheckReport rep = reconstruction_check(sol, g, q(2));
  EXPECT_FALSE(rep.passed);
  EXPECT_NE(rep.witness.find("node="), std::string::npos);
  EXPECT_FALSE(drift_identity_check(sol, g, q(2)).passed);
}

TEST(SolveDiscrete, ReplicablePayoffHasNoInsuranceIntegrand) {
  const GridTree g = build_grid_tree(jump_model(2));
  const BsdeSolution sol = solve_discrete(PrincipleSpec::mean_variance(q(3)), g.terminal_stock(), g);
  for (const auto& st : sol.steps) {
    EXPECT_EQ(st.z[0], Real(0));
    EXPECT_EQ(st.ztilde[0], Real(0));
    EXPECT_EQ(st.lvar, Real(0));
    for (const auto& l : st.delta_l) EXPECT_EQ(l, Real(0));
  }
  EXPECT_TRUE(drift_identity_check(sol, g, q(3)).passed);
}

TEST(SolveDiscrete, PureBrownianInsuranceRisk) {
  GridModel m = jump_model(2);
  m.marks.clear();
  const GridTree g = build_grid_tree(m);
  const Real alpha = q(2);
  const BsdeSolution sol = solve_discrete(PrincipleSpec::mean_variance(alpha), g.terminal_insurance(), g);
  EXPECT_EQ(sol.y.front().values.front(), alpha / Real(2) * m.h * Real(m.steps));
  EXPECT_TRUE(reconstruction_check(sol, g, alpha).passed);
  EXPECT_TRUE(drift_identity_check(sol, g, alpha).passed);
  for (const auto& st : sol.steps) EXPECT_EQ(st.z[0], Real(1));
}

TEST(SolveDiscrete, ZeroAlphaIsRiskNeutral) {
  const GridTree g = build_grid_tree(jump_model(2));
  const BsdeSolution sol = solve_discrete(PrincipleSpec::mean_variance(q(0)), mixed_payoff(g), g);
  EXPECT_TRUE(drift_identity_check(sol, g, q(0)).passed);
  const Real theta = g.model.theta();
  for (const auto& st : sol.steps) EXPECT_EQ(st.p_drift, -theta * st.zf * g.model.h);
}

TEST(SolveDiscrete, DegenerateMarkIsSingular) {
  GridModel m = jump_model(1);
  m.marks[0].nu = q(0);
  const GridTree g = build_grid_tree(m);
  EXPECT_EQ(code_of([&] { solve_discrete(PrincipleSpec::mean_variance(q(1)), g.terminal_insurance(), g); }),
            ErrorCode::SingularProjection);
}

TEST(ExpTower, PureInsurancePayoffs) {
  const GridTree g = build_grid_tree(jump_model(3));
  const Payoff y = g.terminal_insurance();
  std::vector<Real> v;
  for (int i = 0; i < y.size(); ++i) v.push_back(y[i] * y[i] / Real(4));
  const Payoff h(std::move(v));
  for (const Real& gamma : {q(1, 2), q(1), q(5)}) {
    const ExpTowerReport rep = exp_tower_check(gamma, h, g);
    EXPECT_TRUE(rep.passed) << gamma << ": " << rep.recursive << " vs " << rep.one_shot;
  }
  const ExpTowerReport flat = exp_tower_check(q(1), Payoff::constant(y.size(), q(3)), g);
  EXPECT_EQ(flat.recursive, Real(3));
  EXPECT_EQ(flat.one_shot, Real(3));
  EXPECT_EQ(code_of([&] { exp_tower_check(q(1), g.terminal_stock(), g); }), ErrorCode::NotPureInsurance);
}

TEST(TrendReport, RowsPerStepSize) {
  GridModel m;
  m.mu = q(1, 10);
  m.r = q(0);
  const auto rows = trend_report(m, q(1, 4), {q(1, 4), q(1, 8), q(1, 16)}, q(1),
                                 [](const Real& s, const Real& y) { return s * y + y * y; });
  ASSERT_EQ(rows.size(), 3U);
  EXPECT_EQ(rows[0].steps, 1);
  EXPECT_EQ(rows[1].steps, 2);
  EXPECT_EQ(rows[2].steps, 4);
  EXPECT_EQ(rows[2].leaves, 256);
  EXPECT_EQ(code_of([&] { trend_report(m, q(1, 4), {q(1, 3)}, q(1), [](const Real& s, const Real&) { return s; }); }),
            ErrorCode::InvalidParam);
}
