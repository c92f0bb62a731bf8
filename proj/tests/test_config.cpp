#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "mcv/config.hpp"
#include "mcv/error.hpp"

using namespace mcv;
using mcv::testing::q;

namespace {

const char* kBinomial = R"({
  "bond_rate": 0,
  "reveal_times": [],
  "nodes": [
    {"id": "root", "stock": [1]},
    {"id": "u", "parent": "root", "stock": [2], "prob": "1/2"},
    {"id": "d", "parent": "root", "stock": ["1/2"], "prob": 0.5}
  ]
})";

const char* kProduct = R"({
  "product": {
    "s0": [1], "y0": 0, "bond_rate": 0,
    "steps": [{"financial": [{"factor": [2], "prob": "1/2"}, {"factor": ["1/2"], "prob": "1/2"}],
               "insurance": [{"increment": 0, "prob": "1/2"}, {"increment": 1, "prob": "1/2"}]}]
  },
  "g_partition": []
})";

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::OracleFailure;
}

}  // namespace

TEST(Config, NodeTableTree) {
  const ScenarioTree t = build_tree(parse_tree_config(kBinomial));
  EXPECT_EQ(t.num_leaves(), 2);
  EXPECT_EQ(t.leaf_prob()[0], q(1, 2));
  EXPECT_EQ(t.stock(1, 1)[0], q(1, 2));
}

TEST(Config, ProductTree) {
  const ScenarioTree t = build_tree(parse_tree_config(kProduct));
  EXPECT_EQ(t.num_leaves(), 4);
  EXPECT_TRUE(t.is_reveal_time(1));
}

TEST(Config, MalformedTreeIsInvalidConfig) {
  EXPECT_EQ(code_of([] { parse_tree_config("{not json"); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of([] { parse_tree_config(R"({"bond_rate": 0})"); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of([] { parse_tree_config(R"({"nodes": [{"id": "r", "stock": ["x"]}]})"); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of([] { load_tree_config("/nonexistent/tree.json"); }), ErrorCode::InvalidConfig);
}

TEST(Config, PrincipleForms) {
  EXPECT_EQ(parse_principle("mv:alpha=1").str(), PrincipleSpec::mean_variance(q(1)).str());
  EXPECT_EQ(parse_principle(R"({"kind": "avar", "params": {"delta": "1/2", "level": 0.25}})").str(),
            PrincipleSpec::avar(q(1, 2), q(1, 4)).str());
  EXPECT_EQ(code_of([] { parse_principle("bogus"); }), ErrorCode::InvalidSpec);
}

TEST(Config, PayoffFormats) {
  const ScenarioTree t = build_tree(parse_tree_config(kBinomial));
  const Payoff expected({q(3), q(-1, 4)});
  EXPECT_EQ(parse_payoff("leaf,value\nd,-1/4\nu,3\n", t), expected);
  EXPECT_EQ(parse_payoff("leaf,value\n0,3\n1,-0.25\n", t), expected);
  EXPECT_EQ(parse_payoff(R"({"values": [3, "-1/4"]})", t), expected);
  EXPECT_EQ(parse_payoff(R"({"by_leaf": {"u": 3, "d": -0.25}})", t), expected);
  EXPECT_EQ(parse_payoff(R"({"formula": {"kind": "call", "strike": 1}})", t), Payoff({q(1), q(0)}));
  EXPECT_EQ(parse_payoff(R"({"formula": {"kind": "linear", "stock": [2], "constant": -1}})", t), Payoff({q(3), q(0)}));
  EXPECT_EQ(code_of([&] { parse_payoff("leaf,value\nu,3\n", t); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of([&] { parse_payoff("leaf,value\nu,3\nu,2\n", t); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of([&] { parse_payoff("a,b\n", t); }), ErrorCode::InvalidConfig);
}

TEST(Config, EquityLinkedFormula) {
  const ScenarioTree t = build_tree(parse_tree_config(kProduct));
  const Payoff h = parse_payoff(R"({"formula": {"kind": "equity-linked", "strike": 1}})", t);
  for (int leaf = 0; leaf < 4; ++leaf) EXPECT_EQ(h[leaf], max(t.stock(leaf, 1)[0], q(1)) * t.insurance(leaf, 1));
}

TEST(Config, GridModelAndDriverTable) {
  const GridModel m = parse_grid_model(R"({"steps": 3, "h": "1/4", "mu": "1/10", "sigma": "1/2", "r": 0, "marks": [{"x": 1, "nu": "1/2"}]})");
  EXPECT_EQ(m.steps, 3);
  EXPECT_EQ(m.marks.size(), 1U);
  EXPECT_EQ(code_of([] { parse_grid_model(R"({"sigma": 0})"); }), ErrorCode::InvalidConfig);
  const auto rows = parse_driver_table("t,zf,z1,zt1,g\n0,1,0,0,1/5\n0,2,0,0,2/5\n", m);
  ASSERT_EQ(rows.size(), 2U);
  EXPECT_EQ(rows[1].zf, q(2));
  EXPECT_EQ(code_of([&] { parse_driver_table("t,zf,g\n", m); }), ErrorCode::InvalidConfig);
}

TEST(Config, CheckConfigOverrides) {
  CheckConfig base;
  base.search.seed = 3;
  const CheckConfig c = parse_check_config(R"({"trials": 50, "market": false, "pnorm": {"p": 2, "lambda": 4}})", base);
  EXPECT_EQ(c.search.seed, 3U);
  EXPECT_EQ(c.search.trials, 50);
  EXPECT_FALSE(c.market);
  ASSERT_TRUE(c.pnorm);
  EXPECT_EQ(c.pnorm->lambda, std::vector<Real>{q(4)});
  EXPECT_EQ(code_of([&] { parse_check_config(R"({"trials": 0})", base); }), ErrorCode::InvalidConfig);
}

TEST(Config, ConditionalValueCsv) {
  const ScenarioTree t = build_tree(parse_tree_config(kBinomial));
  const ConditionalValue v{Partition::discrete(2), {q(1), q(1, 3)}};
  EXPECT_EQ(conditional_value_csv(v, t), "block_id,member_leaves,value\n0,u,1\n1,d,1/3\n");
}
