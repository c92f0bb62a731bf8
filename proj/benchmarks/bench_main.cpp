#include <benchmark/benchmark.h>

#include "mcv/bsde.hpp"
#include "mcv/dynamic.hpp"
#include "mcv/harness.hpp"
#include "mcv/principles.hpp"
#include "mcv/sampling.hpp"
#include "mcv/twostep.hpp"

namespace {

mcv::ScenarioTree bench_tree(int financial_steps) {
  mcv::Rng rng(mcv::default_seed());
  mcv::RandomTreeOptions opts;
  opts.financial_steps = financial_steps;
  opts.reveal_step = financial_steps;
  return mcv::random_tree(rng, opts);
}

const char* const kSpecs[] = {"mv:alpha=1", "avar:delta=1/2,level=1/4", "exp:gamma=1"};

void BM_Evaluate(benchmark::State& state) {
  const auto tree = bench_tree(static_cast<int>(state.range(1)));
  const auto spec = mcv::PrincipleSpec::parse(kSpecs[state.range(0)]);
  mcv::Rng rng(1);
  const auto h = mcv::random_rational_payoff(rng, tree.num_leaves());
  for (auto _ : state) benchmark::DoNotOptimize(mcv::evaluate(spec, h, tree.g_partition(), tree));
  state.SetLabel(spec.str() + ", " + std::to_string(tree.num_leaves()) + " leaves");
}
BENCHMARK(BM_Evaluate)->ArgsProduct({{0, 1, 2}, {2, 3}});

void BM_TwoStep(benchmark::State& state) {
  const auto tree = bench_tree(static_cast<int>(state.range(1)));
  const auto spec = mcv::PrincipleSpec::parse(kSpecs[state.range(0)]);
  mcv::Rng rng(2);
  const auto h = mcv::random_rational_payoff(rng, tree.num_leaves());
  for (auto _ : state) benchmark::DoNotOptimize(mcv::two_step(spec, h, tree));
  state.SetLabel(spec.str() + ", " + std::to_string(tree.num_leaves()) + " leaves");
}
BENCHMARK(BM_TwoStep)->ArgsProduct({{0, 1, 2}, {2, 3}});

void BM_BackwardEvaluate(benchmark::State& state) {
  const auto tree = bench_tree(static_cast<int>(state.range(0)));
  const auto spec = mcv::PrincipleSpec::mean_variance(mcv::Real(1));
  mcv::Rng rng(3);
  const auto h = mcv::random_rational_payoff(rng, tree.num_leaves());
  for (auto _ : state) benchmark::DoNotOptimize(mcv::backward_evaluate(spec, h, tree));
  state.SetLabel(std::to_string(tree.num_leaves()) + " leaves");
}
BENCHMARK(BM_BackwardEvaluate)->Arg(2)->Arg(3)->Arg(4);

void BM_SolveDiscrete(benchmark::State& state) {
  mcv::GridModel model;
  model.steps = static_cast<int>(state.range(0));
  model.mu = mcv::Real::fraction(1, 10);
  model.sigma = mcv::Real::fraction(1, 2);
  model.r = mcv::Real::fraction(1, 50);
  model.marks = {{mcv::Real(1), mcv::Real::fraction(1, 2)}};
  const auto grid = mcv::build_grid_tree(model);
  const auto h = grid.terminal_insurance();
  const auto spec = mcv::PrincipleSpec::mean_variance(mcv::Real(1));
  for (auto _ : state) benchmark::DoNotOptimize(mcv::solve_discrete(spec, h, grid));
  state.SetLabel(std::to_string(grid.tree.num_leaves()) + " leaves");
}
BENCHMARK(BM_SolveDiscrete)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_CheckAxioms(benchmark::State& state) {
  const auto tree = bench_tree(2);
  const auto spec = mcv::PrincipleSpec::mean_variance(mcv::Real(1));
  mcv::CheckConfig cfg;
  cfg.search.seed = mcv::default_seed();
  cfg.search.trials = state.range(0);
  cfg.search.budget = 0;
  const auto op = mcv::principle_oracle(spec, tree, tree.g_partition());
  for (auto _ : state) benchmark::DoNotOptimize(mcv::check_axioms(op, tree, tree.g_partition(), cfg));
  state.SetLabel(std::to_string(state.range(0)) + " samples per axiom");
}
BENCHMARK(BM_CheckAxioms)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
