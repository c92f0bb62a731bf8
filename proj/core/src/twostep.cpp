#include "mcv/twostep.hpp"

#include "mcv/error.hpp"

namespace mcv {

TwoStepEvaluator::TwoStepEvaluator(const ScenarioTree& tree, PrincipleSpec spec)
    : TwoStepEvaluator(tree, std::move(spec), tree.g_partition(), 0, tree.horizon()) {}

TwoStepEvaluator::TwoStepEvaluator(const ScenarioTree& tree, PrincipleSpec spec, const Partition& base, int from, int to)
    : spec_(std::move(spec)), prob_(tree.leaf_prob()), measure_(risk_neutral(tree, base, from, to)) {
  spec_.validate();
}

ConditionalValue TwoStepEvaluator::inner(const Payoff& h) const {
  return evaluate(spec_, h, measure_.financial, prob_);
}

ConditionalValue TwoStepEvaluator::outer(const Payoff& x) const {
  return cond_expectation(prob_, x, measure_.base, measure_.density);
}

ConditionalValue TwoStepEvaluator::operator()(const Payoff& h) const { return outer(inner(h).lift()); }

EvaluationOracle TwoStepEvaluator::oracle() const {
  return [self = *this](const Payoff& h) { return self(h); };
}

ConditionalValue two_step(const PrincipleSpec& spec, const Payoff& h, const ScenarioTree& tree) {
  return TwoStepEvaluator(tree, spec)(h);
}

ConditionalValue two_step(const PrincipleSpec& spec, const Payoff& h, const ScenarioTree& tree, const Partition& g_part) {
  return TwoStepEvaluator(tree.with_g_partition(g_part), spec)(h);
}

EvaluationOracle risk_neutral_oracle(const ScenarioTree& tree) {
  return TwoStepEvaluator(tree, PrincipleSpec::expectation()).oracle();
}

NumeraireResult numeraire_transform(int stock, const Payoff& h, const ScenarioTree& tree, const PrincipleSpec& spec) {
  if (stock < 0 || stock >= tree.num_stocks()) {
    throw Error(ErrorCode::NonpositiveNumeraire, "no stock with index " + std::to_string(stock));
  }
  const int n = tree.num_leaves();
  const int T = tree.horizon();
  std::vector<Real> disc(static_cast<size_t>(n));
  for (int leaf = 0; leaf < n; ++leaf) {
    disc[static_cast<size_t>(leaf)] = tree.stock(leaf, T)[static_cast<size_t>(stock)] / tree.bond(T);
    if (disc[static_cast<size_t>(leaf)].sign() <= 0) throw Error(ErrorCode::NonpositiveNumeraire, "numeraire vanishes");
  }
  const Real s0 = tree.root().stock[static_cast<size_t>(stock)];

  RiskNeutral tilde = risk_neutral(tree, tree.g_partition(), 0, T, Numeraire::stock_index(stock));
  std::vector<Real> scaled(static_cast<size_t>(n));
  for (int leaf = 0; leaf < n; ++leaf) scaled[static_cast<size_t>(leaf)] = h[leaf] / disc[static_cast<size_t>(leaf)];
  const Payoff h_tilde(std::move(scaled));

  // Inner principle in numeraire units: X -> Pi(S_T X) / S_T, blockwise on F^S.
  std::vector<Real> back(static_cast<size_t>(n));
  for (int leaf = 0; leaf < n; ++leaf) back[static_cast<size_t>(leaf)] = disc[static_cast<size_t>(leaf)] * h_tilde[leaf];
  ConditionalValue inner = evaluate(spec, Payoff(std::move(back)), tilde.financial, tree.leaf_prob());
  for (int b = 0; b < inner.partition.num_blocks(); ++b) {
    inner.values[static_cast<size_t>(b)] /= disc[static_cast<size_t>(inner.partition.block(b).front())];
  }

  NumeraireResult out{cond_expectation(tree, inner.lift(), tilde.base, tilde.density), {}};
  out.rescaled = out.transformed;
  for (auto& v : out.rescaled.values) v *= s0;
  return out;
}

namespace {

std::string pair_witness(const Payoff& hs, const Payoff& h, const ConditionalValue& lhs, const ConditionalValue& rhs) {
  std::string w = "HS=" + hs.str() + ";H=" + h.str() + ";lhs=";
  for (size_t i = 0; i < lhs.values.size(); ++i) w += (i ? " " : "") + lhs.values[i].str();
  w += ";rhs=";
  for (size_t i = 0; i < rhs.values.size(); ++i) w += (i ? " " : "") + rhs.values[i].str();
  return w;
}

// Runs `check` over exhaustive or sampled (H^S, H) pairs; H is omitted when leaf_digits == 0.
template <typename Check>
WitnessReport search_pairs(const ScenarioTree& tree, const SearchConfig& cfg, bool with_h, Check check) {
  const Partition fs = partition_for(tree, ObservableSpec::financial(tree.horizon()));
  const int k = fs.num_blocks();
  const int n = with_h ? tree.num_leaves() : 0;
  WitnessReport report;
  report.seed = cfg.seed;
  const std::uint64_t space = lattice_size(k + n, -2, 2, cfg.budget);
  if (space <= cfg.budget) {
    report.exhaustive = true;
    for (std::uint64_t idx = 0; idx < space; ++idx) {
      Payoff digits = lattice_payoff(idx, k + n);
      std::vector<Real> block_vals(digits.values().begin(), digits.values().begin() + k);
      Payoff hs = spread(fs, block_vals);
      Payoff h(std::vector<Real>(digits.values().begin() + k, digits.values().end()));
      if (!with_h) h = Payoff::constant(tree.num_leaves(), Real(0));
      ++report.trials;
      if (auto w = check(hs, h)) {
        report.passed = false;
        report.witness = *w;
        return report;
      }
    }
    return report;
  }
  const long lattice_trials = cfg.trials - cfg.trials / 4;
  for (long i = 0; i < cfg.trials; ++i) {
    Rng rng(cfg.seed, static_cast<std::uint64_t>(i));
    const bool lattice = i < lattice_trials;
    Payoff hs = random_measurable_payoff(rng, fs, lattice);
    Payoff h = !with_h ? Payoff::constant(tree.num_leaves(), Real(0))
               : lattice ? random_lattice_payoff(rng, tree.num_leaves())
                         : random_rational_payoff(rng, tree.num_leaves());
    ++report.trials;
    if (auto w = check(hs, h)) {
      report.passed = false;
      report.witness = *w;
      return report;
    }
  }
  return report;
}

}  // namespace

WitnessReport market_consistency_witness(const EvaluationOracle& op, const ScenarioTree& tree, const SearchConfig& cfg) {
  const EvaluationOracle eq = risk_neutral_oracle(tree);
  return search_pairs(tree, cfg, true, [&](const Payoff& hs, const Payoff& h) -> std::optional<std::string> {
    ConditionalValue lhs = op(hs + h);
    ConditionalValue rhs = eq(hs) + op(h);
    if (approx_equal(lhs, rhs)) return std::nullopt;
    return pair_witness(hs, h, lhs, rhs);
  });
}

WitnessReport financial_agreement_witness(const EvaluationOracle& op, const ScenarioTree& tree, const SearchConfig& cfg) {
  const EvaluationOracle eq = risk_neutral_oracle(tree);
  return search_pairs(tree, cfg, false, [&](const Payoff& hs, const Payoff& h) -> std::optional<std::string> {
    ConditionalValue lhs = op(hs);
    ConditionalValue rhs = eq(hs);
    if (approx_equal(lhs, rhs)) return std::nullopt;
    return pair_witness(hs, h, lhs, rhs);
  });
}

}  // namespace mcv
