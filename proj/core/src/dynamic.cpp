#include "mcv/dynamic.hpp"

#include "mcv/error.hpp"

namespace mcv {

namespace {

ConditionalValue as_terminal(const Partition& terminal, const Payoff& h) {
  ConditionalValue out{terminal, std::vector<Real>(static_cast<size_t>(terminal.num_blocks()))};
  for (int b = 0; b < terminal.num_blocks(); ++b) {
    const auto& blk = terminal.block(b);
    for (int leaf : blk) {
      if (h[leaf] != h[blk.front()]) throw Error(ErrorCode::NotMeasurable, "payoff is not measurable at the horizon");
    }
    out.values[static_cast<size_t>(b)] = h[blk.front()];
  }
  return out;
}

std::string cv_str(const ConditionalValue& v) {
  std::string s;
  for (size_t i = 0; i < v.values.size(); ++i) s += (i ? " " : "") + v.values[i].str();
  return s;
}

}  // namespace

BackwardEvaluator::BackwardEvaluator(const ScenarioTree& tree, PrincipleSpec spec)
    : terminal_(partition_for(tree, ObservableSpec::full(tree.horizon()))) {
  for (int t = 0; t < tree.horizon(); ++t) {
    stages_.emplace_back(tree, spec, partition_for(tree, ObservableSpec::full(t)), t, t + 1);
  }
}

ConditionalValue BackwardEvaluator::step(int t, const Payoff& next) const { return stage(t)(next); }

std::vector<ConditionalValue> BackwardEvaluator::run(const Payoff& h) const {
  std::vector<ConditionalValue> out(stages_.size() + 1);
  out.back() = as_terminal(terminal_, h);
  for (int t = horizon() - 1; t >= 0; --t) out[static_cast<size_t>(t)] = step(t, out[static_cast<size_t>(t) + 1].lift());
  return out;
}

ConditionalValue BackwardEvaluator::at(int t, const Payoff& h) const {
  if (t < 0 || t > horizon()) throw Error(ErrorCode::UnknownTime, "time " + std::to_string(t));
  ConditionalValue x = as_terminal(terminal_, h);
  for (int s = horizon() - 1; s >= t; --s) x = step(s, x.lift());
  return x;
}

FamilyOracle BackwardEvaluator::family() const {
  return [self = *this](int t, const Payoff& h) { return self.at(t, h); };
}

std::vector<ConditionalValue> backward_evaluate(const PrincipleSpec& spec, const Payoff& h, const ScenarioTree& tree) {
  return BackwardEvaluator(tree, spec).run(h);
}

FamilyOracle backward_family(const PrincipleSpec& spec, const ScenarioTree& tree) {
  return BackwardEvaluator(tree, spec).family();
}

FamilyOracle static_family(const PrincipleSpec& spec, const ScenarioTree& tree) {
  std::vector<TwoStepEvaluator> stages;
  for (int t = 0; t < tree.horizon(); ++t) {
    stages.emplace_back(tree, spec, partition_for(tree, ObservableSpec::full(t)), t, tree.horizon());
  }
  Partition terminal = partition_for(tree, ObservableSpec::full(tree.horizon()));
  return [stages = std::move(stages), terminal](int t, const Payoff& h) {
    if (t < 0 || t > static_cast<int>(stages.size())) throw Error(ErrorCode::UnknownTime, "time " + std::to_string(t));
    if (t == static_cast<int>(stages.size())) return as_terminal(terminal, h);
    return stages[static_cast<size_t>(t)](h);
  };
}

FamilyOracle risk_neutral_family(const ScenarioTree& tree) {
  return backward_family(PrincipleSpec::expectation(), tree);
}

std::vector<std::pair<int, int>> all_time_pairs(const ScenarioTree& tree) {
  std::vector<std::pair<int, int>> pairs;
  for (int s = 0; s <= tree.horizon(); ++s) {
    for (int t = s + 1; t <= tree.horizon(); ++t) pairs.emplace_back(s, t);
  }
  return pairs;
}

DynamicReport time_consistency_check(const FamilyOracle& family, const ScenarioTree& tree,
                                     const std::vector<std::pair<int, int>>& pairs, const SearchConfig& cfg) {
  DynamicReport rep;
  rep.seed = cfg.seed;
  const long lattice_trials = cfg.trials - cfg.trials / 4;
  for (long i = 0; i < cfg.trials; ++i) {
    Rng rng(cfg.seed, static_cast<std::uint64_t>(i));
    const Payoff h = i < lattice_trials ? random_lattice_payoff(rng, tree.num_leaves())
                                        : random_rational_payoff(rng, tree.num_leaves());
    ++rep.trials;
    for (const auto& [s, t] : pairs) {
      if (s > t) throw Error(ErrorCode::UnknownTime, "pair (" + std::to_string(s) + "," + std::to_string(t) + ") is not ordered");
      const ConditionalValue direct = family(s, h);
      const ConditionalValue nested = family(s, family(t, h).lift());
      if (!approx_equal(direct, nested)) {
        rep.passed = false;
        rep.check = "time-consistency";
        rep.witness = "s=" + std::to_string(s) + ";t=" + std::to_string(t) + ";H=" + h.str() + ";direct=" + cv_str(direct) +
                      ";nested=" + cv_str(nested);
        return rep;
      }
    }
  }
  return rep;
}

DynamicReport reveal_structure_check(const FamilyOracle& family, const ScenarioTree& tree, const SearchConfig& cfg) {
  DynamicReport rep;
  rep.seed = cfg.seed;
  rep.exhaustive = true;
  const int horizon = tree.horizon();
  auto fail = [&](const std::string& check, int s, const std::string& witness) {
    rep.passed = false;
    rep.check = check;
    rep.witness = "s=" + std::to_string(s) + ";" + witness;
    return rep;
  };

  for (int s = 0; s < horizon; ++s) {
    int next = horizon;
    for (int r : tree.reveal_times()) {
      if (r > s) {
        next = r;
        break;
      }
    }
    const bool purely_financial = tree.reveal_times().upper_bound(s) == tree.reveal_times().end();
    const MarketWindow w = market_window(tree, partition_for(tree, ObservableSpec::full(s)), s, next);
    const Partition end = partition_for(tree, ObservableSpec::full(next));
    const int k = w.financial.num_blocks();
    const int m = end.num_blocks();
    const EvaluationOracle op = [&family, s](const Payoff& h) { return family(s, h); };

    // Market local property on nonnegative F_next-measurable payoffs.
    auto local_ok = [&](const Payoff& h, const std::vector<int>& blocks) -> std::optional<std::string> {
      const Event a = event_of_blocks(w.financial, blocks);
      const ConditionalValue whole = op(h);
      const ConditionalValue split = op(h.masked(a)) + op(h.masked(complement(a)));
      if (approx_equal(whole, split)) return std::nullopt;
      std::string set;
      for (size_t i = 0; i < blocks.size(); ++i) set += (i ? "," : "") + std::to_string(blocks[i]);
      return "A=blocks{" + set + "};H=" + h.str() + ";whole=" + cv_str(whole) + ";split=" + cv_str(split);
    };
    std::vector<Payoff> samples;
    const std::uint64_t payoffs = lattice_size(m, 0, 2, cfg.budget);
    const std::uint64_t sets = k < 20 ? (std::uint64_t{1} << k) : cfg.budget + 1;
    if (payoffs <= cfg.budget && payoffs * sets <= cfg.budget) {
      // I_A H is again a lattice payoff, so every oracle value is computed once.
      std::vector<int> fin_of_end(static_cast<size_t>(m));
      for (int j = 0; j < m; ++j) fin_of_end[static_cast<size_t>(j)] = w.financial.block_of(end.block(j).front());
      std::vector<ConditionalValue> cache(payoffs);
      for (std::uint64_t idx = 0; idx < payoffs; ++idx) cache[idx] = op(spread(end, lattice_payoff(idx, m, 0, 2).values()));
      for (std::uint64_t idx = 0; idx < payoffs; ++idx) {
        std::vector<std::uint64_t> digit(static_cast<size_t>(m));
        std::uint64_t rest = idx;
        for (auto& d : digit) {
          d = rest % 3;
          rest /= 3;
        }
        for (std::uint64_t mask = 0; mask < sets; ++mask) {
          std::uint64_t in_a = 0;
          std::uint64_t in_ac = 0;
          std::uint64_t place = 1;
          for (int j = 0; j < m; ++j) {
            const std::uint64_t d = digit[static_cast<size_t>(j)];
            ((mask >> fin_of_end[static_cast<size_t>(j)] & 1U) ? in_a : in_ac) += d * place;
            place *= 3;
          }
          ++rep.trials;
          if (approx_equal(cache[idx], cache[in_a] + cache[in_ac])) continue;
          std::vector<int> blocks;
          for (int b = 0; b < k; ++b) {
            if (mask >> b & 1U) blocks.push_back(b);
          }
          if (auto wit = local_ok(spread(end, lattice_payoff(idx, m, 0, 2).values()), blocks)) return fail("market-local-property", s, *wit);
        }
        if (samples.size() < 8 && idx % 97 == 1) samples.push_back(spread(end, lattice_payoff(idx, m, 0, 2).values()));
      }
    } else {
      rep.exhaustive = false;
      for (long i = 0; i < cfg.trials; ++i) {
        Rng rng(cfg.seed + static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(i));
        const Payoff h = spread(end, random_lattice_payoff(rng, m, 0, 2).values());
        std::vector<int> blocks;
        for (int b = 0; b < k; ++b) {
          if (rng.coin()) blocks.push_back(b);
        }
        ++rep.trials;
        if (auto wit = local_ok(h, blocks)) return fail("market-local-property", s, *wit);
        if (samples.size() < 8) samples.push_back(h);
      }
    }

    for (const Payoff& h : samples) {
      if (purely_financial) {
        const ConditionalValue v = op(h);
        const ConditionalValue eq = cond_expectation(w.prob, h, w.base, w.density);
        if (!approx_equal(v, eq)) return fail("financial-segment", s, "H=" + h.str() + ";value=" + cv_str(v) + ";EQ=" + cv_str(eq));
      }
      ConditionalValue lifted;
      try {
        lifted = lift(op, w, h);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::PreconditionViolated) throw;
        return fail("representation", s, "H=" + h.str() + ";" + e.what());
      }
      const CharacteristicReport cr = characteristic_check(op, h, lifted, w, cfg);
      if (!cr.passed) return fail("representation", s, "H=" + h.str() + ";" + cr.witness);
      rep.exhaustive = rep.exhaustive && cr.exhaustive;
    }
  }
  return rep;
}

}  // namespace mcv
