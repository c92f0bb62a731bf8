#include "mcv/duality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "mcv/error.hpp"

namespace mcv {

namespace {

Real block_mass(const Partition& part, int b, const std::vector<Real>& prob) {
  Real m;
  for (int leaf : part.block(b)) m += prob[static_cast<size_t>(leaf)];
  return m;
}

// E[xi H | block] with xi normalised against the physical block mass.
Real weighted_mean(const Partition& part, int b, const std::vector<Real>& prob, const std::vector<Real>& xi,
                   const Payoff& h) {
  Real acc;
  for (int leaf : part.block(b)) acc += prob[static_cast<size_t>(leaf)] * xi[static_cast<size_t>(leaf)] * h[leaf];
  return acc / block_mass(part, b, prob);
}

std::string values_str(const ConditionalValue& v) {
  std::string s;
  for (size_t i = 0; i < v.values.size(); ++i) s += (i ? " " : "") + v.values[i].str();
  return s;
}

}  // namespace

DensitySet DensitySet::finite(std::vector<Density> members) {
  DensitySet s;
  s.members_ = std::move(members);
  return s;
}

DensitySet DensitySet::band(Real lo, Real hi) {
  if (lo.sign() < 0 || lo > Real(1) || hi < Real(1)) {
    throw Error(ErrorCode::InfeasibleBand, "band [" + lo.str() + ", " + hi.str() + "] admits no density");
  }
  DensitySet s;
  s.band_ = std::make_pair(std::move(lo), std::move(hi));
  return s;
}

PenaltyFn PenaltyFn::zero() {
  return {[](const Density&) { return Real(0); }, Tag::Indicator};
}

PenaltyFn PenaltyFn::gini(Real alpha, std::vector<Real> prob) {
  if (alpha.sign() <= 0) throw Error(ErrorCode::InvalidParam, "gini penalty needs alpha > 0");
  return {[alpha, prob = std::move(prob)](const Density& xi) {
            Real second;
            for (size_t i = 0; i < prob.size(); ++i) second += prob[i] * xi.weight[i] * xi.weight[i];
            return (second - Real(1)) / (Real(2) * alpha);
          },
          Tag::Gini};
}

Density band_argmax(const Payoff& h, const Real& lo, const Real& hi, const Partition& part, const std::vector<Real>& prob) {
  DensitySet::band(lo, hi);  // validates
  Density z{std::vector<Real>(static_cast<size_t>(part.num_leaves()), lo), part};
  for (int b = 0; b < part.num_blocks(); ++b) {
    const Real mass = block_mass(part, b, prob);
    std::vector<int> leaves = part.block(b);
    std::stable_sort(leaves.begin(), leaves.end(), [&](int x, int y) { return h[x] > h[y]; });
    Real remaining = Real(1) - lo;
    for (int leaf : leaves) {
      if (remaining.sign() <= 0) break;
      const Real w = prob[static_cast<size_t>(leaf)] / mass;
      const Real add = min((hi - lo) * w, remaining);
      z.weight[static_cast<size_t>(leaf)] += add / w;
      remaining -= add;
    }
  }
  return z;
}

ConditionalValue band_sup(const Payoff& h, const Real& lo, const Real& hi, const Partition& part,
                          const std::vector<Real>& prob) {
  Density z = band_argmax(h, lo, hi, part, prob);
  ConditionalValue out{part, std::vector<Real>(static_cast<size_t>(part.num_blocks()))};
  for (int b = 0; b < part.num_blocks(); ++b) out.values[static_cast<size_t>(b)] = weighted_mean(part, b, prob, z.weight, h);
  return out;
}

ConditionalValue dual_eval(const DensitySet& set, const PenaltyFn& penalty, const Payoff& h, const Partition& part,
                           const std::vector<Real>& prob) {
  if (set.is_band()) {
    ConditionalValue out = band_sup(h, set.lo(), set.hi(), part, prob);
    Real pen = penalty.evaluator(band_argmax(h, set.lo(), set.hi(), part, prob));
    for (auto& v : out.values) v -= pen;
    return out;
  }
  if (set.members().empty()) throw Error(ErrorCode::EmptySet, "density set is empty");
  ConditionalValue out{part, {}};
  for (const auto& xi : set.members()) {
    const Real pen = penalty.evaluator(xi);
    for (int b = 0; b < part.num_blocks(); ++b) {
      Real v = weighted_mean(part, b, prob, xi.weight, h) - pen;
      if (out.values.size() <= static_cast<size_t>(b)) {
        out.values.push_back(v);
      } else {
        out.values[static_cast<size_t>(b)] = max(out.values[static_cast<size_t>(b)], v);
      }
    }
  }
  return out;
}

PenaltyEstimate penalty_of(const EvaluationOracle& op, const Density& xi, const std::vector<Real>& prob,
                           const PenaltyGrid& grid) {
  if (grid.step.sign() <= 0 || grid.radius.sign() <= 0) throw Error(ErrorCode::InvalidParam, "grid needs positive radius and step");
  const int n = static_cast<int>(prob.size());
  const Partition part = op(Payoff::constant(n, Real(0))).partition;
  auto objective = [&](const Payoff& h) {
    ConditionalValue v = op(h);
    for (int b = 0; b < part.num_blocks(); ++b) {
      v.values[static_cast<size_t>(b)] = weighted_mean(part, b, prob, xi.weight, h) - v.values[static_cast<size_t>(b)];
    }
    return v;
  };

  PenaltyEstimate est{objective(Payoff::constant(n, Real(0))), std::vector<bool>(static_cast<size_t>(part.num_blocks()), false)};
  const long k_max = static_cast<long>(std::floor((grid.radius / grid.step).to_double() + 1e-9));
  auto take = [&](const Payoff& h) {
    ConditionalValue v = objective(h);
    for (size_t b = 0; b < v.values.size(); ++b) est.value.values[b] = max(est.value.values[b], v.values[b]);
  };
  const int radix = static_cast<int>(2 * k_max + 1);
  const std::uint64_t space = lattice_size(n, 0, radix - 1, grid.budget);
  auto scale = [&](Payoff digits) {
    for (int i = 0; i < n; ++i) digits[i] = (digits[i] - Real(k_max)) * grid.step;
    return digits;
  };
  if (space <= grid.budget) {
    est.exhaustive = true;
    for (std::uint64_t idx = 0; idx < space; ++idx) take(scale(lattice_payoff(idx, n, 0, radix - 1)));
  } else {
    for (std::uint64_t i = 0; i < grid.budget; ++i) {
      Rng rng(grid.seed, i);
      take(scale(random_lattice_payoff(rng, n, 0, radix - 1)));
    }
  }

  // Rays: linear growth along a direction means the conjugate is unbounded.
  const std::uint64_t rays = lattice_size(n, -1, 1, grid.budget);
  const std::uint64_t ray_count = std::min<std::uint64_t>(rays, 20000);
  for (std::uint64_t idx = 0; idx < ray_count; ++idx) {
    Payoff d = rays <= 20000 ? lattice_payoff(idx, n, -1, 1) : [&] {
      Rng rng(grid.seed ^ 0x9e3779b97f4a7c15ULL, idx);
      return random_lattice_payoff(rng, n, -1, 1);
    }();
    ConditionalValue f1 = objective(grid.radius * d);
    ConditionalValue f2 = objective(Real(2) * grid.radius * d);
    ConditionalValue f4 = objective(Real(4) * grid.radius * d);
    for (size_t b = 0; b < f1.values.size(); ++b) {
      const Real inc1 = f2.values[b] - f1.values[b];
      const Real inc2 = f4.values[b] - f2.values[b];
      if (inc1.sign() > 0 && !approx_equal(inc1, Real(0)) && approx_less_equal(inc1, inc2)) est.infinite[b] = true;
    }
  }
  return est;
}

ConditionalValue gini_penalty(const Real& alpha, const Density& xi, const Partition& part, const std::vector<Real>& prob) {
  if (alpha.sign() <= 0) throw Error(ErrorCode::InvalidParam, "gini penalty needs alpha > 0");
  ConditionalValue out{part, std::vector<Real>(static_cast<size_t>(part.num_blocks()))};
  for (int b = 0; b < part.num_blocks(); ++b) {
    Real second;
    for (int leaf : part.block(b)) {
      second += prob[static_cast<size_t>(leaf)] * xi.weight[static_cast<size_t>(leaf)] * xi.weight[static_cast<size_t>(leaf)];
    }
    out.values[static_cast<size_t>(b)] = (second / block_mass(part, b, prob) - Real(1)) / (Real(2) * alpha);
  }
  return out;
}

HedgedAvarResult avar_hedged(const Payoff& h, const ScenarioTree& tree, const Real& delta, const Real& level) {
  if (delta.sign() < 0) throw Error(ErrorCode::InvalidParam, "delta must be nonnegative");
  if (level.sign() <= 0 || level > Real(1)) throw Error(ErrorCode::InvalidParam, "level must lie in (0, 1]");
  HedgedAvarResult out;
  const Real raw_lo = Real(1) - delta * (Real(1) + level) / level;
  out.clamped = raw_lo.sign() < 0;
  out.lo = out.clamped ? Real(0) : raw_lo;
  out.hi = Real(1) + delta * (Real(1) - level) / level;
  TwoStepEvaluator eq(tree, PrincipleSpec::expectation());
  ConditionalValue inner = band_sup(h, out.lo, out.hi, eq.inner_partition(), tree.leaf_prob());
  out.value = eq.outer(inner.lift());
  return out;
}

namespace {

ConditionalValue replication_bound(const Payoff& h, const ScenarioTree& tree, bool upper) {
  TwoStepEvaluator eq(tree, PrincipleSpec::expectation());
  const Partition& fs = eq.inner_partition();
  ConditionalValue extreme{fs, std::vector<Real>(static_cast<size_t>(fs.num_blocks()))};
  for (int b = 0; b < fs.num_blocks(); ++b) {
    Real v = h[fs.block(b).front()];
    for (int leaf : fs.block(b)) v = upper ? max(v, h[leaf]) : min(v, h[leaf]);
    extreme.values[static_cast<size_t>(b)] = v;
  }
  return eq.outer(extreme.lift());
}

}  // namespace

ConditionalValue super_replication(const Payoff& h, const ScenarioTree& tree) { return replication_bound(h, tree, true); }

ConditionalValue sub_replication(const Payoff& h, const ScenarioTree& tree) { return replication_bound(h, tree, false); }

EvaluationOracle max_density_oracle(const ScenarioTree& tree, const std::vector<Payoff>& z) {
  if (z.empty()) throw Error(ErrorCode::EmptySet, "no densities given");
  return [prob = tree.leaf_prob(), xi = risk_neutral_measure(tree), g = tree.g_partition(), z](const Payoff& h) {
    ConditionalValue best = cond_expectation(prob, product(z.front(), h), g, xi);
    for (size_t i = 1; i < z.size(); ++i) {
      ConditionalValue v = cond_expectation(prob, product(z[i], h), g, xi);
      for (size_t b = 0; b < best.values.size(); ++b) best.values[b] = max(best.values[b], v.values[b]);
    }
    return best;
  };
}

CounterexampleTemplate canonical_counterexample_template() {
  TreeConfig cfg;
  cfg.horizon = 1;
  cfg.reveal_times = {1};
  cfg.nodes.push_back({"root", std::nullopt, {Real(1)}, Real(0), std::nullopt});
  const std::vector<std::pair<std::string, Real>> moves{{"up", Real(2)}, {"down", Real::fraction(1, 2)}};
  for (const auto& [name, s] : moves) {
    for (int y = 0; y < 2; ++y) {
      for (int d = 0; d < 2; ++d) {
        cfg.nodes.push_back({name + "_y" + std::to_string(y) + "_z" + std::to_string(d), std::string("root"), {s}, Real(y),
                             Real::fraction(1, 8)});
      }
    }
  }
  ScenarioTree tree = build_tree(cfg);
  std::vector<Real> z1(static_cast<size_t>(tree.num_leaves()));
  std::vector<Real> z2(z1.size());
  for (int leaf = 0; leaf < tree.num_leaves(); ++leaf) {
    const bool state = tree.node(tree.leaf_node(leaf)).label.back() == '1';
    z1[static_cast<size_t>(leaf)] = state ? Real::fraction(3, 2) : Real::fraction(1, 2);
    z2[static_cast<size_t>(leaf)] = state ? Real::fraction(1, 2) : Real::fraction(3, 2);
  }
  return {std::move(tree), Payoff(std::move(z1)), Payoff(std::move(z2))};
}

CounterexampleReport counterexample(const CounterexampleTemplate& tmpl, const SearchConfig& cfg) {
  const ScenarioTree& tree = tmpl.tree;
  const int n = tree.num_leaves();
  if (tmpl.z1.size() != n || tmpl.z2.size() != n) throw Error(ErrorCode::ConstructionFailed, "densities do not match the tree");
  if (tree.g_partition().num_blocks() != 1) throw Error(ErrorCode::ConstructionFailed, "template needs trivial initial information");
  const auto& prob = tree.leaf_prob();
  const Partition fs = partition_for(tree, ObservableSpec::financial(tree.horizon()));
  const Density xi = risk_neutral_measure(tree);

  // Each Z_i must be a nonnegative density given F^S, and the law of (Z1, Z2)
  // must not depend on the financial block.
  std::map<std::pair<std::string, std::string>, Real> reference;
  for (int b = 0; b < fs.num_blocks(); ++b) {
    const Real mass = block_mass(fs, b, prob);
    Real m1;
    Real m2;
    std::map<std::pair<std::string, std::string>, Real> law;
    for (int leaf : fs.block(b)) {
      if (tmpl.z1[leaf].sign() < 0 || tmpl.z2[leaf].sign() < 0) throw Error(ErrorCode::ConstructionFailed, "densities must be nonnegative");
      const Real w = prob[static_cast<size_t>(leaf)] / mass;
      m1 += w * tmpl.z1[leaf];
      m2 += w * tmpl.z2[leaf];
      law[{tmpl.z1[leaf].str(), tmpl.z2[leaf].str()}] += w;
    }
    if (!approx_equal(m1, Real(1)) || !approx_equal(m2, Real(1))) {
      throw Error(ErrorCode::ConstructionFailed, "densities do not average to one on financial block " + std::to_string(b));
    }
    if (b == 0) {
      reference = law;
    } else if (law != reference) {
      throw Error(ErrorCode::ConstructionFailed, "law of (Z1, Z2) differs between financial blocks 0 and " + std::to_string(b));
    }
  }

  CounterexampleReport rep;
  rep.op = max_density_oracle(tree, {tmpl.z1, tmpl.z2});

  // A: the financial atom of smallest risk-neutral mass.
  int a_block = 0;
  Real a_mass;
  for (int b = 0; b < fs.num_blocks(); ++b) {
    Real q;
    for (int leaf : fs.block(b)) q += prob[static_cast<size_t>(leaf)] * xi.weight[static_cast<size_t>(leaf)];
    if (b == 0 || q < a_mass) {
      a_mass = q;
      a_block = b;
    }
  }
  rep.a = event_of_blocks(fs, {a_block});
  std::vector<Real> hv(static_cast<size_t>(n));
  for (int leaf = 0; leaf < n; ++leaf) {
    const bool in_a = rep.a[static_cast<size_t>(leaf)];
    const bool hit = in_a ? tmpl.z2[leaf] > tmpl.z1[leaf] : tmpl.z1[leaf] > tmpl.z2[leaf];
    hv[static_cast<size_t>(leaf)] = hit ? Real(1) : Real(0);
  }
  rep.h = Payoff(std::move(hv));
  rep.pi_h = rep.op(rep.h);
  rep.pi_h_a = rep.op(rep.h.masked(rep.a));
  rep.pi_h_ac = rep.op(rep.h.masked(complement(rep.a)));
  rep.gap = rep.pi_h_a.values[0] + rep.pi_h_ac.values[0] - rep.pi_h.values[0];
  rep.violation = rep.gap.sign() > 0 && !approx_equal(rep.gap, Real(0));

  // Market consistency on the atom basis: E[xi Z_i I_B] = Q(B) for each atom B.
  rep.consistency_certified = true;
  for (int b = 0; b < fs.num_blocks(); ++b) {
    Real q;
    Real e1;
    Real e2;
    for (int leaf : fs.block(b)) {
      const Real w = prob[static_cast<size_t>(leaf)] * xi.weight[static_cast<size_t>(leaf)];
      q += w;
      e1 += w * tmpl.z1[leaf];
      e2 += w * tmpl.z2[leaf];
    }
    const bool ok = approx_equal(e1, q) && approx_equal(e2, q);
    rep.consistency_certified = rep.consistency_certified && ok;
    rep.certificate += (b ? "; " : "") + std::string("B") + std::to_string(b) + ": Q=" + q.str() + " E[xi Z1 I_B]=" + e1.str() +
                       " E[xi Z2 I_B]=" + e2.str();
  }
  rep.consistency_search = market_consistency_witness(rep.op, tree, cfg);
  return rep;
}

MarketWindow market_window(const ScenarioTree& tree) {
  return market_window(tree, tree.g_partition(), 0, tree.horizon());
}

MarketWindow market_window(const ScenarioTree& tree, const Partition& base, int from, int to) {
  RiskNeutral rn = risk_neutral(tree, base, from, to);
  return {rn.base, rn.financial, rn.density, tree.leaf_prob()};
}

namespace {

// Q(B | base) on the base block containing B.
Real window_mass(const MarketWindow& w, const Event& in_b, int leaf) {
  const int gb = w.base.block_of(leaf);
  Real q;
  Real mass;
  for (int l : w.base.block(gb)) {
    mass += w.prob[static_cast<size_t>(l)];
    if (in_b[static_cast<size_t>(l)]) q += w.prob[static_cast<size_t>(l)] * w.density.weight[static_cast<size_t>(l)];
  }
  return q / mass;
}

}  // namespace

ConditionalValue lift(const EvaluationOracle& op, const ScenarioTree& tree, const std::vector<Partition>& generating,
                      const Payoff& h) {
  if (generating.empty()) throw Error(ErrorCode::PreconditionViolated, "no generating partitions");
  const Partition fs = partition_for(tree, ObservableSpec::financial(tree.horizon()));
  for (size_t k = 0; k < generating.size(); ++k) {
    if (!fs.refines(generating[k])) throw Error(ErrorCode::PreconditionViolated, "generating partition " + std::to_string(k) + " is not financial");
    if (k > 0 && !generating[k].refines(generating[k - 1])) {
      throw Error(ErrorCode::PreconditionViolated, "generating partitions must increase");
    }
  }
  MarketWindow w = market_window(tree);
  w.financial = generating.back().join(w.base);
  return lift(op, w, h);
}

ConditionalValue lift(const EvaluationOracle& op, const MarketWindow& w, const Payoff& h) {
  const Partition& finest = w.financial;
  const ConditionalValue whole = op(h);
  ConditionalValue out{finest, std::vector<Real>(static_cast<size_t>(finest.num_blocks()))};
  std::vector<Real> total(whole.values.size());
  for (int b = 0; b < finest.num_blocks(); ++b) {
    const Event in_b = event_of_blocks(finest, {b});
    const ConditionalValue piece = op(h.masked(in_b));
    for (size_t k = 0; k < total.size(); ++k) total[k] += piece.values[k];
    const int leaf = finest.block(b).front();
    const Real q = window_mass(w, in_b, leaf);
    out.values[static_cast<size_t>(b)] = q.is_zero() ? Real(0) : piece.at_leaf(leaf) / q;
  }
  for (size_t k = 0; k < total.size(); ++k) {
    if (!approx_equal(total[k], whole.values[k])) {
      throw Error(ErrorCode::PreconditionViolated, "pieces sum to " + total[k].str() + " but op(H) = " + whole.values[k].str() +
                                                       " on block " + std::to_string(k));
    }
  }
  return out;
}

CharacteristicReport characteristic_check(const EvaluationOracle& op, const Payoff& h, const ConditionalValue& lifted,
                                          const ScenarioTree& tree, const SearchConfig& cfg) {
  return characteristic_check(op, h, lifted, market_window(tree), cfg);
}

CharacteristicReport characteristic_check(const EvaluationOracle& op, const Payoff& h, const ConditionalValue& lifted,
                                          const MarketWindow& w, const SearchConfig& cfg) {
  const Partition& fs = w.financial;
  const Payoff x = lifted.lift();
  const int k = fs.num_blocks();
  CharacteristicReport rep;

  auto check_set = [&](const std::vector<int>& blocks) {
    const Event a = event_of_blocks(fs, blocks);
    const ConditionalValue lhs = op(h.masked(a));
    const ConditionalValue rhs = cond_expectation(w.prob, x.masked(a), w.base, w.density);
    ++rep.sets_checked;
    if (approx_equal(lhs, rhs)) return true;
    rep.passed = false;
    rep.witness = "A=blocks{";
    for (size_t i = 0; i < blocks.size(); ++i) rep.witness += (i ? "," : "") + std::to_string(blocks[i]);
    rep.witness += "} lhs=" + values_str(lhs) + " rhs=" + values_str(rhs);
    return false;
  };

  if (k <= 12) {
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
      std::vector<int> blocks;
      for (int b = 0; b < k; ++b) {
        if (mask >> b & 1U) blocks.push_back(b);
      }
      if (!check_set(blocks)) return rep;
    }
  } else {
    rep.exhaustive = false;
    for (long t = 0; t < cfg.trials; ++t) {
      Rng rng(cfg.seed, static_cast<std::uint64_t>(t));
      std::vector<int> blocks;
      for (int b = 0; b < k; ++b) {
        if (rng.coin()) blocks.push_back(b);
      }
      if (!check_set(blocks)) return rep;
    }
  }

  // Uniqueness: the single-block equations pin X down on every block.
  for (int b = 0; b < k; ++b) {
    const Event a = event_of_blocks(fs, {b});
    const int leaf = fs.block(b).front();
    const Real solved = op(h.masked(a)).at_leaf(leaf) / window_mass(w, a, leaf);
    for (int l : fs.block(b)) {
      if (!approx_equal(solved, x[l])) {
        rep.passed = false;
        rep.witness = "block " + std::to_string(b) + " value " + x[l].str() + " differs from the forced value " + solved.str();
        return rep;
      }
    }
  }
  return rep;
}

EssentialSupremum essential_supremum(const std::vector<ConditionalValue>& family) {
  if (family.empty()) throw Error(ErrorCode::EmptyFamily, "essential supremum of an empty family");
  EssentialSupremum out{family.front(), std::vector<int>(family.front().values.size(), 0)};
  for (size_t i = 1; i < family.size(); ++i) {
    if (!(family[i].partition == out.value.partition)) throw Error(ErrorCode::NotMeasurable, "family members live on different partitions");
    for (size_t b = 0; b < out.value.values.size(); ++b) {
      if (family[i].values[b] > out.value.values[b]) {
        out.value.values[b] = family[i].values[b];
        out.argmax[b] = static_cast<int>(i);
      }
    }
  }
  return out;
}

ConditionalValue concatenate(const ConditionalValue& a, const ConditionalValue& b, const Event& event) {
  return local_glue({{event, a}, {complement(event), b}});
}

}  // namespace mcv
