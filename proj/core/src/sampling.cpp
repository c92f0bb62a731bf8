#include "mcv/sampling.hpp"

#include <cstdlib>
#include <limits>
#include <map>

#include "mcv/error.hpp"

namespace mcv {

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  engine_.seed(seq);
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::below: empty range");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = next();
  while (x >= limit) x = next();
  return x % n;
}

long Rng::range(long lo, long hi) {
  return lo + static_cast<long>(below(static_cast<std::uint64_t>(hi - lo) + 1));
}

Real Rng::rational(const Real& lo, const Real& hi, long den) {
  Real a = lo * Real(den);
  Real b = hi * Real(den);
  long k_lo = static_cast<long>(std::ceil(a.to_double() - 1e-9));
  long k_hi = static_cast<long>(std::floor(b.to_double() + 1e-9));
  if (k_lo > k_hi) throw std::invalid_argument("Rng::rational: empty range");
  return Real::fraction(range(k_lo, k_hi), den);
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("MCV_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidConfig, std::string("MCV_SEED is not an unsigned integer: ") + env);
    }
  }
  return 20240611;
}

std::uint64_t lattice_size(int n, int lo, int hi, std::uint64_t cap) {
  const std::uint64_t radix = static_cast<std::uint64_t>(hi - lo + 1);
  std::uint64_t size = 1;
  for (int i = 0; i < n; ++i) {
    if (size > cap / radix) return cap + 1;
    size *= radix;
  }
  return size;
}

Payoff lattice_payoff(std::uint64_t index, int n, int lo, int hi) {
  const std::uint64_t radix = static_cast<std::uint64_t>(hi - lo + 1);
  std::vector<Real> v(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    v[static_cast<size_t>(i)] = Real(lo + static_cast<int>(index % radix));
    index /= radix;
  }
  return Payoff(std::move(v));
}

Payoff random_lattice_payoff(Rng& rng, int n, int lo, int hi) {
  std::vector<Real> v(static_cast<size_t>(n));
  for (auto& x : v) x = Real(rng.range(lo, hi));
  return Payoff(std::move(v));
}

Payoff random_rational_payoff(Rng& rng, int n, int max_abs, int max_den) {
  std::vector<Real> v(static_cast<size_t>(n));
  for (auto& x : v) {
    long den = rng.range(1, max_den);
    x = Real::fraction(rng.range(-max_abs * den, max_abs * den), den);
  }
  return Payoff(std::move(v));
}

Payoff spread(const Partition& part, const std::vector<Real>& block_values) {
  std::vector<Real> v(static_cast<size_t>(part.num_leaves()));
  for (int leaf = 0; leaf < part.num_leaves(); ++leaf) {
    v[static_cast<size_t>(leaf)] = block_values.at(static_cast<size_t>(part.block_of(leaf)));
  }
  return Payoff(std::move(v));
}

Payoff random_measurable_payoff(Rng& rng, const Partition& part, bool lattice) {
  Payoff blocks = lattice ? random_lattice_payoff(rng, part.num_blocks()) : random_rational_payoff(rng, part.num_blocks());
  return spread(part, blocks.values());
}

namespace {

Real random_prob_weight(Rng& rng) { return Real::fraction(rng.range(1, 9), 10); }

std::vector<Real> normalised(std::vector<Real> w) {
  Real total;
  for (const auto& x : w) total += x;
  for (auto& x : w) x /= total;
  return w;
}

std::vector<FinancialMove> financial_moves(Rng& rng, int num_stocks, const Real& growth) {
  const int branches = num_stocks + 1;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<Real> q(static_cast<size_t>(branches));
    for (auto& x : q) x = random_prob_weight(rng);
    q = normalised(q);
    std::vector<std::vector<Real>> factor(static_cast<size_t>(branches), std::vector<Real>(static_cast<size_t>(num_stocks)));
    bool ok = true;
    for (int j = 0; j < num_stocks && ok; ++j) {
      Real partial;
      for (int b = 0; b + 1 < branches; ++b) {
        Real f = rng.rational(Real::fraction(1, 2), Real(2), 8);
        factor[static_cast<size_t>(b)][static_cast<size_t>(j)] = f;
        partial += q[static_cast<size_t>(b)] * f;
      }
      Real last = (growth - partial) / q.back();
      if (last.sign() <= 0) ok = false;
      factor.back()[static_cast<size_t>(j)] = last;
    }
    if (!ok) continue;
    bool distinct = true;
    for (int a = 0; a < branches; ++a) {
      for (int b = a + 1; b < branches; ++b) distinct = distinct && factor[static_cast<size_t>(a)] != factor[static_cast<size_t>(b)];
    }
    if (!distinct) continue;
    std::vector<Real> p(static_cast<size_t>(branches));
    for (auto& x : p) x = random_prob_weight(rng);
    p = normalised(p);
    std::vector<FinancialMove> moves;
    for (int b = 0; b < branches; ++b) moves.push_back({factor[static_cast<size_t>(b)], p[static_cast<size_t>(b)]});
    return moves;
  }
  throw Error(ErrorCode::InvalidConfig, "could not generate an arbitrage-free financial step");
}

}  // namespace

ScenarioTree random_tree(Rng& rng, const RandomTreeOptions& opts) {
  if (opts.num_stocks < 1 || opts.num_stocks > 3) throw Error(ErrorCode::InvalidConfig, "random_tree supports 1..3 stocks");
  const int steps = std::max(opts.financial_steps, opts.reveal_step);
  for (int attempt = 0; attempt < 100; ++attempt) {
    ProductTreeSpec spec;
    spec.s0.assign(static_cast<size_t>(opts.num_stocks), Real(1));
    spec.bond_rate = opts.random_rate ? Real::fraction(rng.range(0, 2), 20) : Real(0);
    for (int t = 1; t <= steps; ++t) {
      ProductStep step;
      if (t <= opts.financial_steps) step.financial = financial_moves(rng, opts.num_stocks, Real(1) + spec.bond_rate);
      else step.financial.push_back({std::vector<Real>(static_cast<size_t>(opts.num_stocks), Real(1) + spec.bond_rate), Real(1)});
      if (t == opts.reveal_step) {
        std::vector<Real> p(static_cast<size_t>(opts.insurance_branches));
        for (auto& x : p) x = random_prob_weight(rng);
        p = normalised(p);
        for (int k = 0; k < opts.insurance_branches; ++k) step.insurance.push_back({Real(k), p[static_cast<size_t>(k)]});
      }
      spec.steps.push_back(std::move(step));
    }
    TreeConfig cfg = product_tree_config(spec);
    if (opts.correlated) {
      std::map<std::string, std::vector<size_t>> siblings;
      for (size_t i = 0; i < cfg.nodes.size(); ++i) {
        if (cfg.nodes[i].parent) siblings[*cfg.nodes[i].parent].push_back(i);
      }
      for (auto& [parent, kids] : siblings) {
        std::vector<Real> w(kids.size());
        for (auto& x : w) x = random_prob_weight(rng);
        w = normalised(w);
        for (size_t k = 0; k < kids.size(); ++k) cfg.nodes[kids[k]].prob = w[k];
      }
    }
    try {
      ScenarioTree tree = build_tree(cfg);
      risk_neutral_measure(tree);
      return tree;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::IncompleteMarket && e.code() != ErrorCode::Arbitrage) throw;
    }
  }
  throw Error(ErrorCode::InvalidConfig, "could not generate a complete arbitrage-free tree");
}

}  // namespace mcv
