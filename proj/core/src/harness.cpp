#include "mcv/harness.hpp"

#include <array>
#include <functional>
#include <map>
#include <sstream>
#include <unordered_map>

#include "mcv/error.hpp"
#include "mcv/twostep.hpp"

namespace mcv {

std::string to_string(AxiomStatus s) {
  switch (s) {
    case AxiomStatus::PassExhaustive: return "pass-exhaustive";
    case AxiomStatus::PassSampled: return "pass-sampled";
    case AxiomStatus::Fail: return "fail";
    case AxiomStatus::Structural: return "structural";
  }
  return "unknown";
}

bool AxiomReport::passed() const {
  for (const auto& r : results) {
    if (r.required && r.status == AxiomStatus::Fail) return false;
  }
  return true;
}

const AxiomResult& AxiomReport::at(const std::string& axiom) const {
  for (const auto& r : results) {
    if (r.axiom == axiom) return r;
  }
  throw Error(ErrorCode::InvalidParam, "no result for axiom '" + axiom + "'");
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string AxiomReport::csv() const {
  std::string out = "axiom,status,trials,witness,seed\n";
  for (const auto& r : results) {
    out += r.axiom + "," + to_string(r.status) + "," + std::to_string(r.trials) + "," + csv_field(r.witness) + "," +
           std::to_string(r.seed) + "\n";
  }
  return out;
}

namespace {

[[noreturn]] void bad_witness(const std::string& msg) { throw Error(ErrorCode::InvalidParam, "witness: " + msg); }

using Values = std::vector<Real>;
/// Payoff on the quarter grid: leaf i carries grid[i] / 4.
using Grid = std::vector<int>;

constexpr int kGridLimit = 32;

std::string values_str(const Values& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + v[i].str();
  return s;
}

std::string ids_str(const std::vector<int>& ids) {
  std::string s;
  for (size_t i = 0; i < ids.size(); ++i) s += (i ? " " : "") + std::to_string(ids[i]);
  return s;
}

Payoff payoff_of(const Grid& grid) {
  std::vector<Real> v;
  v.reserve(grid.size());
  for (int k : grid) v.push_back(Real::fraction(k, 4));
  return Payoff(std::move(v));
}

std::optional<Grid> grid_of(const Payoff& h) {
  Grid out(static_cast<size_t>(h.size()));
  for (int i = 0; i < h.size(); ++i) {
    if (!h[i].is_exact()) return std::nullopt;
    const mpq_class scaled = h[i].rational() * 4;
    if (scaled.get_den() != 1 || abs(scaled) > kGridLimit) return std::nullopt;
    out[static_cast<size_t>(i)] = static_cast<int>(scaled.get_num().get_si());
  }
  return out;
}

/// Oracle wrapper: checks the output partition, converts failures, memoises
/// values of quarter-grid payoffs and tracks exactness.
class Memo {
 public:
  Memo(const EvaluationOracle& op, const Partition& g) : op_(op), g_(g) {}

  const Values& at(const Grid& grid) {
    std::string key(grid.size(), '\0');
    for (size_t i = 0; i < grid.size(); ++i) key[i] = static_cast<char>(grid[i]);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    if (cache_.size() < kMaxEntries) return cache_.emplace(std::move(key), call(payoff_of(grid))).first->second;
    // Cache full: recent values stay addressable for the few lookups of one case.
    Values& slot = overflow_[next_++ % overflow_.size()];
    slot = call(payoff_of(grid));
    return slot;
  }

  Values eval(const Payoff& h) {
    if (auto grid = grid_of(h)) return at(*grid);
    return call(h);
  }

  bool exact() const { return exact_; }

 private:
  static constexpr size_t kMaxEntries = 4000000;

  Values call(const Payoff& h) {
    ConditionalValue v;
    try {
      v = op_(h);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::OracleFailure, std::string("operator failed on H=") + h.str() + ": " + e.what());
    }
    if (!(v.partition == g_) || v.values.size() != static_cast<size_t>(g_.num_blocks())) {
      throw Error(ErrorCode::OracleFailure, "operator returned a value that is not measurable for the initial information");
    }
    exact_ = exact_ && v.is_exact();
    return std::move(v.values);
  }

  const EvaluationOracle& op_;
  Partition g_;
  bool exact_ = true;
  std::unordered_map<std::string, Values> cache_;
  std::array<Values, 8> overflow_;
  size_t next_ = 0;
};

bool all_equal(const Values& a, const Values& b) {
  for (size_t i = 0; i < a.size(); ++i) {
    if (!approx_equal(a[i], b[i])) return false;
  }
  return true;
}

bool all_less_equal(const Values& a, const Values& b) {
  for (size_t i = 0; i < a.size(); ++i) {
    if (!approx_less_equal(a[i], b[i])) return false;
  }
  return true;
}

using Digits = std::vector<std::uint64_t>;
using CaseCheck = std::function<std::optional<std::string>(const Digits&)>;

/// Enumerates every digit vector when the space fits the budget, else
/// samples. A check returns nullopt on success, "" to skip a case, and the
/// witness on failure.
AxiomResult search(const std::string& axiom, const std::vector<std::uint64_t>& radix, const SearchConfig& cfg, std::uint64_t stream,
                   bool required, const CaseCheck& check) {
  AxiomResult r{axiom, AxiomStatus::PassExhaustive, 0, "", cfg.seed, required};
  std::uint64_t space = 1;
  for (auto b : radix) {
    if (space > cfg.budget / b) {
      space = cfg.budget + 1;
      break;
    }
    space *= b;
  }
  Digits digits(radix.size());
  auto run = [&](const Digits& d) {
    const auto wit = check(d);
    if (!wit) {
      ++r.trials;
      return false;
    }
    if (wit->empty()) return false;
    ++r.trials;
    r.status = AxiomStatus::Fail;
    r.witness = *wit;
    return true;
  };
  if (space <= cfg.budget) {
    for (std::uint64_t idx = 0; idx < space; ++idx) {
      std::uint64_t rest = idx;
      for (size_t i = 0; i < radix.size(); ++i) {
        digits[i] = rest % radix[i];
        rest /= radix[i];
      }
      if (run(digits)) break;
    }
  } else {
    r.status = AxiomStatus::PassSampled;
    for (long i = 0; i < cfg.trials; ++i) {
      Rng rng(cfg.seed + stream * 0x9e3779b97f4a7c15ULL, static_cast<std::uint64_t>(i));
      for (size_t j = 0; j < radix.size(); ++j) digits[j] = rng.below(radix[j]);
      if (run(digits)) break;
    }
  }
  return r;
}

std::vector<std::uint64_t> radix_of(std::initializer_list<std::pair<int, std::uint64_t>> groups) {
  std::vector<std::uint64_t> out;
  for (const auto& [count, base] : groups) out.insert(out.end(), static_cast<size_t>(count), base);
  return out;
}

/// Integer lattice values lo + digit.
std::vector<int> lattice_at(const Digits& d, size_t offset, int n, int lo = -2) {
  std::vector<int> v(static_cast<size_t>(n));
  for (size_t i = 0; i < v.size(); ++i) v[i] = lo + static_cast<int>(d[offset + i]);
  return v;
}

Grid scaled(const std::vector<int>& v, int factor = 4) {
  Grid g(v.size());
  for (size_t i = 0; i < v.size(); ++i) g[i] = factor * v[i];
  return g;
}

ConditionalValue scale(const std::vector<Real>& lambda, const ConditionalValue& v) {
  ConditionalValue out = v;
  for (size_t b = 0; b < out.values.size(); ++b) out.values[b] = lambda[b] * out.values[b];
  return out;
}

Payoff scale(const Partition& g, const std::vector<Real>& lambda, const Payoff& h) {
  std::vector<Real> v(h.values());
  for (int i = 0; i < h.size(); ++i) v[static_cast<size_t>(i)] = lambda[static_cast<size_t>(g.block_of(i))] * h[i];
  return Payoff(std::move(v));
}

ConditionalValue pnorm_bound(const Partition& g, const ScenarioTree& tree, const PNormBound& pn, const Payoff& h) {
  if (pn.p < Real(1)) throw Error(ErrorCode::InvalidParam, "p-norm bound needs p >= 1");
  const std::vector<Real>& w = pn.measure.empty() ? tree.leaf_prob() : pn.measure;
  if (w.size() != static_cast<size_t>(h.size())) throw Error(ErrorCode::InvalidParam, "p-norm measure must have one weight per leaf");
  std::vector<Real> lambda = pn.lambda;
  if (lambda.size() == 1) lambda.assign(static_cast<size_t>(g.num_blocks()), pn.lambda.front());
  if (lambda.size() != static_cast<size_t>(g.num_blocks())) throw Error(ErrorCode::InvalidParam, "p-norm lambda needs one value per G block");
  ConditionalValue out{g, std::vector<Real>(static_cast<size_t>(g.num_blocks()))};
  for (int b = 0; b < g.num_blocks(); ++b) {
    Real mass;
    Real acc;
    for (int leaf : g.block(b)) {
      if (w[static_cast<size_t>(leaf)].sign() <= 0) throw Error(ErrorCode::InvalidParam, "p-norm measure must be positive");
      mass += w[static_cast<size_t>(leaf)];
      acc += w[static_cast<size_t>(leaf)] * pow(abs(h[leaf]), pn.p);
    }
    out.values[static_cast<size_t>(b)] = lambda[static_cast<size_t>(b)] * acc / mass;
  }
  return out;
}

std::vector<int> chosen_blocks(const Digits& d, size_t offset, int blocks) {
  std::vector<int> out;
  for (int b = 0; b < blocks; ++b) {
    if (d[offset + static_cast<size_t>(b)]) out.push_back(b);
  }
  return out;
}

std::string lhs_rhs(const Values& lhs, const Values& rhs) { return ";lhs=" + values_str(lhs) + ";rhs=" + values_str(rhs); }

}  // namespace

AxiomReport check_axioms(const EvaluationOracle& op, const ScenarioTree& tree, const Partition& g, const CheckConfig& cfg) {
  if (g.num_leaves() != tree.num_leaves()) throw Error(ErrorCode::InvalidParam, "initial information does not match the tree");
  Memo memo(op, g);
  const int n = tree.num_leaves();
  const int gb = g.num_blocks();
  const size_t nn = static_cast<size_t>(n);
  const size_t ngb = static_cast<size_t>(gb);
  const SearchConfig& sc = cfg.search;
  std::vector<int> block_of(nn);
  for (int i = 0; i < n; ++i) block_of[static_cast<size_t>(i)] = g.block_of(i);
  const Real quarters[] = {Real(0), Real::fraction(1, 4), Real::fraction(1, 2), Real::fraction(3, 4), Real(1)};
  AxiomReport rep;
  rep.seed = sc.seed;

  {
    AxiomResult r{"normalization", AxiomStatus::PassExhaustive, 1, "", sc.seed, true};
    const Values& v = memo.at(Grid(nn, 0));
    if (!all_equal(v, Values(ngb))) {
      r.status = AxiomStatus::Fail;
      r.witness = "H=" + payoff_of(Grid(nn, 0)).str() + ";value=" + values_str(v);
    }
    rep.results.push_back(r);
  }

  // Pi(H + m) = Pi(H) + m for G-measurable m.
  rep.results.push_back(search("cash-invariance", radix_of({{n, 5}, {gb, 5}}), sc, 1, true, [&](const Digits& d) -> std::optional<std::string> {
    const std::vector<int> h = lattice_at(d, 0, n);
    const std::vector<int> m = lattice_at(d, nn, gb);
    Grid shifted(nn);
    for (size_t i = 0; i < nn; ++i) shifted[i] = 4 * (h[i] + m[static_cast<size_t>(block_of[i])]);
    const Values lhs = memo.at(shifted);
    Values rhs = memo.at(scaled(h));
    for (size_t b = 0; b < ngb; ++b) rhs[b] += Real(m[b]);
    if (all_equal(lhs, rhs)) return std::nullopt;
    std::vector<Real> mv(m.begin(), m.end());
    return "H=" + payoff_of(scaled(h)).str() + ";m=" + values_str(mv) + lhs_rhs(lhs, rhs);
  }));

  // Convexity; `per_block` draws lambda in {0, 1/4, ..., 1} per G block,
  // otherwise a scalar lambda in {1/4, 1/2, 3/4}.
  auto convexity = [&](const std::string& name, bool per_block, std::uint64_t stream) {
    const auto radix = per_block ? radix_of({{n, 5}, {n, 5}, {gb, 5}}) : radix_of({{n, 5}, {n, 5}, {1, 3}});
    return search(name, radix, sc, stream, true, [&, per_block](const Digits& d) -> std::optional<std::string> {
      const std::vector<int> h1 = lattice_at(d, 0, n);
      const std::vector<int> h2 = lattice_at(d, nn, n);
      std::vector<int> l4(ngb);
      for (size_t b = 0; b < ngb; ++b) l4[b] = per_block ? static_cast<int>(d[2 * nn + b]) : static_cast<int>(d[2 * nn]) + 1;
      Grid mix(nn);
      for (size_t i = 0; i < nn; ++i) {
        const int l = l4[static_cast<size_t>(block_of[i])];
        mix[i] = l * h1[i] + (4 - l) * h2[i];
      }
      const Values lhs = memo.at(mix);
      const Values& v1 = memo.at(scaled(h1));
      const Values& v2 = memo.at(scaled(h2));
      Values rhs(ngb);
      for (size_t b = 0; b < ngb; ++b) rhs[b] = quarters[l4[b]] * v1[b] + quarters[4 - l4[b]] * v2[b];
      if (all_less_equal(lhs, rhs)) return std::nullopt;
      std::vector<Real> lv;
      for (int l : l4) lv.push_back(quarters[l]);
      return "H1=" + payoff_of(scaled(h1)).str() + ";H2=" + payoff_of(scaled(h2)).str() + ";lambda=" + (per_block ? values_str(lv) : lv[0].str()) +
             lhs_rhs(lhs, rhs);
    });
  };
  rep.results.push_back(convexity("convexity", false, 2));
  rep.results.push_back(convexity("convexity-g", true, 3));

  // Local property over nontrivial unions of G blocks; vacuous for trivial G.
  if (gb < 2) {
    rep.results.push_back({"local-property", AxiomStatus::PassExhaustive, 0, "", sc.seed, true});
  } else {
    rep.results.push_back(search("local-property", radix_of({{n, 5}, {n, 5}, {gb, 2}}), sc, 4, true, [&](const Digits& d) -> std::optional<std::string> {
      const std::vector<int> blocks = chosen_blocks(d, 2 * nn, gb);
      if (blocks.empty() || static_cast<int>(blocks.size()) == gb) return std::string();
      const std::vector<int> h1 = lattice_at(d, 0, n);
      const std::vector<int> h2 = lattice_at(d, nn, n);
      Grid glued(nn);
      for (size_t i = 0; i < nn; ++i) glued[i] = 4 * (d[2 * nn + static_cast<size_t>(block_of[i])] ? h1[i] : h2[i]);
      const Values lhs = memo.at(glued);
      const Values& v1 = memo.at(scaled(h1));
      Values rhs = memo.at(scaled(h2));
      for (int b : blocks) rhs[static_cast<size_t>(b)] = v1[static_cast<size_t>(b)];
      if (all_equal(lhs, rhs)) return std::nullopt;
      return "H1=" + payoff_of(scaled(h1)).str() + ";H2=" + payoff_of(scaled(h2)).str() + ";A=" + ids_str(blocks) + lhs_rhs(lhs, rhs);
    }));
  }

  // Monotonicity: unit increments connect every ordered lattice pair.
  rep.results.push_back(search("monotonicity", radix_of({{n, 5}, {1, nn}}), sc, 5, false, [&](const Digits& d) -> std::optional<std::string> {
    const std::vector<int> h1 = lattice_at(d, 0, n);
    const size_t leaf = d[nn];
    if (h1[leaf] == 2) return std::string();
    std::vector<int> h2 = h1;
    ++h2[leaf];
    const Values& lhs = memo.at(scaled(h1));
    const Values& rhs = memo.at(scaled(h2));
    if (all_less_equal(lhs, rhs)) return std::nullopt;
    return "H1=" + payoff_of(scaled(h1)).str() + ";H2=" + payoff_of(scaled(h2)).str() + lhs_rhs(lhs, rhs);
  }));

  // Positive homogeneity with lambda in {0, 1/2, 2, 3}, scalar or per G block.
  const int kScale4[] = {0, 2, 8, 12};
  const Real kScales[] = {Real(0), Real::fraction(1, 2), Real(2), Real(3)};
  auto homogeneity = [&](const std::string& name, bool per_block, std::uint64_t stream) {
    const auto radix = per_block ? radix_of({{n, 5}, {gb, 4}}) : radix_of({{n, 5}, {1, 4}});
    return search(name, radix, sc, stream, false, [&, per_block](const Digits& d) -> std::optional<std::string> {
      const std::vector<int> h = lattice_at(d, 0, n);
      std::vector<size_t> li(ngb);
      for (size_t b = 0; b < ngb; ++b) li[b] = per_block ? d[nn + b] : d[nn];
      Grid sh(nn);
      for (size_t i = 0; i < nn; ++i) sh[i] = kScale4[li[static_cast<size_t>(block_of[i])]] * h[i];
      const Values lhs = memo.at(sh);
      Values rhs = memo.at(scaled(h));
      for (size_t b = 0; b < ngb; ++b) rhs[b] = kScales[li[b]] * rhs[b];
      if (all_equal(lhs, rhs)) return std::nullopt;
      std::vector<Real> lv;
      for (size_t i : li) lv.push_back(kScales[i]);
      return "H=" + payoff_of(scaled(h)).str() + ";lambda=" + (per_block ? values_str(lv) : lv[0].str()) + lhs_rhs(lhs, rhs);
    });
  };
  rep.results.push_back(homogeneity("positive-homogeneity", false, 6));
  rep.results.push_back(homogeneity("positive-homogeneity-g", true, 7));

  if (cfg.market) {
    const ScenarioTree tg = tree.with_g_partition(g);
    const EvaluationOracle cached = [&memo, &g](const Payoff& h) { return ConditionalValue{g, memo.eval(h)}; };
    const WitnessReport mc = market_consistency_witness(cached, tg, sc);
    AxiomResult r{"market-consistency", mc.exhaustive ? AxiomStatus::PassExhaustive : AxiomStatus::PassSampled, mc.trials, mc.witness,
                  sc.seed, cfg.market_required};
    if (!mc.passed) r.status = AxiomStatus::Fail;
    rep.results.push_back(r);

    // Market local property on H >= 0 over unions of financial blocks.
    const Partition fs = partition_for(tg, ObservableSpec::financial(tg.horizon()));
    const int k = fs.num_blocks();
    std::vector<int> fin_of(nn);
    for (int i = 0; i < n; ++i) fin_of[static_cast<size_t>(i)] = fs.block_of(i);
    rep.results.push_back(search("market-local-property", radix_of({{n, 3}, {k, 2}}), sc, 8, cfg.market_required,
                                 [&](const Digits& d) -> std::optional<std::string> {
                                   const std::vector<int> h = lattice_at(d, 0, n, 0);
                                   Grid in_a(nn);
                                   Grid in_ac(nn);
                                   for (size_t i = 0; i < nn; ++i) {
                                     const bool a = d[nn + static_cast<size_t>(fin_of[i])] != 0;
                                     in_a[i] = a ? 4 * h[i] : 0;
                                     in_ac[i] = a ? 0 : 4 * h[i];
                                   }
                                   const Values whole = memo.at(scaled(h));
                                   Values split = memo.at(in_a);
                                   const Values& rest = memo.at(in_ac);
                                   for (size_t b = 0; b < ngb; ++b) split[b] += rest[b];
                                   if (all_equal(whole, split)) return std::nullopt;
                                   return "H=" + payoff_of(scaled(h)).str() + ";A=" + ids_str(chosen_blocks(d, nn, k)) + ";whole=" + values_str(whole) +
                                          ";split=" + values_str(split);
                                 }));
  }

  if (cfg.pnorm) {
    rep.results.push_back(search("p-norm-bound", radix_of({{n, 5}}), sc, 9, true, [&](const Digits& d) -> std::optional<std::string> {
      const Payoff h = payoff_of(scaled(lattice_at(d, 0, n)));
      const Values& v = memo.at(scaled(lattice_at(d, 0, n)));
      const ConditionalValue bound = pnorm_bound(g, tree, *cfg.pnorm, h);
      if (all_less_equal(v, bound.values)) return std::nullopt;
      return "H=" + h.str() + ";value=" + values_str(v) + ";bound=" + values_str(bound.values);
    }));
  }

  rep.results.push_back({"fatou", AxiomStatus::Structural, 0, "", sc.seed, false});
  rep.results.push_back({"continuity", AxiomStatus::Structural, 0, "", sc.seed, false});
  rep.mode = memo.exact() ? "rational-exact" : "float-tolerance";
  return rep;
}

namespace {

std::map<std::string, std::string> parse_fields(const std::string& witness) {
  std::map<std::string, std::string> out;
  std::stringstream ss(witness);
  std::string item;
  while (std::getline(ss, item, ';')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) bad_witness("field without '=': " + item);
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

const std::string& field(const std::map<std::string, std::string>& f, const std::string& key) {
  auto it = f.find(key);
  if (it == f.end()) bad_witness("missing field '" + key + "'");
  return it->second;
}

std::vector<Real> reals(const std::string& text) {
  std::vector<Real> out;
  std::stringstream ss(text);
  std::string tok;
  while (ss >> tok) {
    try {
      out.push_back(Real::parse(tok));
    } catch (const std::invalid_argument&) {
      bad_witness("bad number '" + tok + "'");
    }
  }
  return out;
}

std::vector<int> ints(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  int v = 0;
  while (ss >> v) out.push_back(v);
  return out;
}

Payoff payoff_field(const std::map<std::string, std::string>& f, const std::string& key, int n) {
  std::vector<Real> v = reals(field(f, key));
  if (static_cast<int>(v.size()) != n) bad_witness("payoff '" + key + "' has the wrong length");
  return Payoff(std::move(v));
}

std::vector<Real> block_values(const std::map<std::string, std::string>& f, const std::string& key, int blocks) {
  std::vector<Real> v = reals(field(f, key));
  if (v.size() == 1) v.assign(static_cast<size_t>(blocks), v.front());
  if (static_cast<int>(v.size()) != blocks) bad_witness("'" + key + "' needs one value per block");
  return v;
}

}  // namespace

bool replay_witness(const EvaluationOracle& op, const ScenarioTree& tree, const Partition& g, const AxiomResult& result,
                    const std::optional<PNormBound>& pnorm) {
  const auto f = parse_fields(result.witness);
  const int n = tree.num_leaves();
  const int gb = g.num_blocks();
  const std::string& a = result.axiom;
  if (a == "normalization") return !approx_equal(op(Payoff::constant(n, Real(0))), ConditionalValue{g, std::vector<Real>(static_cast<size_t>(gb))});
  if (a == "cash-invariance") {
    const Payoff h = payoff_field(f, "H", n);
    const std::vector<Real> m = block_values(f, "m", gb);
    return !approx_equal(op(h + spread(g, m)), op(h) + ConditionalValue{g, m});
  }
  if (a == "convexity" || a == "convexity-g") {
    const Payoff h1 = payoff_field(f, "H1", n);
    const Payoff h2 = payoff_field(f, "H2", n);
    const std::vector<Real> lv = block_values(f, "lambda", gb);
    std::vector<Real> mv;
    for (const auto& l : lv) mv.push_back(Real(1) - l);
    return !approx_less_equal(op(scale(g, lv, h1) + scale(g, mv, h2)), scale(lv, op(h1)) + scale(mv, op(h2)));
  }
  if (a == "local-property") {
    const Payoff h1 = payoff_field(f, "H1", n);
    const Payoff h2 = payoff_field(f, "H2", n);
    const std::vector<int> blocks = ints(field(f, "A"));
    const Event ev = event_of_blocks(g, blocks);
    ConditionalValue rhs = op(h2);
    const ConditionalValue v1 = op(h1);
    for (int b : blocks) rhs.values.at(static_cast<size_t>(b)) = v1.values.at(static_cast<size_t>(b));
    return !approx_equal(op(h1.masked(ev) + h2.masked(complement(ev))), rhs);
  }
  if (a == "monotonicity") {
    const Payoff h1 = payoff_field(f, "H1", n);
    const Payoff h2 = payoff_field(f, "H2", n);
    return !approx_less_equal(op(h1), op(h2));
  }
  if (a == "positive-homogeneity" || a == "positive-homogeneity-g") {
    const Payoff h = payoff_field(f, "H", n);
    const std::vector<Real> lv = block_values(f, "lambda", gb);
    return !approx_equal(op(scale(g, lv, h)), scale(lv, op(h)));
  }
  if (a == "market-consistency") {
    const Payoff hs = payoff_field(f, "HS", n);
    const Payoff h = payoff_field(f, "H", n);
    const EvaluationOracle eq = risk_neutral_oracle(tree.with_g_partition(g));
    return !approx_equal(op(hs + h), eq(hs) + op(h));
  }
  if (a == "market-local-property") {
    const Payoff h = payoff_field(f, "H", n);
    const ScenarioTree tg = tree.with_g_partition(g);
    const Event ev = event_of_blocks(partition_for(tg, ObservableSpec::financial(tg.horizon())), ints(field(f, "A")));
    return !approx_equal(op(h), op(h.masked(ev)) + op(h.masked(complement(ev))));
  }
  if (a == "p-norm-bound") {
    if (!pnorm) bad_witness("p-norm replay needs the bound configuration");
    const Payoff h = payoff_field(f, "H", n);
    return !approx_less_equal(op(h), pnorm_bound(g, tree, *pnorm, h));
  }
  throw Error(ErrorCode::InvalidParam, "cannot replay axiom '" + a + "'");
}

}  // namespace mcv
