#include "mcv/bsde.hpp"

#include <map>
#include <unordered_map>

#include "mcv/error.hpp"
#include "mcv/linear_algebra.hpp"

namespace mcv {

namespace {

[[noreturn]] void bad_param(const std::string& msg) { throw Error(ErrorCode::InvalidParam, msg); }

std::string join(const std::vector<Real>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + v[i].str();
  return s;
}

// Jump-count probabilities for intensity m = nu h.
std::vector<Real> jump_law(const Real& m) { return {Real(1) - m + m * m / Real(2), m - m * m, m * m / Real(2)}; }

}  // namespace

void GridModel::validate() const {
  if (steps < 1) bad_param("steps must be positive");
  if (h.sign() <= 0) bad_param("h must be positive");
  if (sigma.sign() <= 0) bad_param("sigma must be positive");
  if (s0.sign() <= 0) bad_param("s0 must be positive");
  if (insurance_brownians < 0) bad_param("insurance_brownians must be nonnegative");
  for (const auto& mk : marks) {
    if (mk.nu.sign() < 0) bad_param("mark intensity must be nonnegative");
    if (!(mk.nu * h < Real(1))) bad_param("nu * h must be below 1 for every mark");
  }
  const Real sh = sqrt(h);
  if ((Real(1) + mu * h - sigma * sh).sign() <= 0) bad_param("stock can hit zero: 1 + mu h - sigma sqrt(h) <= 0");
  if ((Real(1) + r * h).sign() <= 0) bad_param("bond rate must exceed -1/h");
}

Real GridModel::theta() const { return (r - mu) / sigma; }

std::string GridTree::insurance_path(int leaf) const {
  std::string key;
  for (int t = 1; t <= tree.horizon(); ++t) {
    const auto& inc = increments[static_cast<size_t>(tree.ancestor(leaf, t))];
    key += join(inc.dw);
    key += '|';
    for (int j : inc.jumps) key += std::to_string(j) + ",";
    key += ';';
  }
  return key;
}

Payoff GridTree::terminal_stock() const {
  std::vector<Real> v(static_cast<size_t>(tree.num_leaves()));
  for (int leaf = 0; leaf < tree.num_leaves(); ++leaf) v[static_cast<size_t>(leaf)] = tree.stock(leaf, tree.horizon())[0];
  return Payoff(std::move(v));
}

Payoff GridTree::terminal_insurance() const {
  std::vector<Real> v(static_cast<size_t>(tree.num_leaves()));
  for (int leaf = 0; leaf < tree.num_leaves(); ++leaf) v[static_cast<size_t>(leaf)] = tree.insurance(leaf, tree.horizon());
  return Payoff(std::move(v));
}

GridTree build_grid_tree(const GridModel& model) {
  model.validate();
  const Real sh = sqrt(model.h);
  const int d = model.insurance_brownians;
  const size_t marks = model.marks.size();

  // All non-financial outcomes of one step with their probabilities.
  struct Outcome {
    std::vector<Real> dw;
    std::vector<int> jumps;
    Real prob{1};
  };
  std::vector<Outcome> outcomes{Outcome{}};
  for (int k = 0; k < d; ++k) {
    std::vector<Outcome> next;
    for (const auto& o : outcomes) {
      for (int sgn : {1, -1}) {
        Outcome c = o;
        c.dw.push_back(Real(sgn) * sh);
        c.prob *= Real::fraction(1, 2);
        next.push_back(std::move(c));
      }
    }
    outcomes = std::move(next);
  }
  for (size_t j = 0; j < marks; ++j) {
    const std::vector<Real> law = jump_law(model.marks[j].nu * model.h);
    std::vector<Outcome> next;
    for (const auto& o : outcomes) {
      for (int count = 0; count < 3; ++count) {
        if (law[static_cast<size_t>(count)].is_zero()) continue;
        Outcome c = o;
        c.jumps.push_back(count);
        c.prob *= law[static_cast<size_t>(count)];
        next.push_back(std::move(c));
      }
    }
    outcomes = std::move(next);
  }
  const bool reveals = d > 0 || marks > 0;

  TreeConfig cfg;
  cfg.horizon = model.steps;
  cfg.bond_rate = model.r * model.h;
  if (reveals) {
    for (int t = 1; t <= model.steps; ++t) cfg.reveal_times.push_back(t);
  }
  std::unordered_map<std::string, GridIncrement> inc_by_label;
  cfg.nodes.push_back({"g0", std::nullopt, {model.s0}, model.y0, std::nullopt});
  inc_by_label["g0"] = {};
  struct Frontier {
    std::string id;
    Real s;
    Real y;
  };
  std::vector<Frontier> frontier{{"g0", model.s0, model.y0}};
  long counter = 1;
  for (int t = 0; t < model.steps; ++t) {
    std::vector<Frontier> next;
    for (const auto& parent : frontier) {
      for (int sgn : {1, -1}) {
        const Real dwf = Real(sgn) * sh;
        const Real s = parent.s * (Real(1) + model.mu * model.h + model.sigma * dwf);
        for (const auto& o : outcomes) {
          Real y = parent.y;
          for (const auto& w : o.dw) y += w;
          for (size_t j = 0; j < marks; ++j) y += model.marks[j].x * Real(o.jumps[j]);
          std::string id = "g" + std::to_string(counter++);
          cfg.nodes.push_back({id, parent.id, {s}, y, Real::fraction(1, 2) * o.prob});
          inc_by_label[id] = GridIncrement{dwf, o.dw, o.jumps};
          next.push_back({id, s, y});
        }
      }
    }
    frontier = std::move(next);
  }

  GridTree grid{model, build_tree(cfg), {}};
  grid.increments.resize(grid.tree.nodes().size());
  for (const auto& node : grid.tree.nodes()) grid.increments[static_cast<size_t>(node.id)] = inc_by_label.at(node.label);
  return grid;
}

DriverFn driver_mv(const Real& alpha, const GridModel& model) {
  if (alpha.sign() < 0) bad_param("alpha must be nonnegative");
  std::vector<Real> nu;
  for (const auto& mk : model.marks) nu.push_back(mk.nu);
  return {"mv:alpha=" + alpha.str(), [alpha, theta = model.theta(), nu](int, const Real& zf, const std::vector<Real>& z,
                                                                         const std::vector<Real>& zt) {
            Real quad;
            for (const auto& v : z) quad += v * v;
            for (size_t j = 0; j < zt.size(); ++j) quad += zt[j] * zt[j] * nu.at(j);
            return theta * zf + alpha / Real(2) * quad;
          }};
}

DriverFn driver_exp(const Real& gamma, const GridModel& model) {
  if (gamma.sign() <= 0) bad_param("gamma must be positive");
  std::vector<Real> nu;
  for (const auto& mk : model.marks) nu.push_back(mk.nu);
  return {"exp:gamma=" + gamma.str(), [gamma, theta = model.theta(), nu](int, const Real& zf, const std::vector<Real>& z,
                                                                         const std::vector<Real>& zt) {
            Real quad;
            for (const auto& v : z) quad += v * v;
            Real jumps;
            for (size_t j = 0; j < zt.size(); ++j) {
              const Real u = zt[j] / gamma;
              jumps += (exp(u) - u - Real(1)) * nu.at(j);
            }
            return theta * zf + quad / (Real(2) * gamma) + gamma * jumps;
          }};
}

DriverCheckReport driver_mc_check(const DriverFn& g, const GridModel& model, long samples, std::uint64_t seed) {
  if (samples < 2) bad_param("driver check needs at least two samples");
  DriverCheckReport rep;
  rep.seed = seed;
  const Real theta = model.theta();
  const Real lo(-4);
  const Real hi(4);
  for (long i = 0; i < samples; ++i) {
    Rng rng(seed, static_cast<std::uint64_t>(i));
    const int t = static_cast<int>(rng.range(0, std::max(0, model.steps - 1)));
    const Real zf1 = rng.rational(lo, hi, 8);
    Real zf2 = rng.rational(lo, hi, 8);
    while (zf2 == zf1) zf2 = rng.rational(lo, hi, 8);
    std::vector<Real> z(static_cast<size_t>(model.insurance_brownians));
    for (auto& v : z) v = rng.rational(lo, hi, 8);
    std::vector<Real> zt(model.marks.size());
    for (auto& v : zt) v = rng.rational(lo, hi, 8);
    const Real g1 = g.eval(t, zf1, z, zt);
    const Real g2 = g.eval(t, zf2, z, zt);
    ++rep.samples;
    if (!approx_equal(g1 - theta * zf1, g2 - theta * zf2)) {
      rep.passed = false;
      rep.witness = "t=" + std::to_string(t) + ";zf1=" + zf1.str() + ";zf2=" + zf2.str() + ";z=" + join(z) + ";ztilde=" + join(zt) +
                    ";g1=" + g1.str() + ";g2=" + g2.str();
      return rep;
    }
  }
  return rep;
}

DriverCheckReport driver_table_check(const std::vector<DriverSample>& rows, const GridModel& model) {
  DriverCheckReport rep;
  const Real theta = model.theta();
  std::map<std::string, std::pair<const DriverSample*, Real>> seen;
  for (const auto& row : rows) {
    ++rep.samples;
    const std::string key = std::to_string(row.t) + "|" + join(row.z) + "|" + join(row.ztilde);
    const Real reduced = row.g - theta * row.zf;
    auto [it, fresh] = seen.try_emplace(key, &row, reduced);
    if (fresh) continue;
    if (!approx_equal(it->second.second, reduced)) {
      rep.passed = false;
      rep.witness = "t=" + std::to_string(row.t) + ";zf1=" + it->second.first->zf.str() + ";zf2=" + row.zf.str() + ";z=" + join(row.z) +
                    ";ztilde=" + join(row.ztilde) + ";g1=" + it->second.first->g.str() + ";g2=" + row.g.str();
      return rep;
    }
  }
  return rep;
}

namespace {

// Centred regressors of one child: (dW^f, dW_1..d, N_1..m) minus their Q-means.
std::vector<Real> raw_increments(const GridIncrement& inc) {
  std::vector<Real> x{inc.dwf};
  x.insert(x.end(), inc.dw.begin(), inc.dw.end());
  for (int j : inc.jumps) x.emplace_back(j);
  return x;
}

Real mv_quadratic(const BsdeStep& st, const GridModel& model) {
  Real quad;
  for (const auto& v : st.z) quad += v * v;
  for (size_t j = 0; j < st.ztilde.size(); ++j) quad += st.ztilde[j] * st.ztilde[j] * model.marks[j].nu;
  return quad;
}

}  // namespace

BsdeSolution solve_discrete(const PrincipleSpec& per_step, const Payoff& h, const GridTree& grid) {
  const ScenarioTree& tree = grid.tree;
  BackwardEvaluator be(tree, per_step);
  BsdeSolution sol;
  sol.y = be.run(h);

  for (const auto& node : tree.nodes()) {
    if (node.children.empty()) continue;
    const int t = node.time;
    const auto& xi = be.stage(t).measure().density.weight;
    BsdeStep st;
    st.node = node.id;
    st.time = t;
    st.y = sol.y[static_cast<size_t>(t)].at_leaf(node.leaf_begin);
    st.children = node.children;
    const size_t k = node.children.size();
    std::vector<std::vector<Real>> raw(k);
    for (size_t c = 0; c < k; ++c) {
      const auto& child = tree.node(node.children[c]);
      st.p_child.push_back(child.branch_prob);
      st.q_child.push_back(child.branch_prob * xi[static_cast<size_t>(child.leaf_begin)]);
      st.delta_pi.push_back(sol.y[static_cast<size_t>(t) + 1].at_leaf(child.leaf_begin) - st.y);
      raw[c] = raw_increments(grid.increments[static_cast<size_t>(child.id)]);
    }
    const size_t dim = raw.front().size();
    std::vector<Real> mean_q(dim);
    for (size_t c = 0; c < k; ++c) {
      st.q_drift += st.q_child[c] * st.delta_pi[c];
      st.p_drift += st.p_child[c] * st.delta_pi[c];
      for (size_t i = 0; i < dim; ++i) mean_q[i] += st.q_child[c] * raw[c][i];
    }
    std::vector<std::vector<Real>> x(k, std::vector<Real>(dim));
    for (size_t c = 0; c < k; ++c) {
      for (size_t i = 0; i < dim; ++i) x[c][i] = raw[c][i] - mean_q[i];
    }
    std::vector<std::vector<Real>> gram(dim, std::vector<Real>(dim));
    std::vector<Real> rhs(dim);
    for (size_t c = 0; c < k; ++c) {
      for (size_t i = 0; i < dim; ++i) {
        rhs[i] += st.q_child[c] * x[c][i] * st.delta_pi[c];
        for (size_t j = 0; j < dim; ++j) gram[i][j] += st.q_child[c] * x[c][i] * x[c][j];
      }
    }
    LinearSolution beta = solve_linear(gram, rhs);
    if (beta.status != LinearSolution::Status::Unique) {
      throw Error(ErrorCode::SingularProjection, "increment covariance is singular at node '" + node.label + "'");
    }
    st.zf = beta.x[0];
    st.z.assign(beta.x.begin() + 1, beta.x.begin() + 1 + grid.model.insurance_brownians);
    st.ztilde.assign(beta.x.begin() + 1 + grid.model.insurance_brownians, beta.x.end());
    for (size_t c = 0; c < k; ++c) {
      Real dl = st.delta_pi[c] - st.q_drift;
      for (size_t i = 0; i < dim; ++i) dl -= beta.x[i] * x[c][i];
      st.delta_l.push_back(dl);
    }
    // E_{F^S}[dL] under P: children sharing the financial increment.
    std::map<std::string, std::pair<Real, Real>> fs_mean;
    for (size_t c = 0; c < k; ++c) {
      auto& [mass, acc] = fs_mean[grid.increments[static_cast<size_t>(st.children[c])].dwf.str()];
      mass += st.p_child[c];
      acc += st.p_child[c] * st.delta_l[c];
    }
    for (size_t c = 0; c < k; ++c) {
      const auto& [mass, acc] = fs_mean.at(grid.increments[static_cast<size_t>(st.children[c])].dwf.str());
      const Real dev = st.delta_l[c] - acc / mass;
      st.lvar += st.q_child[c] * dev * dev;
    }
    sol.steps.push_back(std::move(st));
  }
  return sol;
}

BsdeCheckReport reconstruction_check(const BsdeSolution& sol, const GridTree& grid, const Real& alpha) {
  BsdeCheckReport rep;
  const GridModel& m = grid.model;
  const Real theta = m.theta();
  for (const auto& st : sol.steps) {
    ++rep.nodes;
    const Real drift = (theta * st.zf + alpha / Real(2) * mv_quadratic(st, m)) * m.h + alpha / Real(2) * st.lvar;
    for (size_t c = 0; c < st.children.size(); ++c) {
      const auto& inc = grid.increments[static_cast<size_t>(st.children[c])];
      Real rebuilt = st.y + st.delta_pi[c] + drift - st.zf * inc.dwf - st.delta_l[c];
      for (size_t k = 0; k < st.z.size(); ++k) rebuilt -= st.z[k] * inc.dw[k];
      for (size_t j = 0; j < st.ztilde.size(); ++j) rebuilt -= st.ztilde[j] * (Real(inc.jumps[j]) - m.marks[j].nu * m.h);
      if (!approx_equal(rebuilt, st.y)) {
        rep.passed = false;
        rep.witness = "node=" + grid.tree.node(st.node).label + ";child=" + grid.tree.node(st.children[c]).label +
                      ";rebuilt=" + rebuilt.str() + ";value=" + st.y.str();
        return rep;
      }
    }
  }
  return rep;
}

BsdeCheckReport drift_identity_check(const BsdeSolution& sol, const GridTree& grid, const Real& alpha) {
  BsdeCheckReport rep;
  const GridModel& m = grid.model;
  const Real theta = m.theta();
  for (const auto& st : sol.steps) {
    ++rep.nodes;
    const Real expected = -(theta * st.zf + alpha / Real(2) * mv_quadratic(st, m)) * m.h - alpha / Real(2) * st.lvar;
    if (!approx_equal(st.p_drift, expected)) {
      rep.passed = false;
      rep.witness = "node=" + grid.tree.node(st.node).label + ";E_P[dPi]=" + st.p_drift.str() + ";expected=" + expected.str();
      return rep;
    }
  }
  return rep;
}

BsdeCheckReport orthogonality_check(const BsdeSolution& sol, const GridTree& grid) {
  BsdeCheckReport rep;
  for (const auto& st : sol.steps) {
    ++rep.nodes;
    const size_t k = st.children.size();
    std::vector<std::vector<Real>> raw(k);
    for (size_t c = 0; c < k; ++c) raw[c] = raw_increments(grid.increments[static_cast<size_t>(st.children[c])]);
    const size_t dim = raw.front().size();
    std::vector<Real> mean_q(dim);
    for (size_t c = 0; c < k; ++c) {
      for (size_t i = 0; i < dim; ++i) mean_q[i] += st.q_child[c] * raw[c][i];
    }
    Real m0;
    std::vector<Real> cov(dim);
    for (size_t c = 0; c < k; ++c) {
      m0 += st.q_child[c] * st.delta_l[c];
      for (size_t i = 0; i < dim; ++i) cov[i] += st.q_child[c] * st.delta_l[c] * (raw[c][i] - mean_q[i]);
    }
    bool ok = approx_equal(m0, Real(0));
    for (const auto& v : cov) ok = ok && approx_equal(v, Real(0));
    if (!ok) {
      rep.passed = false;
      rep.witness = "node=" + grid.tree.node(st.node).label + ";E_Q[dL]=" + m0.str() + ";E_Q[dL x]=" + join(cov);
      return rep;
    }
  }
  return rep;
}

BsdeCheckReport law_check(const BsdeSolution& sol, const GridTree& grid) {
  BsdeCheckReport rep;
  for (const auto& st : sol.steps) {
    ++rep.nodes;
    std::map<std::string, std::pair<Real, Real>> law;
    for (size_t c = 0; c < st.children.size(); ++c) {
      const auto& inc = grid.increments[static_cast<size_t>(st.children[c])];
      std::string key = join(inc.dw) + "|";
      for (int j : inc.jumps) key += std::to_string(j) + ",";
      law[key].first += st.p_child[c];
      law[key].second += st.q_child[c];
    }
    for (const auto& [key, pq] : law) {
      if (!approx_equal(pq.first, pq.second)) {
        rep.passed = false;
        rep.witness = "node=" + grid.tree.node(st.node).label + ";outcome=" + key + ";P=" + pq.first.str() + ";Q=" + pq.second.str();
        return rep;
      }
    }
  }
  return rep;
}

ExpTowerReport exp_tower_check(const Real& gamma, const Payoff& h, const GridTree& grid) {
  const ScenarioTree& tree = grid.tree;
  std::unordered_map<std::string, Real> by_path;
  for (int leaf = 0; leaf < tree.num_leaves(); ++leaf) {
    auto [it, fresh] = by_path.try_emplace(grid.insurance_path(leaf), h[leaf]);
    if (!fresh && it->second != h[leaf]) {
      throw Error(ErrorCode::NotPureInsurance, "payoff differs between leaves with the same insurance path (leaf " +
                                                   std::to_string(leaf) + ")");
    }
  }
  const PrincipleSpec spec = PrincipleSpec::exponential(gamma);
  ExpTowerReport rep;
  rep.recursive = backward_evaluate(spec, h, tree).front().values.front();
  rep.one_shot = evaluate(spec, h, Partition::trivial(tree.num_leaves()), tree).values.front();
  rep.passed = approx_equal(rep.recursive, rep.one_shot);
  return rep;
}

std::vector<TrendRow> trend_report(const GridModel& base, const Real& horizon, const std::vector<Real>& step_sizes,
                                   const Real& alpha, const std::function<Real(const Real&, const Real&)>& payoff) {
  std::vector<TrendRow> rows;
  for (const auto& hs : step_sizes) {
    const Real n = horizon / hs;
    if (!n.is_exact() || n.rational().get_den() != 1 || n.sign() <= 0) bad_param("horizon is not a multiple of h = " + hs.str());
    GridModel m = base;
    m.h = hs;
    m.steps = static_cast<int>(n.rational().get_num().get_si());
    const GridTree grid = build_grid_tree(m);
    const Payoff s = grid.terminal_stock();
    const Payoff y = grid.terminal_insurance();
    std::vector<Real> v(static_cast<size_t>(s.size()));
    for (int leaf = 0; leaf < s.size(); ++leaf) v[static_cast<size_t>(leaf)] = payoff(s[leaf], y[leaf]);
    const auto values = backward_evaluate(PrincipleSpec::mean_variance(alpha), Payoff(std::move(v)), grid.tree);
    rows.push_back({hs, m.steps, grid.tree.num_leaves(), values.front().values.front()});
  }
  return rows;
}

}  // namespace mcv
