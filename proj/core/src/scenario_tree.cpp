#include "mcv/scenario_tree.hpp"

#include <algorithm>
#include <functional>
#include <unordered_map>

#include "mcv/error.hpp"
#include "mcv/linear_algebra.hpp"

namespace mcv {

namespace {

std::string stock_key(const std::vector<Real>& s) {
  std::string key;
  for (const auto& v : s) {
    key += v.str();
    key += ';';
  }
  return key;
}

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); }

}  // namespace

TreeConfig product_tree_config(const ProductTreeSpec& spec) {
  TreeConfig cfg;
  cfg.bond_rate = spec.bond_rate;
  cfg.horizon = static_cast<int>(spec.steps.size());
  cfg.nodes.push_back(NodeConfig{"n0", std::nullopt, spec.s0, spec.y0, std::nullopt});

  struct Frontier {
    std::string id;
    std::vector<Real> stock;
    Real insurance;
  };
  std::vector<Frontier> frontier{{"n0", spec.s0, spec.y0}};
  int counter = 1;
  for (size_t t = 0; t < spec.steps.size(); ++t) {
    const auto& step = spec.steps[t];
    std::vector<FinancialMove> fin = step.financial;
    if (fin.empty()) fin.push_back(FinancialMove{std::vector<Real>(spec.s0.size(), Real(1)), Real(1)});
    std::vector<InsuranceMove> ins = step.insurance;
    if (ins.empty()) {
      ins.push_back(InsuranceMove{Real(0), Real(1)});
    } else {
      cfg.reveal_times.push_back(static_cast<int>(t) + 1);
    }
    std::vector<Frontier> next;
    for (const auto& parent : frontier) {
      for (const auto& f : fin) {
        for (const auto& y : ins) {
          Frontier child{"n" + std::to_string(counter++), parent.stock, parent.insurance + y.increment};
          for (size_t j = 0; j < child.stock.size(); ++j) child.stock[j] *= f.factor.at(j);
          cfg.nodes.push_back(NodeConfig{child.id, parent.id, child.stock, child.insurance, f.prob * y.prob});
          next.push_back(std::move(child));
        }
      }
    }
    frontier = std::move(next);
  }
  return cfg;
}

const std::vector<int>& ScenarioTree::nodes_at(int t) const {
  if (t < 0 || t > horizon_) throw Error(ErrorCode::UnknownTime, "time " + std::to_string(t));
  return by_time_[static_cast<size_t>(t)];
}

int ScenarioTree::ancestor(int leaf, int t) const {
  if (t < 0 || t > horizon_) throw Error(ErrorCode::UnknownTime, "time " + std::to_string(t));
  return ancestors_[static_cast<size_t>(t)][static_cast<size_t>(leaf)];
}

int ScenarioTree::stock_path_label(int leaf, int t) const {
  if (t < 0 || t > horizon_) throw Error(ErrorCode::UnknownTime, "time " + std::to_string(t));
  return stock_paths_[static_cast<size_t>(t)][static_cast<size_t>(leaf)];
}

Real ScenarioTree::bond(int t) const { return pow(Real(1) + bond_rate_, t); }

ScenarioTree ScenarioTree::with_g_partition(const Partition& g) const {
  if (g.num_leaves() != num_leaves()) invalid("G partition does not match the leaf set");
  ScenarioTree copy = *this;
  copy.g_partition_ = g.with_time_tag(std::nullopt);
  return copy;
}

std::optional<int> ScenarioTree::leaf_index(const std::string& label) const {
  for (int leaf = 0; leaf < num_leaves(); ++leaf) {
    if (node(leaf_node(leaf)).label == label) return leaf;
  }
  return std::nullopt;
}

ScenarioTree build_tree(const TreeConfig& cfg) {
  if (cfg.nodes.empty()) invalid("tree has no nodes");
  std::unordered_map<std::string, int> index;
  for (size_t i = 0; i < cfg.nodes.size(); ++i) {
    if (!index.emplace(cfg.nodes[i].id, static_cast<int>(i)).second) invalid("duplicate node id '" + cfg.nodes[i].id + "'");
  }

  int root = -1;
  std::vector<std::vector<int>> children(cfg.nodes.size());
  for (size_t i = 0; i < cfg.nodes.size(); ++i) {
    const auto& n = cfg.nodes[i];
    if (!n.parent) {
      if (root != -1) invalid("tree has more than one root");
      root = static_cast<int>(i);
      continue;
    }
    auto it = index.find(*n.parent);
    if (it == index.end()) invalid("node '" + n.id + "' references unknown parent '" + *n.parent + "'");
    children[static_cast<size_t>(it->second)].push_back(static_cast<int>(i));
  }
  if (root == -1) invalid("tree has no root");

  ScenarioTree tree;
  tree.num_stocks_ = static_cast<int>(cfg.nodes[static_cast<size_t>(root)].stock.size());
  if (tree.num_stocks_ == 0) invalid("root must declare at least one stock value");
  tree.bond_rate_ = cfg.bond_rate;
  if (Real(1) + cfg.bond_rate <= Real(0)) invalid("bond rate must exceed -1");

  // Depth-first relabelling so that every subtree owns a contiguous leaf range.
  std::vector<int> new_id(cfg.nodes.size(), -1);
  std::function<void(int, int, int)> visit = [&](int cfg_idx, int parent, int time) {
    if (time > 10000) invalid("tree is too deep");
    const auto& nc = cfg.nodes[static_cast<size_t>(cfg_idx)];
    TreeNode node;
    node.id = static_cast<int>(tree.nodes_.size());
    node.label = nc.id;
    node.time = time;
    node.parent = parent;
    node.stock = nc.stock;
    if (nc.insurance) {
      node.insurance = *nc.insurance;
    } else if (parent >= 0) {
      node.insurance = tree.nodes_[static_cast<size_t>(parent)].insurance;
    }
    if (parent >= 0) {
      if (!nc.prob && cfg.leaf_prob.empty()) invalid("node '" + nc.id + "' has no branch probability");
      if (nc.prob) node.branch_prob = *nc.prob;
    }
    new_id[static_cast<size_t>(cfg_idx)] = node.id;
    node.leaf_begin = static_cast<int>(tree.leaves_.size());
    tree.nodes_.push_back(node);
    const int id = node.id;
    if (parent >= 0) tree.nodes_[static_cast<size_t>(parent)].children.push_back(id);
    const auto& kids = children[static_cast<size_t>(cfg_idx)];
    if (kids.empty()) tree.leaves_.push_back(id);
    for (int k : kids) visit(k, id, time + 1);
    tree.nodes_[static_cast<size_t>(id)].leaf_end = static_cast<int>(tree.leaves_.size());
  };
  visit(root, -1, 0);
  if (tree.nodes_.size() != cfg.nodes.size()) invalid("node table is not a single connected tree");

  int horizon = -1;
  for (int leaf_node : tree.leaves_) {
    int t = tree.nodes_[static_cast<size_t>(leaf_node)].time;
    if (horizon == -1) horizon = t;
    if (t != horizon) invalid("all leaves must sit at the same time");
  }
  if (cfg.horizon && *cfg.horizon != horizon) {
    invalid("declared horizon " + std::to_string(*cfg.horizon) + " does not match tree depth " + std::to_string(horizon));
  }
  tree.horizon_ = horizon;
  tree.by_time_.assign(static_cast<size_t>(horizon) + 1, {});
  for (const auto& n : tree.nodes_) tree.by_time_[static_cast<size_t>(n.time)].push_back(n.id);

  for (const auto& n : tree.nodes_) {
    if (static_cast<int>(n.stock.size()) != tree.num_stocks_) invalid("node '" + n.label + "' has the wrong number of stocks");
    for (const auto& s : n.stock) {
      if (s.sign() <= 0) invalid("node '" + n.label + "' has a nonpositive stock value");
    }
  }

  for (int t : cfg.reveal_times) {
    if (t < 1 || t > horizon) invalid("reveal time " + std::to_string(t) + " outside 1.." + std::to_string(horizon));
    tree.reveal_times_.insert(t);
  }

  // Probabilities.
  if (!cfg.leaf_prob.empty()) {
    Real total;
    for (int leaf_node : tree.leaves_) {
      auto& n = tree.nodes_[static_cast<size_t>(leaf_node)];
      auto it = cfg.leaf_prob.find(n.label);
      if (it == cfg.leaf_prob.end()) invalid("leaf '" + n.label + "' missing from leaf_prob");
      if (it->second.sign() <= 0) invalid("leaf '" + n.label + "' has nonpositive probability");
      n.mass = it->second;
      total += it->second;
    }
    if (!approx_equal(total, Real(1))) invalid("leaf probabilities sum to " + total.str());
    for (auto it = tree.nodes_.rbegin(); it != tree.nodes_.rend(); ++it) {
      if (it->children.empty()) continue;
      Real m;
      for (int c : it->children) m += tree.nodes_[static_cast<size_t>(c)].mass;
      it->mass = m;
    }
    for (auto& n : tree.nodes_) {
      n.branch_prob = n.parent < 0 ? Real(1) : n.mass / tree.nodes_[static_cast<size_t>(n.parent)].mass;
    }
  } else {
    for (auto& n : tree.nodes_) {
      if (n.parent < 0) continue;
      if (n.branch_prob.sign() <= 0) invalid("node '" + n.label + "' has nonpositive branch probability");
    }
    for (const auto& n : tree.nodes_) {
      if (n.children.empty()) continue;
      Real sum;
      for (int c : n.children) sum += tree.nodes_[static_cast<size_t>(c)].branch_prob;
      if (!approx_equal(sum, Real(1))) invalid("branch probabilities below '" + n.label + "' sum to " + sum.str());
    }
    for (auto& n : tree.nodes_) {
      n.mass = n.parent < 0 ? Real(1) : tree.nodes_[static_cast<size_t>(n.parent)].mass * n.branch_prob;
    }
  }
  for (int leaf_node : tree.leaves_) tree.leaf_prob_.push_back(tree.nodes_[static_cast<size_t>(leaf_node)].mass);

  // Insurance may only move into a reveal time, and between reveals every
  // branching must be visible in the stock.
  for (const auto& n : tree.nodes_) {
    if (n.children.empty()) continue;
    const int t = n.time + 1;
    if (tree.is_reveal_time(t)) continue;
    std::set<std::string> seen;
    for (int c : n.children) {
      const auto& child = tree.nodes_[static_cast<size_t>(c)];
      if (!(child.insurance == n.insurance)) {
        invalid("insurance changes on edge '" + n.label + "' -> '" + child.label + "' into non-reveal time " + std::to_string(t));
      }
      if (!seen.insert(stock_key(child.stock)).second) {
        invalid("siblings below '" + n.label + "' are indistinguishable at non-reveal time " + std::to_string(t));
      }
    }
  }

  const size_t leaves = tree.leaves_.size();
  tree.ancestors_.assign(static_cast<size_t>(horizon) + 1, std::vector<int>(leaves));
  for (size_t leaf = 0; leaf < leaves; ++leaf) {
    int id = tree.leaves_[leaf];
    for (int t = horizon; t >= 0; --t) {
      tree.ancestors_[static_cast<size_t>(t)][leaf] = id;
      id = tree.nodes_[static_cast<size_t>(id)].parent;
    }
  }

  // Stock-path labels: interned (parent path, stock at t) pairs.
  std::vector<int> node_path(tree.nodes_.size(), 0);
  std::map<std::pair<int, std::string>, int> interned;
  for (const auto& n : tree.nodes_) {
    int parent_path = n.parent < 0 ? -1 : node_path[static_cast<size_t>(n.parent)];
    auto key = std::make_pair(parent_path, stock_key(n.stock));
    auto [it, _] = interned.try_emplace(key, static_cast<int>(interned.size()));
    node_path[static_cast<size_t>(n.id)] = it->second;
  }
  tree.stock_paths_.assign(static_cast<size_t>(horizon) + 1, std::vector<int>(leaves));
  for (int t = 0; t <= horizon; ++t) {
    for (size_t leaf = 0; leaf < leaves; ++leaf) {
      tree.stock_paths_[static_cast<size_t>(t)][leaf] =
          node_path[static_cast<size_t>(tree.ancestors_[static_cast<size_t>(t)][leaf])];
    }
  }

  if (cfg.g_blocks.empty()) {
    tree.g_partition_ = Partition::trivial(static_cast<int>(leaves));
  } else {
    std::vector<std::vector<int>> blocks;
    for (const auto& blk : cfg.g_blocks) {
      std::vector<int> b;
      for (const auto& label : blk) {
        auto leaf = tree.leaf_index(label);
        if (!leaf) invalid("G block references unknown leaf '" + label + "'");
        b.push_back(*leaf);
      }
      blocks.push_back(std::move(b));
    }
    tree.g_partition_ = Partition::from_blocks(blocks, static_cast<int>(leaves));
  }
  return tree;
}

Partition partition_for(const ScenarioTree& tree, const ObservableSpec& spec) {
  auto check_time = [&](int t) {
    if (t < 0 || t > tree.horizon()) throw Error(ErrorCode::UnknownTime, "time " + std::to_string(t));
  };
  const int n = tree.num_leaves();
  switch (spec.kind) {
    case ObservableSpec::Kind::Trivial:
      return Partition::trivial(n);
    case ObservableSpec::Kind::Initial:
      return tree.g_partition();
    case ObservableSpec::Kind::Financial: {
      check_time(spec.time);
      std::vector<int> labels(static_cast<size_t>(n));
      for (int leaf = 0; leaf < n; ++leaf) labels[static_cast<size_t>(leaf)] = tree.stock_path_label(leaf, spec.time);
      return Partition::from_labels(labels).join(tree.g_partition()).with_time_tag(spec.time);
    }
    case ObservableSpec::Kind::Full: {
      check_time(spec.time);
      std::vector<int> labels(static_cast<size_t>(n));
      for (int leaf = 0; leaf < n; ++leaf) labels[static_cast<size_t>(leaf)] = tree.ancestor(leaf, spec.time);
      return Partition::from_labels(labels).join(tree.g_partition()).with_time_tag(spec.time);
    }
    case ObservableSpec::Kind::FinancialAfter: {
      check_time(spec.time);
      check_time(spec.from);
      if (spec.from > spec.time) throw Error(ErrorCode::UnknownTime, "financial_after requires from <= time");
      Partition full = partition_for(tree, ObservableSpec::full(spec.from));
      Partition fin = partition_for(tree, ObservableSpec::financial(spec.time));
      return fin.join(full).with_time_tag(spec.time);
    }
  }
  throw Error(ErrorCode::InvalidSpec, "unknown observable kind");
}

ConditionalValue cond_expectation(const std::vector<Real>& p, const Payoff& h, const Partition& part,
                                  const Density& xi) {
  const int n = part.num_leaves();
  if (h.size() != n || static_cast<int>(p.size()) != n || static_cast<int>(xi.weight.size()) != n) {
    throw Error(ErrorCode::NotMeasurable, "payoff, partition and density disagree on the number of leaves");
  }
  if (!part.refines(xi.base)) {
    throw Error(ErrorCode::NotMeasurable, "density base must be coarser than the conditioning partition");
  }
  ConditionalValue out{part, std::vector<Real>(static_cast<size_t>(part.num_blocks()))};
  for (int b = 0; b < part.num_blocks(); ++b) {
    Real mass;
    Real acc;
    for (int leaf : part.block(b)) {
      Real w = p[static_cast<size_t>(leaf)] * xi.weight[static_cast<size_t>(leaf)];
      mass += w;
      acc += w * h[leaf];
    }
    if (mass.is_zero()) throw Error(ErrorCode::ZeroBlockMass, "block " + std::to_string(b) + " has zero density mass");
    out.values[static_cast<size_t>(b)] = acc / mass;
  }
  return out;
}

ConditionalValue cond_expectation(const ScenarioTree& tree, const Payoff& h, const Partition& part,
                                  const Density& xi) {
  return cond_expectation(tree.leaf_prob(), h, part, xi);
}

ConditionalValue cond_expectation(const ScenarioTree& tree, const Payoff& h, const Partition& part) {
  return cond_expectation(tree, h, part, Density::unit(Partition::trivial(tree.num_leaves())));
}

RiskNeutral risk_neutral(const ScenarioTree& tree, const Partition& base, int from, int to, Numeraire numeraire) {
  if (from < 0 || to > tree.horizon() || from > to) {
    throw Error(ErrorCode::UnknownTime, "risk_neutral window " + std::to_string(from) + ".." + std::to_string(to));
  }
  if (!numeraire.is_bond() && (numeraire.stock < 0 || numeraire.stock >= tree.num_stocks())) {
    throw Error(ErrorCode::NonpositiveNumeraire, "no stock with index " + std::to_string(numeraire.stock));
  }
  const int n_leaves = tree.num_leaves();
  auto level = [&](int t) {
    std::vector<int> labels(static_cast<size_t>(n_leaves));
    for (int leaf = 0; leaf < n_leaves; ++leaf) labels[static_cast<size_t>(leaf)] = tree.stock_path_label(leaf, t);
    return Partition::from_labels(labels).join(base);
  };
  Partition current = level(from);
  if (!(current == base)) {
    throw Error(ErrorCode::InvalidConfig, "base sigma-algebra must determine the stock path up to the start time");
  }

  // Q(block | base) for the blocks of the current level, indexed by a representative leaf.
  std::vector<Real> q_leaf(static_cast<size_t>(n_leaves), Real(1));
  const int n_assets = tree.num_stocks() + 1;
  auto asset = [&](int leaf, int t, int a) -> Real {
    return a == 0 ? tree.bond(t) : tree.stock(leaf, t)[static_cast<size_t>(a - 1)];
  };
  auto numeraire_value = [&](int leaf, int t) -> Real {
    return numeraire.is_bond() ? tree.bond(t) : tree.stock(leaf, t)[static_cast<size_t>(numeraire.stock)];
  };

  for (int t = from; t < to; ++t) {
    Partition next = level(t + 1);
    for (int b = 0; b < current.num_blocks(); ++b) {
      const auto& blk = current.block(b);
      // Distinct successor blocks in leaf order.
      std::vector<int> succ;
      std::vector<int> rep;
      for (int leaf : blk) {
        int nb = next.block_of(leaf);
        if (std::find(succ.begin(), succ.end(), nb) == succ.end()) {
          succ.push_back(nb);
          rep.push_back(leaf);
        }
      }
      const int parent_leaf = blk.front();
      const size_t k = succ.size();
      std::vector<std::vector<Real>> a(static_cast<size_t>(n_assets), std::vector<Real>(k));
      std::vector<Real> rhs(static_cast<size_t>(n_assets));
      const Real n_parent = numeraire_value(parent_leaf, t);
      for (int as = 0; as < n_assets; ++as) {
        rhs[static_cast<size_t>(as)] = asset(parent_leaf, t, as) / n_parent;
        for (size_t c = 0; c < k; ++c) {
          a[static_cast<size_t>(as)][c] = asset(rep[c], t + 1, as) / numeraire_value(rep[c], t + 1);
        }
      }
      LinearSolution sol = solve_linear(a, rhs);
      const std::string where = "financial node at time " + std::to_string(t) + " (leaf " + std::to_string(parent_leaf) + ")";
      if (sol.status == LinearSolution::Status::Underdetermined) {
        throw Error(ErrorCode::IncompleteMarket, where + " has " + std::to_string(k) +
                                                     " financial successors but only " + std::to_string(sol.rank) +
                                                     " independent pricing equations");
      }
      if (sol.status == LinearSolution::Status::Inconsistent) {
        throw Error(ErrorCode::Arbitrage, where + ": martingale equations have no solution");
      }
      for (size_t c = 0; c < k; ++c) {
        if (sol.x[c].sign() <= 0) {
          throw Error(ErrorCode::Arbitrage, where + ": risk-neutral branch weight " + sol.x[c].str() + " is not positive");
        }
      }
      for (int leaf : blk) {
        auto pos = std::find(succ.begin(), succ.end(), next.block_of(leaf)) - succ.begin();
        q_leaf[static_cast<size_t>(leaf)] *= sol.x[static_cast<size_t>(pos)];
      }
    }
    current = next;
  }

  // dQ/dP relative to the base: Q(B | base) / P(B | base) on each terminal block B.
  const auto& p = tree.leaf_prob();
  std::vector<Real> base_mass(static_cast<size_t>(base.num_blocks()));
  for (int leaf = 0; leaf < n_leaves; ++leaf) base_mass[static_cast<size_t>(base.block_of(leaf))] += p[static_cast<size_t>(leaf)];
  std::vector<Real> fin_mass(static_cast<size_t>(current.num_blocks()));
  for (int leaf = 0; leaf < n_leaves; ++leaf) fin_mass[static_cast<size_t>(current.block_of(leaf))] += p[static_cast<size_t>(leaf)];

  RiskNeutral out;
  out.base = base;
  out.financial = current.with_time_tag(to);
  out.from = from;
  out.to = to;
  out.density.base = base;
  out.density.weight.resize(static_cast<size_t>(n_leaves));
  for (int leaf = 0; leaf < n_leaves; ++leaf) {
    Real p_cond = fin_mass[static_cast<size_t>(current.block_of(leaf))] / base_mass[static_cast<size_t>(base.block_of(leaf))];
    out.density.weight[static_cast<size_t>(leaf)] = q_leaf[static_cast<size_t>(leaf)] / p_cond;
  }
  return out;
}

Density risk_neutral_measure(const ScenarioTree& tree) {
  return risk_neutral(tree, tree.g_partition(), 0, tree.horizon()).density;
}

}  // namespace mcv
