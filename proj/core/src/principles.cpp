#include "mcv/principles.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "mcv/error.hpp"

namespace mcv {

namespace {

[[noreturn]] void bad_spec(const std::string& msg) { throw Error(ErrorCode::InvalidSpec, msg); }

struct BlockView {
  std::vector<int> leaves;
  std::vector<Real> weight;  // conditional probabilities, summing to one
};

BlockView block_view(const Partition& part, int b, const std::vector<Real>& prob) {
  BlockView v;
  v.leaves = part.block(b);
  Real mass;
  for (int leaf : v.leaves) mass += prob[static_cast<size_t>(leaf)];
  if (mass.sign() <= 0) throw Error(ErrorCode::ZeroBlockMass, "block " + std::to_string(b) + " has no mass");
  for (int leaf : v.leaves) v.weight.push_back(prob[static_cast<size_t>(leaf)] / mass);
  return v;
}

Real mean(const BlockView& v, const Payoff& h) {
  Real acc;
  for (size_t i = 0; i < v.leaves.size(); ++i) acc += v.weight[i] * h[v.leaves[i]];
  return acc;
}

Real variance(const BlockView& v, const Payoff& h, const Real& m) {
  Real acc;
  for (size_t i = 0; i < v.leaves.size(); ++i) {
    Real d = h[v.leaves[i]] - m;
    acc += v.weight[i] * d * d;
  }
  return acc;
}

Real block_avar(const BlockView& v, const Payoff& h, const Real& level) {
  std::vector<size_t> order(v.leaves.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return h[v.leaves[a]] > h[v.leaves[b]]; });
  Real remaining = level;
  Real acc;
  for (size_t i : order) {
    if (remaining.sign() <= 0) break;
    Real take = min(v.weight[i], remaining);
    acc += take * h[v.leaves[i]];
    remaining -= take;
  }
  return acc / level;
}

Real block_semi(const BlockView& v, const Payoff& h, const Real& m, const Real& q) {
  Real acc;
  for (size_t i = 0; i < v.leaves.size(); ++i) {
    Real d = h[v.leaves[i]] - m;
    if (d.sign() > 0) acc += v.weight[i] * pow(d, q);
  }
  if (acc.is_zero()) return Real(0);
  return pow(acc, Real(1) / q);
}

Real block_exponential(const BlockView& v, const Payoff& h, const Real& gamma) {
  Real top = h[v.leaves.front()];
  Real bottom = top;
  for (int leaf : v.leaves) {
    top = max(top, h[leaf]);
    bottom = min(bottom, h[leaf]);
  }
  if (top == bottom) return top;
  Real acc;
  for (size_t i = 0; i < v.leaves.size(); ++i) acc += v.weight[i] * exp((h[v.leaves[i]] - top) / gamma);
  return top + gamma * log(acc);
}

void check_sizes(const Payoff& h, const Partition& part, const std::vector<Real>& prob) {
  if (h.size() != part.num_leaves() || static_cast<int>(prob.size()) != part.num_leaves()) {
    throw Error(ErrorCode::NotMeasurable, "payoff, partition and measure disagree on the number of leaves");
  }
}

}  // namespace

PrincipleSpec PrincipleSpec::mean_variance(Real alpha) {
  PrincipleSpec s;
  s.kind = Kind::MeanVariance;
  s.alpha = std::move(alpha);
  return s;
}

PrincipleSpec PrincipleSpec::std_dev(Real beta) {
  PrincipleSpec s;
  s.kind = Kind::StdDev;
  s.beta = std::move(beta);
  return s;
}

PrincipleSpec PrincipleSpec::semi_deviation(Real lambda, Real q) {
  PrincipleSpec s;
  s.kind = Kind::SemiDeviation;
  s.lambda = std::move(lambda);
  s.q = std::move(q);
  return s;
}

PrincipleSpec PrincipleSpec::avar(Real delta, Real level) {
  PrincipleSpec s;
  s.kind = Kind::AVaR;
  s.delta = std::move(delta);
  s.level = std::move(level);
  return s;
}

PrincipleSpec PrincipleSpec::exponential(Real gamma) {
  PrincipleSpec s;
  s.kind = Kind::Exponential;
  s.gamma = std::move(gamma);
  return s;
}

PrincipleSpec PrincipleSpec::parse(std::string_view text) {
  std::string s(text);
  std::string head = s.substr(0, s.find(':'));
  std::string rest = s.find(':') == std::string::npos ? "" : s.substr(s.find(':') + 1);

  std::map<std::string, Real> params;
  size_t pos = 0;
  while (pos < rest.size()) {
    size_t comma = rest.find(',', pos);
    std::string item = rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    pos = comma == std::string::npos ? rest.size() : comma + 1;
    if (item.empty()) continue;
    size_t eq = item.find('=');
    if (eq == std::string::npos) bad_spec("expected key=value in '" + item + "'");
    try {
      params[item.substr(0, eq)] = Real::parse(item.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      bad_spec("bad value for '" + item.substr(0, eq) + "': " + e.what());
    }
  }

  PrincipleSpec spec;
  std::vector<std::string> allowed;
  if (head == "e" || head == "expectation") {
    spec.kind = Kind::Expectation;
  } else if (head == "mv" || head == "mean-variance") {
    spec.kind = Kind::MeanVariance;
    allowed = {"alpha"};
  } else if (head == "sd" || head == "stddev") {
    spec.kind = Kind::StdDev;
    allowed = {"beta"};
  } else if (head == "semi" || head == "semi-deviation") {
    spec.kind = Kind::SemiDeviation;
    allowed = {"lambda", "q"};
  } else if (head == "avar") {
    spec.kind = Kind::AVaR;
    allowed = {"delta", "level"};
  } else if (head == "exp" || head == "exponential") {
    spec.kind = Kind::Exponential;
    allowed = {"gamma"};
  } else {
    bad_spec("unknown principle '" + head + "'");
  }
  for (const auto& [key, value] : params) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      bad_spec("parameter '" + key + "' does not apply to '" + head + "'");
    }
    if (key == "alpha") spec.alpha = value;
    if (key == "beta") spec.beta = value;
    if (key == "lambda") spec.lambda = value;
    if (key == "q") spec.q = value;
    if (key == "delta") spec.delta = value;
    if (key == "level") spec.level = value;
    if (key == "gamma") spec.gamma = value;
  }
  spec.validate();
  return spec;
}

std::string PrincipleSpec::str() const {
  switch (kind) {
    case Kind::Expectation:
      return "e";
    case Kind::MeanVariance:
      return "mv:alpha=" + alpha.str();
    case Kind::StdDev:
      return "sd:beta=" + beta.str();
    case Kind::SemiDeviation:
      return "semi:lambda=" + lambda.str() + ",q=" + q.str();
    case Kind::AVaR:
      return "avar:delta=" + delta.str() + ",level=" + level.str();
    case Kind::Exponential:
      return "exp:gamma=" + gamma.str();
  }
  return "?";
}

void PrincipleSpec::validate() const {
  switch (kind) {
    case Kind::Expectation:
      return;
    case Kind::MeanVariance:
      if (alpha.sign() < 0) bad_spec("alpha must be nonnegative");
      return;
    case Kind::StdDev:
      if (beta.sign() < 0) bad_spec("beta must be nonnegative");
      return;
    case Kind::SemiDeviation:
      if (lambda.sign() < 0) bad_spec("lambda must be nonnegative");
      if (q < Real(1)) bad_spec("q must be at least 1");
      return;
    case Kind::AVaR:
      if (delta.sign() < 0) bad_spec("delta must be nonnegative");
      if (level.sign() <= 0 || level > Real(1)) throw Error(ErrorCode::InvalidLevel, "AV@R level must lie in (0, 1]");
      return;
    case Kind::Exponential:
      if (gamma.sign() <= 0) bad_spec("gamma must be positive");
      return;
  }
}

bool PrincipleSpec::is_exact_kind() const {
  switch (kind) {
    case Kind::Expectation:
    case Kind::MeanVariance:
    case Kind::AVaR:
      return true;
    case Kind::SemiDeviation:
      return q == Real(1);
    case Kind::StdDev:
    case Kind::Exponential:
      return false;
  }
  return false;
}

bool PrincipleSpec::is_positively_homogeneous() const {
  return kind == Kind::Expectation || kind == Kind::StdDev || kind == Kind::SemiDeviation || kind == Kind::AVaR ||
         (kind == Kind::MeanVariance && alpha.is_zero());
}

bool PrincipleSpec::is_known_monotone() const {
  switch (kind) {
    case Kind::Expectation:
    case Kind::Exponential:
      return true;
    case Kind::MeanVariance:
      return alpha.is_zero();
    case Kind::StdDev:
      return beta.is_zero();
    case Kind::SemiDeviation:
      return lambda <= Real(1);
    case Kind::AVaR:
      return delta <= Real(1);
  }
  return false;
}

ConditionalValue evaluate(const PrincipleSpec& spec, const Payoff& h, const Partition& part,
                          const std::vector<Real>& prob) {
  spec.validate();
  check_sizes(h, part, prob);
  ConditionalValue out{part, std::vector<Real>(static_cast<size_t>(part.num_blocks()))};
  for (int b = 0; b < part.num_blocks(); ++b) {
    BlockView v = block_view(part, b, prob);
    Real m = mean(v, h);
    Real value;
    switch (spec.kind) {
      case PrincipleSpec::Kind::Expectation:
        value = m;
        break;
      case PrincipleSpec::Kind::MeanVariance:
        value = m + spec.alpha / Real(2) * variance(v, h, m);
        break;
      case PrincipleSpec::Kind::StdDev:
        value = m + spec.beta * sqrt(variance(v, h, m));
        break;
      case PrincipleSpec::Kind::SemiDeviation:
        value = m + spec.lambda * block_semi(v, h, m, spec.q);
        break;
      case PrincipleSpec::Kind::AVaR:
        value = m + spec.delta * (block_avar(v, h, spec.level) - m);
        break;
      case PrincipleSpec::Kind::Exponential:
        value = block_exponential(v, h, spec.gamma);
        break;
    }
    out.values[static_cast<size_t>(b)] = std::move(value);
  }
  return out;
}

ConditionalValue evaluate(const PrincipleSpec& spec, const Payoff& h, const Partition& part,
                          const ScenarioTree& tree) {
  return evaluate(spec, h, part, tree.leaf_prob());
}

ConditionalValue avar(const Payoff& h, const Partition& part, const std::vector<Real>& prob, const Real& level) {
  if (level.sign() <= 0 || level > Real(1)) throw Error(ErrorCode::InvalidLevel, "AV@R level must lie in (0, 1]");
  check_sizes(h, part, prob);
  ConditionalValue out{part, std::vector<Real>(static_cast<size_t>(part.num_blocks()))};
  for (int b = 0; b < part.num_blocks(); ++b) out.values[static_cast<size_t>(b)] = block_avar(block_view(part, b, prob), h, level);
  return out;
}

ConditionalValue value_at_risk(const Payoff& h, const Partition& part, const std::vector<Real>& prob,
                               const Real& level) {
  if (level.sign() <= 0 || level > Real(1)) throw Error(ErrorCode::InvalidLevel, "V@R level must lie in (0, 1]");
  check_sizes(h, part, prob);
  ConditionalValue out{part, std::vector<Real>(static_cast<size_t>(part.num_blocks()))};
  for (int b = 0; b < part.num_blocks(); ++b) {
    BlockView v = block_view(part, b, prob);
    std::vector<size_t> order(v.leaves.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](size_t x, size_t y) { return h[v.leaves[x]] < h[v.leaves[y]]; });
    // Smallest x whose exceedance probability is at most `level`.
    Real exceed(1);
    Real result = h[v.leaves[order.back()]];
    for (size_t k = 0; k < order.size(); ++k) {
      exceed -= v.weight[order[k]];
      bool last_of_value = k + 1 == order.size() || h[v.leaves[order[k + 1]]] != h[v.leaves[order[k]]];
      if (last_of_value && exceed <= level) {
        result = h[v.leaves[order[k]]];
        break;
      }
    }
    out.values[static_cast<size_t>(b)] = result;
  }
  return out;
}

ConditionalValue local_glue(const std::vector<std::pair<Event, ConditionalValue>>& pieces) {
  if (pieces.empty()) throw Error(ErrorCode::NotMeasurable, "nothing to glue");
  const Partition& part = pieces.front().second.partition;
  const int n = part.num_leaves();
  std::vector<int> owner(static_cast<size_t>(n), -1);
  for (size_t k = 0; k < pieces.size(); ++k) {
    const auto& [event, value] = pieces[k];
    if (!(value.partition == part)) throw Error(ErrorCode::NotMeasurable, "glued values live on different partitions");
    if (static_cast<int>(event.size()) != n || !part.is_measurable(event)) {
      throw Error(ErrorCode::NotMeasurable, "event " + std::to_string(k) + " is not a union of blocks");
    }
    for (int leaf = 0; leaf < n; ++leaf) {
      if (!event[static_cast<size_t>(leaf)]) continue;
      if (owner[static_cast<size_t>(leaf)] != -1) throw Error(ErrorCode::NotMeasurable, "glue events overlap");
      owner[static_cast<size_t>(leaf)] = static_cast<int>(k);
    }
  }
  ConditionalValue out{part, std::vector<Real>(static_cast<size_t>(part.num_blocks()))};
  for (int b = 0; b < part.num_blocks(); ++b) {
    int k = owner[static_cast<size_t>(part.block(b).front())];
    if (k < 0) throw Error(ErrorCode::NotMeasurable, "glue events do not cover every leaf");
    out.values[static_cast<size_t>(b)] = pieces[static_cast<size_t>(k)].second.values[static_cast<size_t>(b)];
  }
  return out;
}

EvaluationOracle principle_oracle(const PrincipleSpec& spec, const ScenarioTree& tree, const Partition& part) {
  spec.validate();
  return [spec, part, prob = tree.leaf_prob()](const Payoff& h) { return evaluate(spec, h, part, prob); };
}

}  // namespace mcv
