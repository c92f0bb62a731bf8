#include "mcv/random_variable.hpp"

#include <algorithm>
#include <stdexcept>

#include "mcv/error.hpp"

namespace mcv {

Event event_of_blocks(const Partition& part, const std::vector<int>& block_ids) {
  Event e(static_cast<size_t>(part.num_leaves()), false);
  for (int b : block_ids) {
    for (int leaf : part.block(b)) e[static_cast<size_t>(leaf)] = true;
  }
  return e;
}

Event complement(const Event& e) {
  Event c(e.size());
  for (size_t i = 0; i < e.size(); ++i) c[i] = !e[i];
  return c;
}

Payoff Payoff::constant(int num_leaves, const Real& c) {
  return Payoff(std::vector<Real>(static_cast<size_t>(num_leaves), c));
}

Payoff Payoff::indicator(const Event& event) {
  std::vector<Real> v(event.size());
  for (size_t i = 0; i < event.size(); ++i) v[i] = event[i] ? Real(1) : Real(0);
  return Payoff(std::move(v));
}

Payoff Payoff::masked(const Event& event) const {
  if (event.size() != values_.size()) throw std::invalid_argument("Payoff::masked: size mismatch");
  Payoff out(values_);
  for (size_t i = 0; i < values_.size(); ++i) {
    if (!event[i]) out.values_[i] = Real(0);
  }
  return out;
}

bool Payoff::is_exact() const {
  return std::all_of(values_.begin(), values_.end(), [](const Real& r) { return r.is_exact(); });
}

bool Payoff::is_nonnegative() const {
  return std::all_of(values_.begin(), values_.end(), [](const Real& r) { return r.sign() >= 0; });
}

std::string Payoff::str() const {
  std::string s;
  for (size_t i = 0; i < values_.size(); ++i) {
    if (i) s += ' ';
    s += values_[i].str();
  }
  return s;
}

Payoff& Payoff::operator+=(const Payoff& o) {
  if (o.size() != size()) throw std::invalid_argument("Payoff: size mismatch");
  for (size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

Payoff& Payoff::operator-=(const Payoff& o) {
  if (o.size() != size()) throw std::invalid_argument("Payoff: size mismatch");
  for (size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

Payoff& Payoff::operator*=(const Real& c) {
  for (auto& v : values_) v *= c;
  return *this;
}

Payoff product(const Payoff& a, const Payoff& b) {
  if (a.size() != b.size()) throw std::invalid_argument("product: size mismatch");
  std::vector<Real> v(static_cast<size_t>(a.size()));
  for (int i = 0; i < a.size(); ++i) v[static_cast<size_t>(i)] = a[i] * b[i];
  return Payoff(std::move(v));
}

Payoff ConditionalValue::lift() const {
  std::vector<Real> v(static_cast<size_t>(partition.num_leaves()));
  for (int leaf = 0; leaf < partition.num_leaves(); ++leaf) v[static_cast<size_t>(leaf)] = at_leaf(leaf);
  return Payoff(std::move(v));
}

bool ConditionalValue::is_exact() const {
  return std::all_of(values.begin(), values.end(), [](const Real& r) { return r.is_exact(); });
}

namespace {

void require_same_partition(const ConditionalValue& a, const ConditionalValue& b) {
  if (!(a.partition == b.partition)) {
    throw Error(ErrorCode::NotMeasurable, "conditional values live on different partitions");
  }
}

}  // namespace

ConditionalValue operator+(const ConditionalValue& a, const ConditionalValue& b) {
  require_same_partition(a, b);
  ConditionalValue out = a;
  for (size_t i = 0; i < out.values.size(); ++i) out.values[i] += b.values[i];
  return out;
}

ConditionalValue operator-(const ConditionalValue& a, const ConditionalValue& b) {
  require_same_partition(a, b);
  ConditionalValue out = a;
  for (size_t i = 0; i < out.values.size(); ++i) out.values[i] -= b.values[i];
  return out;
}

bool approx_equal(const ConditionalValue& a, const ConditionalValue& b, Tolerance tol) {
  require_same_partition(a, b);
  for (size_t i = 0; i < a.values.size(); ++i) {
    if (!approx_equal(a.values[i], b.values[i], tol)) return false;
  }
  return true;
}

bool approx_less_equal(const ConditionalValue& a, const ConditionalValue& b, Tolerance tol) {
  require_same_partition(a, b);
  for (size_t i = 0; i < a.values.size(); ++i) {
    if (!approx_less_equal(a.values[i], b.values[i], tol)) return false;
  }
  return true;
}

Density Density::unit(const Partition& base) {
  return Density{std::vector<Real>(static_cast<size_t>(base.num_leaves()), Real(1)), base};
}

bool Density::is_nonnegative() const {
  return std::all_of(weight.begin(), weight.end(), [](const Real& r) { return r.sign() >= 0; });
}

}  // namespace mcv
