#pragma once

#include <string>
#include <vector>

#include "mcv/partition.hpp"
#include "mcv/real.hpp"

namespace mcv {

/// Indicator of a set of leaves.
using Event = std::vector<bool>;

Event event_of_blocks(const Partition& part, const std::vector<int>& block_ids);
Event complement(const Event& e);

/// Discounted net loss at maturity, one value per leaf. Larger is worse.
class Payoff {
 public:
  Payoff() = default;
  explicit Payoff(std::vector<Real> values) : values_(std::move(values)) {}
  static Payoff constant(int num_leaves, const Real& c);
  static Payoff indicator(const Event& event);

  int size() const { return static_cast<int>(values_.size()); }
  const Real& operator[](int leaf) const { return values_[static_cast<size_t>(leaf)]; }
  Real& operator[](int leaf) { return values_[static_cast<size_t>(leaf)]; }
  const std::vector<Real>& values() const { return values_; }

  /// I_A * H.
  Payoff masked(const Event& event) const;
  bool is_exact() const;
  bool is_nonnegative() const;
  std::string str() const;

  Payoff& operator+=(const Payoff& o);
  Payoff& operator-=(const Payoff& o);
  Payoff& operator*=(const Real& c);
  friend Payoff operator+(Payoff a, const Payoff& b) { return a += b; }
  friend Payoff operator-(Payoff a, const Payoff& b) { return a -= b; }
  friend Payoff operator*(const Real& c, Payoff a) { return a *= c; }
  friend bool operator==(const Payoff& a, const Payoff& b) { return a.values_ == b.values_; }

 private:
  std::vector<Real> values_;
};

/// Pointwise product.
Payoff product(const Payoff& a, const Payoff& b);

/// A random variable measurable with respect to `partition`: one value per block.
struct ConditionalValue {
  Partition partition;
  std::vector<Real> values;

  const Real& at_leaf(int leaf) const { return values[static_cast<size_t>(partition.block_of(leaf))]; }
  /// The same random variable viewed leafwise.
  Payoff lift() const;
  bool is_exact() const;
};

ConditionalValue operator+(const ConditionalValue& a, const ConditionalValue& b);
ConditionalValue operator-(const ConditionalValue& a, const ConditionalValue& b);

/// Blockwise comparison of two conditional values on the same partition.
bool approx_equal(const ConditionalValue& a, const ConditionalValue& b, Tolerance tol = {});
bool approx_less_equal(const ConditionalValue& a, const ConditionalValue& b, Tolerance tol = {});

/// Leafwise weight with conditional mean one on every block of `base`
/// (membership in Q_G; nonnegative weights give Q^+_G).
struct Density {
  std::vector<Real> weight;
  Partition base;

  static Density unit(const Partition& base);
  bool is_nonnegative() const;
};

}  // namespace mcv
