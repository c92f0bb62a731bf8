#pragma once

#include <compare>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>

#include <gmpxx.h>

namespace mcv {

/// Scalar used throughout the engine.
///
/// A Real is either an exact rational (GMP) or an IEEE double. Arithmetic
/// between two exact values stays exact; as soon as an inexact operand or a
/// transcendental operation is involved the result is a double. This lets
/// linear and quadratic valuations produce exact witnesses while square roots,
/// exponentials and logarithms degrade gracefully to floating point.
class Real {
 public:
  Real() : value_(mpq_class(0)) {}
  Real(int v) : value_(mpq_class(v)) {}                      // NOLINT
  Real(long v) : value_(mpq_class(v)) {}                     // NOLINT
  Real(long long v) : value_(mpq_class(static_cast<long>(v))) {}  // NOLINT
  explicit Real(mpq_class q);

  static Real inexact(double d) { return Real(Tag{}, d); }
  static Real fraction(long num, long den);
  /// Parses "3", "-1/4", "0.125", "2.5e-3" exactly. Anything that is not a
  /// finite decimal or fraction throws std::invalid_argument.
  static Real parse(std::string_view text);

  bool is_exact() const { return std::holds_alternative<mpq_class>(value_); }
  const mpq_class& rational() const;
  double to_double() const;
  int sign() const;
  bool is_zero() const { return sign() == 0; }

  /// Exact values print as "p" or "p/q"; doubles with 17 significant digits.
  std::string str() const;

  Real operator-() const;
  Real& operator+=(const Real& o);
  Real& operator-=(const Real& o);
  Real& operator*=(const Real& o);
  Real& operator/=(const Real& o);

  friend Real operator+(Real a, const Real& b) { return a += b; }
  friend Real operator-(Real a, const Real& b) { return a -= b; }
  friend Real operator*(Real a, const Real& b) { return a *= b; }
  friend Real operator/(Real a, const Real& b) { return a /= b; }

  friend bool operator==(const Real& a, const Real& b);
  friend std::partial_ordering operator<=>(const Real& a, const Real& b);

 private:
  struct Tag {};
  Real(Tag, double d) : value_(d) {}

  std::variant<mpq_class, double> value_;
};

std::ostream& operator<<(std::ostream& os, const Real& r);

Real abs(const Real& x);
Real max(const Real& a, const Real& b);
Real min(const Real& a, const Real& b);
/// Exact when x is the square of a rational.
Real sqrt(const Real& x);
/// Exact when x is the n-th power of a nonnegative rational.
Real root(const Real& x, int n);
Real pow(const Real& x, int n);
/// Integer exponents stay exact; other exponents go through std::pow.
Real pow(const Real& x, const Real& exponent);
Real exp(const Real& x);
Real log(const Real& x);

struct Tolerance {
  double rel = 1e-9;
  double abs = 1e-12;
};

/// Exact equality when both sides are exact, otherwise
/// |a-b| <= max(abs, rel * max(|a|,|b|)).
bool approx_equal(const Real& a, const Real& b, Tolerance tol = {});
bool approx_less_equal(const Real& a, const Real& b, Tolerance tol = {});

}  // namespace mcv
