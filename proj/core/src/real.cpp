#include "mcv/real.hpp"

#include <cctype>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mcv {

Real::Real(mpq_class q) : value_(std::move(q)) {
  std::get<mpq_class>(value_).canonicalize();
}

Real Real::fraction(long num, long den) {
  if (den == 0) throw std::invalid_argument("Real::fraction: zero denominator");
  mpq_class q(num, den);
  return Real(std::move(q));
}

Real Real::parse(std::string_view text) {
  std::string s(text);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  size_t start = 0;
  while (start < s.size() && std::isspace(static_cast<unsigned char>(s[start]))) ++start;
  s = s.substr(start);
  if (s.empty()) throw std::invalid_argument("empty number");

  if (auto slash = s.find('/'); slash != std::string::npos) {
    Real num = parse(s.substr(0, slash));
    Real den = parse(s.substr(slash + 1));
    if (den.is_zero()) throw std::invalid_argument("zero denominator in '" + s + "'");
    return num / den;
  }

  size_t i = 0;
  bool negative = false;
  if (s[i] == '+' || s[i] == '-') {
    negative = s[i] == '-';
    ++i;
  }
  std::string digits;
  long scale = 0;
  bool seen_point = false;
  bool any_digit = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      any_digit = true;
      if (seen_point) ++scale;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!any_digit) throw std::invalid_argument("not a number: '" + s + "'");
  long exponent = 0;
  if (i < s.size()) {
    if (s[i] != 'e' && s[i] != 'E') throw std::invalid_argument("not a number: '" + s + "'");
    ++i;
    size_t used = 0;
    try {
      exponent = std::stol(s.substr(i), &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad exponent in '" + s + "'");
    }
    if (i + used != s.size()) throw std::invalid_argument("not a number: '" + s + "'");
  }
  mpz_class mantissa(digits, 10);
  if (negative) mantissa = -mantissa;
  long net = exponent - scale;
  mpz_class pow10;
  mpz_ui_pow_ui(pow10.get_mpz_t(), 10, static_cast<unsigned long>(net < 0 ? -net : net));
  mpq_class q = net < 0 ? mpq_class(mantissa, pow10) : mpq_class(mantissa * pow10);
  return Real(std::move(q));
}

const mpq_class& Real::rational() const {
  if (!is_exact()) throw std::logic_error("Real::rational on inexact value");
  return std::get<mpq_class>(value_);
}

double Real::to_double() const {
  if (is_exact()) return std::get<mpq_class>(value_).get_d();
  return std::get<double>(value_);
}

int Real::sign() const {
  if (is_exact()) return sgn(std::get<mpq_class>(value_));
  double d = std::get<double>(value_);
  return (d > 0) - (d < 0);
}

std::string Real::str() const {
  if (is_exact()) return std::get<mpq_class>(value_).get_str();
  std::ostringstream os;
  os << std::setprecision(17) << std::get<double>(value_);
  return os.str();
}

Real Real::operator-() const {
  if (is_exact()) return Real(mpq_class(-std::get<mpq_class>(value_)));
  return inexact(-std::get<double>(value_));
}

Real& Real::operator+=(const Real& o) {
  if (is_exact() && o.is_exact()) {
    std::get<mpq_class>(value_) += std::get<mpq_class>(o.value_);
  } else {
    value_ = to_double() + o.to_double();
  }
  return *this;
}

Real& Real::operator-=(const Real& o) {
  if (is_exact() && o.is_exact()) {
    std::get<mpq_class>(value_) -= std::get<mpq_class>(o.value_);
  } else {
    value_ = to_double() - o.to_double();
  }
  return *this;
}

Real& Real::operator*=(const Real& o) {
  if (is_exact() && o.is_exact()) {
    std::get<mpq_class>(value_) *= std::get<mpq_class>(o.value_);
  } else {
    value_ = to_double() * o.to_double();
  }
  return *this;
}

Real& Real::operator/=(const Real& o) {
  if (o.is_zero()) throw std::domain_error("Real: division by zero");
  if (is_exact() && o.is_exact()) {
    std::get<mpq_class>(value_) /= std::get<mpq_class>(o.value_);
  } else {
    value_ = to_double() / o.to_double();
  }
  return *this;
}

bool operator==(const Real& a, const Real& b) {
  if (a.is_exact() && b.is_exact()) return a.rational() == b.rational();
  return a.to_double() == b.to_double();
}

std::partial_ordering operator<=>(const Real& a, const Real& b) {
  if (a.is_exact() && b.is_exact()) {
    int c = cmp(a.rational(), b.rational());
    return c < 0 ? std::partial_ordering::less
                 : (c > 0 ? std::partial_ordering::greater : std::partial_ordering::equivalent);
  }
  return a.to_double() <=> b.to_double();
}

std::ostream& operator<<(std::ostream& os, const Real& r) { return os << r.str(); }

Real abs(const Real& x) { return x.sign() < 0 ? -x : x; }
Real max(const Real& a, const Real& b) { return a < b ? b : a; }
Real min(const Real& a, const Real& b) { return b < a ? b : a; }

namespace {

bool exact_root(const mpz_class& v, int n, mpz_class& out) {
  if (v < 0) return false;
  return mpz_root(out.get_mpz_t(), v.get_mpz_t(), static_cast<unsigned long>(n)) != 0;
}

}  // namespace

Real root(const Real& x, int n) {
  if (n <= 0) throw std::invalid_argument("root: degree must be positive");
  if (x.sign() < 0) throw std::domain_error("root of negative number");
  if (n == 1) return x;
  if (x.is_exact()) {
    mpz_class num, den;
    if (exact_root(x.rational().get_num(), n, num) && exact_root(x.rational().get_den(), n, den)) {
      return Real(mpq_class(num, den));
    }
  }
  return Real::inexact(std::pow(x.to_double(), 1.0 / n));
}

Real sqrt(const Real& x) { return root(x, 2); }

Real pow(const Real& x, int n) {
  if (n < 0) return Real(1) / pow(x, -n);
  Real result(1);
  Real base = x;
  while (n > 0) {
    if (n & 1) result *= base;
    n >>= 1;
    if (n > 0) base *= base;
  }
  return result;
}

Real pow(const Real& x, const Real& exponent) {
  if (exponent.is_exact() && exponent.rational().get_den() == 1 && exponent.rational().get_num().fits_sint_p()) {
    return pow(x, static_cast<int>(exponent.rational().get_num().get_si()));
  }
  if (exponent.is_exact() && exponent.rational().get_num() == 1 &&
      exponent.rational().get_den().fits_sint_p()) {
    return root(x, static_cast<int>(exponent.rational().get_den().get_si()));
  }
  return Real::inexact(std::pow(x.to_double(), exponent.to_double()));
}

Real exp(const Real& x) {
  if (x.is_zero()) return Real(1);
  return Real::inexact(std::exp(x.to_double()));
}

Real log(const Real& x) {
  if (x.sign() <= 0) throw std::domain_error("log of nonpositive number");
  if (x.is_exact() && x.rational() == 1) return Real(0);
  return Real::inexact(std::log(x.to_double()));
}

bool approx_equal(const Real& a, const Real& b, Tolerance tol) {
  if (a.is_exact() && b.is_exact()) return a == b;
  double x = a.to_double();
  double y = b.to_double();
  if (!std::isfinite(x) || !std::isfinite(y)) return x == y;
  double scale = std::max(std::fabs(x), std::fabs(y));
  return std::fabs(x - y) <= std::max(tol.abs, tol.rel * scale);
}

bool approx_less_equal(const Real& a, const Real& b, Tolerance tol) {
  if (a.is_exact() && b.is_exact()) return a <= b;
  return a.to_double() <= b.to_double() || approx_equal(a, b, tol);
}

}  // namespace mcv
