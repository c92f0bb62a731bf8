#include "mcv/linear_algebra.hpp"

#include <cmath>
#include <stdexcept>

namespace mcv {

namespace {

bool negligible(const Real& v, double scale) {
  if (v.is_exact()) return v.is_zero();
  return std::fabs(v.to_double()) <= 1e-12 * std::max(1.0, scale);
}

}  // namespace

LinearSolution solve_linear(std::vector<std::vector<Real>> a, std::vector<Real> b) {
  const size_t rows = a.size();
  if (b.size() != rows) throw std::invalid_argument("solve_linear: dimension mismatch");
  const size_t cols = rows == 0 ? 0 : a.front().size();

  double scale = 0.0;
  for (const auto& row : a) {
    for (const auto& v : row) scale = std::max(scale, std::fabs(v.to_double()));
  }

  std::vector<size_t> pivot_col;
  size_t r = 0;
  for (size_t c = 0; c < cols && r < rows; ++c) {
    size_t best = rows;
    double best_mag = -1.0;
    for (size_t i = r; i < rows; ++i) {
      if (negligible(a[i][c], scale)) continue;
      double mag = std::fabs(a[i][c].to_double());
      if (a[i][c].is_exact()) {
        best = i;
        break;
      }
      if (mag > best_mag) {
        best_mag = mag;
        best = i;
      }
    }
    if (best == rows) continue;
    std::swap(a[r], a[best]);
    std::swap(b[r], b[best]);
    for (size_t i = 0; i < rows; ++i) {
      if (i == r || a[i][c].is_zero()) continue;
      Real f = a[i][c] / a[r][c];
      for (size_t k = c; k < cols; ++k) a[i][k] -= f * a[r][k];
      b[i] -= f * b[r];
    }
    pivot_col.push_back(c);
    ++r;
  }

  LinearSolution sol;
  sol.rank = static_cast<int>(r);
  for (size_t i = r; i < rows; ++i) {
    if (!negligible(b[i], scale)) {
      sol.status = LinearSolution::Status::Inconsistent;
      return sol;
    }
  }
  if (r < cols) {
    sol.status = LinearSolution::Status::Underdetermined;
    return sol;
  }
  sol.x.assign(cols, Real(0));
  for (size_t i = 0; i < r; ++i) sol.x[pivot_col[i]] = b[i] / a[i][pivot_col[i]];
  return sol;
}

}  // namespace mcv
