#pragma once

#include <vector>

#include "mcv/real.hpp"

namespace mcv {

struct LinearSolution {
  enum class Status { Unique, Underdetermined, Inconsistent };
  Status status = Status::Unique;
  std::vector<Real> x;
  int rank = 0;
};

/// Gaussian elimination for A x = b (A is rows x cols). Exact when every
/// entry is exact; otherwise pivots below 1e-12 (relative) count as zero.
LinearSolution solve_linear(std::vector<std::vector<Real>> a, std::vector<Real> b);

}  // namespace mcv
