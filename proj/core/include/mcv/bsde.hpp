#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mcv/dynamic.hpp"
#include "mcv/principles.hpp"
#include "mcv/scenario_tree.hpp"

namespace mcv {

struct JumpMark {
  Real x;   ///< jump size added to the insurance process
  Real nu;  ///< intensity of the mark
};

/// Discretised hybrid model: one traded stock driven by a financial Brownian
/// motion, an insurance process driven by independent Brownian motions and
/// finitely many jump marks.
struct GridModel {
  int steps = 2;
  Real h = Real::fraction(1, 4);
  Real s0{1};
  Real mu;
  Real sigma{1};
  Real r;
  int insurance_brownians = 1;
  std::vector<JumpMark> marks;
  Real y0;

  /// Throws Error(InvalidParam).
  void validate() const;
  /// Market price of risk: Delta W^f - theta h is a martingale increment
  /// under the one-step pricing measure, so theta = (r - mu) / sigma.
  Real theta() const;
  Real sqrt_h() const { return sqrt(h); }
};

/// Realised increments on the edge into a node.
struct GridIncrement {
  Real dwf;
  std::vector<Real> dw;
  std::vector<int> jumps;  ///< jump count per mark: 0, 1 or 2
};

/// Tree encoding of a grid model. Each step branches on Delta W^f = +-sqrt(h),
/// each Delta W_k = +-sqrt(h), and per mark on a jump count in {0, 1, 2} with
/// probabilities 1 - m + m^2/2, m - m^2, m^2/2 (m = nu h), which matches the
/// Poisson mean and variance nu h exactly.
struct GridTree {
  GridModel model;
  ScenarioTree tree;
  std::vector<GridIncrement> increments;  ///< by node id; the root entry is empty

  /// Key identifying the insurance increments along the path of `leaf`.
  std::string insurance_path(int leaf) const;
  /// Stock at the horizon and insurance at the horizon, by leaf.
  Payoff terminal_stock() const;
  Payoff terminal_insurance() const;
};

GridTree build_grid_tree(const GridModel& model);

/// Driver g(t, z^f, z, ztilde).
struct DriverFn {
  std::string label;
  std::function<Real(int t, const Real& zf, const std::vector<Real>& z, const std::vector<Real>& ztilde)> eval;
};

/// theta z^f + (alpha / 2) (|z|^2 + sum ztilde(x)^2 nu(x)).
DriverFn driver_mv(const Real& alpha, const GridModel& model);
/// theta z^f + |z|^2 / (2 gamma) + gamma sum [exp(ztilde / gamma) - ztilde / gamma - 1] nu(x).
DriverFn driver_exp(const Real& gamma, const GridModel& model);

struct DriverCheckReport {
  bool passed = true;
  long samples = 0;
  std::uint64_t seed = 0;
  std::string witness;
};

/// Samples (t, z, ztilde) and pairs z^f_1 != z^f_2, and checks that
/// g - theta z^f does not depend on z^f (relative tolerance 1e-9).
DriverCheckReport driver_mc_check(const DriverFn& g, const GridModel& model, long samples, std::uint64_t seed);

/// One tabulated driver evaluation.
struct DriverSample {
  int t = 0;
  Real zf;
  std::vector<Real> z;
  std::vector<Real> ztilde;
  Real g;
};

/// The same criterion on a table: rows sharing (t, z, ztilde) must agree on g - theta z^f.
DriverCheckReport driver_table_check(const std::vector<DriverSample>& rows, const GridModel& model);

/// Projection of one backward step at a node.
struct BsdeStep {
  int node = 0;
  int time = 0;
  Real y;                   ///< Pi at the node
  Real zf;
  std::vector<Real> z;
  std::vector<Real> ztilde;
  Real q_drift;             ///< E_Q[Delta Pi]
  Real p_drift;             ///< E_P[Delta Pi]
  Real lvar;                ///< E_Q[(Delta L - E_{F^S}[Delta L])^2]
  std::vector<int> children;
  std::vector<Real> delta_pi;  ///< per child
  std::vector<Real> delta_l;   ///< per child
  std::vector<Real> p_child;   ///< P(child | node)
  std::vector<Real> q_child;   ///< Q(child | node)
};

struct BsdeSolution {
  std::vector<ConditionalValue> y;  ///< Pi_t on F_t, t = 0..steps
  std::vector<BsdeStep> steps;      ///< one per non-leaf node, in node order
};

/// Runs the backward recursion with the per-step two-step principle and
/// extracts integrands by projecting Delta Pi on the centred increments
/// (Delta W^f - theta h, Delta W, N - nu h) under the one-step pricing
/// measure; the remainder is the orthogonal residual. Throws
/// Error(SingularProjection) when the increment covariance is degenerate.
BsdeSolution solve_discrete(const PrincipleSpec& per_step, const Payoff& h, const GridTree& grid);

struct BsdeCheckReport {
  bool passed = true;
  long nodes = 0;
  std::string witness;
};

/// Pi_j = Pi_{j+1} + drift - Z^f dW^f - Z dW - Ztilde dN~ - dL at every child,
/// with drift = [theta Z^f + (alpha/2)(|Z|^2 + sum Ztilde^2 nu)] h + (alpha/2) lvar.
BsdeCheckReport reconstruction_check(const BsdeSolution& sol, const GridTree& grid, const Real& alpha);
/// E_P[Delta Pi] = -[theta Z^f + (alpha/2)(|Z|^2 + sum Ztilde^2 nu)] h - (alpha/2) lvar.
BsdeCheckReport drift_identity_check(const BsdeSolution& sol, const GridTree& grid, const Real& alpha);
/// E_Q[Delta L] = 0 and E_Q[Delta L x] = 0 for every centred increment x.
BsdeCheckReport orthogonality_check(const BsdeSolution& sol, const GridTree& grid);
/// The non-financial increments have the same one-step law under Q and P.
BsdeCheckReport law_check(const BsdeSolution& sol, const GridTree& grid);

struct ExpTowerReport {
  Real recursive;
  Real one_shot;
  bool passed = false;
};

/// Recursive exponential two-step evaluation at time 0 against the one-shot
/// gamma log E[exp(H / gamma)]. Throws Error(NotPureInsurance) unless H is a
/// function of the insurance increments alone.
ExpTowerReport exp_tower_check(const Real& gamma, const Payoff& h, const GridTree& grid);

struct TrendRow {
  Real h;
  int steps = 0;
  int leaves = 0;
  Real y0;
};

/// Pi_0 of `payoff(S_T, Y_T)` under per-step mean-variance for each step size;
/// a report only, no limit is asserted.
std::vector<TrendRow> trend_report(const GridModel& base, const Real& horizon, const std::vector<Real>& step_sizes,
                                   const Real& alpha, const std::function<Real(const Real&, const Real&)>& payoff);

}  // namespace mcv
