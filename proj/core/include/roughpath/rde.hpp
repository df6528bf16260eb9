#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "roughpath/coefficient.hpp"
#include "roughpath/path.hpp"

namespace roughpath {

struct SolverConfig {
  /// Variation exponent; 0 selects level + 0.5.
  double p = 0.0;
  /// Damping rate: a piece whose Picard differences shrink slower than
  /// 1/beta per iteration (after the second) is bisected.
  double beta = 2.0;
  /// Convergence threshold on the xi-gauge of the difference block.
  double tol = 1e-12;
  int max_iters = 60;
  /// Target for rho^p omega(T_{i-1}, T_i) on each piece.
  double step_budget = 1.0;
  /// rho; 0 selects max(1, M(f; L+1, R)) from sampling.
  double rho = 0.0;
  /// Radius R for the sampled sup norm; 0 selects 1 + |y0|_1.
  double radius = 0.0;
  int max_bisections = 12;
  /// Added to every entry of f(0) in the initial iterate K(1); only used
  /// to check that the fixed point does not depend on the starting guess.
  double guess_offset = 0.0;
};

struct PieceReport {
  std::size_t first = 0;
  std::size_t last = 0;
  double budget = 0.0;  // rho^p omega over the piece
  int iterations = 0;
  std::vector<double> residuals;  // xi-gauge of the difference block per iteration
};

struct RdeSolution {
  /// Rough path over V + W; its V block is the driver.
  GridRoughPath z;
  std::vector<double> y0;
  int iterations = 0;     // total Picard iterations
  double residual = 0.0;  // largest final residual over the pieces
  double p = 0.0;
  double rho = 0.0;
  std::vector<PieceReport> pieces;

  int drive_dim() const { return z.dim() - static_cast<int>(y0.size()); }
  /// Absolute state values y0 + Z^W_{0,t_i}, row-major points x W.
  std::vector<double> states() const;
  std::vector<double> state(std::size_t i) const;
};

/// Solves dY = f(Y) dX, Y_0 = y0, by Picard iteration on the triple system
/// (X, Y(n), Y(n) - Y(n-1)) piece by piece. f: W -> L(V, W).
RdeSolution solve(const CoefficientPtr& f, const GridRoughPath& x, std::span<const double> y0,
                  const SolverConfig& cfg = {});

/// rough distance between Z and int F(Z) dZ for the converged solution.
double fixed_point_residual(const CoefficientPtr& f, const RdeSolution& sol);

/// Unnormalised control omega(s, t) = sum_j ||X^j||_{p/j, [s,t]}^{p/j} on a row.
std::vector<double> budget_row(const GridRoughPath& x, double p, std::size_t start);

struct ItoDistance {
  /// sup over sampled (s, t) of |Z^j - Zhat^j| / omega(s,t)^{j/p}, index j.
  std::vector<double> level;
  /// |y0 - yhat0|_1 + d_p(X, Xhat) + M(f - fhat; L+1, R).
  double input_gap = 0.0;
  /// max_j level[j] / input_gap (0 when the inputs agree).
  double lipschitz = 0.0;
};

ItoDistance ito_map_distance(const CoefficientPtr& f, const GridRoughPath& x,
                             std::span<const double> y0, const CoefficientPtr& fhat,
                             const GridRoughPath& xhat, std::span<const double> yhat0,
                             const SolverConfig& cfg = {});

/// Rough path of Q = Y_{X + Lambda} - Y_Lambda from the joint system driven
/// by (X, Lambda). Both solutions start at y0.
GridRoughPath solution_difference(const CoefficientPtr& f, const GridRoughPath& x,
                                  const GridPath& lambda, std::span<const double> y0,
                                  const SolverConfig& cfg = {});

}  // namespace roughpath
