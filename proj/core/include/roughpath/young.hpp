#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "roughpath/path.hpp"

namespace roughpath {

/// Piecewise-linear path of m x m matrices on a grid (row-major per point).
class OperatorPath {
 public:
  OperatorPath() = default;
  OperatorPath(std::vector<double> times, int dim, std::vector<double> values);

  /// Constant identity / zero path on a grid.
  static OperatorPath identity(std::vector<double> times, int dim);
  static OperatorPath zero(std::vector<double> times, int dim);

  int dim() const { return dim_; }
  std::size_t points() const { return times_.size(); }
  const std::vector<double>& times() const { return times_; }
  std::span<const double> value(std::size_t i) const {
    return {values_.data() + i * dim_ * dim_, static_cast<std::size_t>(dim_ * dim_)};
  }
  std::span<double> value(std::size_t i) {
    return {values_.data() + i * dim_ * dim_, static_cast<std::size_t>(dim_ * dim_)};
  }
  std::span<const double> values() const { return values_; }

 private:
  std::vector<double> times_;
  int dim_ = 0;
  std::vector<double> values_;
};

/// Operator path t -> Omega_t read from a grid path of dimension m*m.
OperatorPath operator_path(const GridPath& flat, int dim);

/// int a dx for piecewise-linear a and x on a shared grid. `integrand` holds
/// out_dim x x.dim() matrices per grid point. Exact trapezoid per interval.
GridPath young_integral(std::span<const double> integrand, int out_dim, const GridPath& x);

/// int dOmega . y for a piecewise-linear vector path y (m values per point).
GridPath young_integral(const OperatorPath& omega, std::span<const double> y);

/// (1 + 2^{2/q} zeta(2/q)), the constant of the linear-ODE series bound.
double series_constant(double q);

struct LinearFlow {
  /// dM = dOmega M, M_0 = Id.
  OperatorPath m;
  /// dN = -N dOmega, N_0 = Id.
  OperatorPath n;
  /// Grid indices T_0 = 0 < ... < T_k = last of the series pieces.
  std::vector<std::size_t> pieces;
  /// Largest number of series terms used on a piece.
  int max_terms = 0;
};

/// Solves both linear equations by summing the iterated-integral series on
/// pieces where omega(T_{i-1}, T_i)^{1/q} (1 + 2^{2/q} zeta(2/q)) <= 1/2
/// and composing the local solutions. omega is the q-variation of Omega in
/// the l1 operator norm. Series tails are cut below 1e-12.
LinearFlow linear_ode_series(const OperatorPath& omega, double q = 1.0);

/// Level-1 shift H = Gamma(X, M) - X of the Duhamel transform for a
/// piecewise-linear X: Y_t = M_t int_0^t M_s^{-1} dX_s.
GridPath duhamel_shift(const GridPath& x, const LinearFlow& flow, const OperatorPath& omega);

/// Rough path of Y = Gamma(X, M_Omega), i.e. X translated by the shift.
GridRoughPath duhamel(const GridRoughPath& x, const OperatorPath& omega, double q = 1.0);
GridRoughPath duhamel(const GridRoughPath& x, const OperatorPath& omega, const LinearFlow& flow);

/// max_i |Y_{i+1} - Y_i - int_{t_i}^{t_{i+1}} dOmega Y - dX| with the
/// interval integral taken along the exact solution between grid points.
double duhamel_residual(const GridPath& y, const GridPath& x, const OperatorPath& omega);

}  // namespace roughpath
