#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "roughpath/coefficient.hpp"
#include "roughpath/path.hpp"
#include "roughpath/rde.hpp"
#include "roughpath/young.hpp"

namespace roughpath {

/// Weight of a block index in the expansion family: nu(-2) = 1 (X),
/// nu(-1) = 0 (Lambda), nu(i) = i.
double expansion_nu(int index);
/// Weight in the remainder family: nu(-3) = 1 (eps X), nu(-2) = nu(-1) = 0.
double remainder_nu(int index);

/// Sub-tensor of level indices.size() of `x` whose slot s ranges over the
/// coordinate block [offsets[s], offsets[s] + dims[s]).
std::vector<double> block_tensor(const TruncatedTensor& x, std::span<const int> offsets,
                                 std::span<const int> dims);

/// Terms Y^0..Y^n of the expansion and their joint rough path over
/// V + V-hat + W^(n+1). Blocks are indexed -2 (X), -1 (Lambda), 0..n.
struct ExpansionBundle {
  int n = 0;
  int v = 0;
  int vhat = 0;
  int w = 0;
  std::vector<double> y0;
  /// terms[k] is Y^k - Y^k_0 on the grid (Y^0 re-based at y0).
  std::vector<GridPath> terms;
  /// Level-1 forcing paths I^k and J^k, index 0 unused.
  std::vector<GridPath> forcing_i;
  std::vector<GridPath> forcing_j;
  OperatorPath omega;
  LinearFlow flow;
  GridRoughPath joint;

  int offset(int index) const;
  int block_dim(int index) const;
  /// Absolute value Y^k at grid point i.
  std::vector<double> value(int k, std::size_t i) const;
  /// I^j[Y^{i_1}, ..., Y^{i_j}]_{s,t} for grid indices s <= t.
  std::vector<double> iterated(std::size_t s, std::size_t t, std::span<const int> indices) const;
  /// sup_t |I^j[...]_{0,t}|_1.
  double gauge(std::span<const int> indices) const;
};

/// dY^0 = b(0, Y^0) dLambda, then for k = 1..n
///   dY^k - d_y b(0, Y^0)<Y^k, dLambda> = dI^k + dJ^k
/// by a rough integral against the joint path of lower terms followed by
/// the Duhamel transform. sigma: W -> L(V, W), b: W -> L(V-hat, W).
ExpansionBundle expand(const CoefficientPtr& sigma, const CoefficientPtr& b,
                       const GridRoughPath& x, const GridPath& lambda,
                       std::span<const double> y0, int n, const SolverConfig& cfg = {});

/// Blocks of the remainder family: -3 (eps X), -2 (Lambda), -1 (Y^eps),
/// 0..n-1 (eps^i Y^i), n (Q^n).
struct RemainderBundle {
  int n = 0;
  double epsilon = 0.0;
  int v = 0;
  int vhat = 0;
  int w = 0;
  /// Y^eps - y0.
  GridPath solution;
  /// Q^{n+1} = Y^eps - sum_{k<=n} eps^k Y^k.
  GridPath q_first_level;
  GridRoughPath joint;
  RdeSolution rde;

  int offset(int index) const;
  int block_dim(int index) const;
  std::vector<double> iterated(std::size_t s, std::size_t t, std::span<const int> indices) const;
  double gauge(std::span<const int> indices) const;
  /// sup_t |Q^{n+1}_t|_1.
  double q_sup() const;
};

/// Solves dY = sigma(eps, Y) eps dX + b(eps, Y) dLambda driven by the scaled
/// expansion path and subtracts the partial sum of `bundle`. The joint
/// hat-family path is truncated at min(L, 2).
RemainderBundle remainder(const CoefficientPtr& sigma, const CoefficientPtr& b,
                          const ExpansionBundle& bundle, double epsilon,
                          const SolverConfig& cfg = {});

struct OrderFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// Standard error of the slope.
  double stderr_slope = 0.0;
  double r_squared = 0.0;
  /// Every gauge below the zero threshold: the expansion terminates.
  bool exact = false;
};

/// Least-squares slope of log gauge against log eps. Needs >= 4 samples
/// with max/min eps >= 50. Gauges at or below `zero` everywhere give an
/// exact-termination report; otherwise any gauge equal to 0 is a domain
/// error.
OrderFit order_fit(std::span<const double> eps, std::span<const double> gauges,
                   double zero = 1e-9);

}  // namespace roughpath
