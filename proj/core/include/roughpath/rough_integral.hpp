#pragma once

#include <span>
#include <vector>

#include "roughpath/coefficient.hpp"
#include "roughpath/lift.hpp"
#include "roughpath/path.hpp"

namespace roughpath {

/// Permutations pi (0-based, pi[s] = image of slot s) of {0..|l|-1} that are
/// increasing inside each block of l and increasing on the block ends.
const std::vector<std::vector<int>>& permutation_sets(std::span<const int> l);

/// Sum over pi in Pi_l of pi(T) for an order-|l| tensor level T.
std::vector<double> permuted_sum(std::span<const int> l, std::span<const double> level, int dim);

/// Derivatives D^0 f .. D^{count-1} f at x, eps = 0.
std::vector<std::vector<double>> derivative_stack(const SmoothCoefficient& f,
                                                  std::span<const double> x, int count);

/// Candidate increment Y_{s,t} of int f(X) dX from the derivatives g[k] =
/// D^k f(X_s) (k < L) and the driver increment X_{s,t}.
TruncatedTensor integral_increment(const std::vector<std::vector<double>>& g, int out_dim,
                                   const TruncatedTensor& x);

/// int f(X) dX on the grid of X. f must have point_dim == drive_dim == X.dim();
/// f is evaluated at base + X^1_{0,s} (base defaults to 0).
GridRoughPath integrate(const SmoothCoefficient& f, const GridRoughPath& x,
                        std::span<const double> base = {});

/// Same, also returning defect diagnostics on dyadic triples. The defect
/// ratio uses omega^{(L+1)/p}; p defaults to L.
Association integrate_with_diagnostics(const SmoothCoefficient& f, const GridRoughPath& x,
                                       const Control* cv = nullptr,
                                       std::span<const double> base = {}, double p = 0.0);

/// Integral-form Taylor remainder R_l(x, y) for truncation level L:
/// int_0^1 (1-theta)^{L-l}/(L-l)! f^{L}(x + theta(y-x))<(y-x)^{L-l+1}> dtheta,
/// 16-node Gauss-Legendre. Result indexed [o][a_1..a_{l-1}][b].
std::vector<double> remainder_Rl(const SmoothCoefficient& f, std::span<const double> x,
                                 std::span<const double> y, int l, int level);

/// Per-level |N^j_{u,t}| with N = Y_{u,t} - M_{u,t} for grid indices s <= u <= t.
std::vector<double> integration_defect_N(const SmoothCoefficient& f, const GridRoughPath& x,
                                         std::size_t s, std::size_t u, std::size_t t);

}  // namespace roughpath
