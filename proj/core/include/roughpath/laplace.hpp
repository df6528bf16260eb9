#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "roughpath/coefficient.hpp"
#include "roughpath/path.hpp"
#include "roughpath/rde.hpp"

namespace roughpath {

/// Brownian motion on 2^m uniform intervals of [0, 1] with its
/// piecewise-linear lift. Deterministic given the seed.
GridRoughPath sample_brownian_rough_path(int dim, int dyadic_level, std::uint64_t seed,
                                         int level = 2);

/// Functional on state tables: `states` holds the absolute path values at
/// the cm grid points, row-major points x W.
class PathFunctional {
 public:
  virtual ~PathFunctional() = default;
  virtual double value(std::span<const double> states) const = 0;
  /// DF(y) as an array shaped like `states`; central differences by default.
  virtual std::vector<double> gradient(std::span<const double> states) const;
};

using FunctionalPtr = std::shared_ptr<const PathFunctional>;

FunctionalPtr make_constant_functional(double c);
/// 1/2 z^T P z + q^T z + c for z the flattened state table.
FunctionalPtr make_quadratic_functional(std::vector<double> p, std::vector<double> q,
                                        double c = 0.0);
/// a/2 |y_T|^2 + <c, y_T> on tables of `points` rows of width w.
FunctionalPtr make_terminal_quadratic(std::size_t points, int w, double a, std::vector<double> c);
/// -sum_i <h_{i+1} - h_i, y_{i+1} - y_i> / (t_{i+1} - t_i): minus the discrete
/// H^1 pairing with h (h given at every grid point, h_0 = 0).
FunctionalPtr make_cm_pairing(std::span<const double> times, int w, std::vector<double> h,
                              double scale = 1.0);
FunctionalPtr make_function_functional(std::function<double(std::span<const double>)> f);
/// {"family": "constant" | "quadratic" | "terminal_quadratic" | "cm_pairing", ...}.
FunctionalPtr functional_from_json(const nlohmann::json& spec, std::span<const double> times,
                                   int w);

/// dY = sigma(eps, Y) eps dW + b(eps, Y) dt with the functionals F, G of the
/// Laplace integral E[G(Y) exp(-F(Y) / eps^2)].
struct LaplaceProblem {
  CoefficientPtr sigma;  // W -> L(V, W)
  CoefficientPtr b;      // W -> L(R, W)
  std::vector<double> y0;
  FunctionalPtr F;
  FunctionalPtr G;
  std::vector<double> cm_grid;
  /// RK4 steps per cm interval for the skeleton equation.
  int substeps = 32;
  int v() const { return sigma->drive_dim(); }
  int w() const { return static_cast<int>(y0.size()); }
};

/// Checks shapes; throws config errors.
void validate(const LaplaceProblem& problem);

struct Skeleton {
  /// Fine grid: cm_grid refined `substeps` times.
  std::vector<double> times;
  /// Absolute states on the fine grid.
  std::vector<double> states;
  /// Absolute states on the cm grid.
  std::vector<double> cm_states;
};

/// Psi^eps(h): d phi = sigma(eps, phi) dh + b(eps, phi) dt, phi_0 = y0, for h
/// piecewise linear on the cm grid (values at every cm point, h_0 = 0).
Skeleton skeleton(const LaplaceProblem& problem, std::span<const double> h, double eps = 0.0);

/// Discrete Cameron-Martin energy sum |dh|^2 / dt.
double cm_energy(std::span<const double> times, int dim, std::span<const double> h);

struct RateResult {
  double value = 0.0;  // +inf when y is not reached
  double residual = 0.0;
  bool approximate = false;  // sigma not square
  std::vector<double> h;
};

/// inf { |h|^2 / 2 : Psi^0(h) = y } on the cm grid; y holds absolute states
/// at the cm points. Gauss-Newton from the explicit inversion guess.
RateResult rate_functional(const LaplaceProblem& problem, std::span<const double> y,
                           double tol = 1e-6);

struct MinimizerConfig {
  int starts = 8;
  std::uint64_t seed = 1;
  int max_iters = 2000;
  double grad_tol = 1e-10;
  double start_scale = 0.5;
  /// Agreement tolerance between starts, relative in the H^1 norm.
  double agree_tol = 1e-5;
  int ritz_modes = 16;
  /// Radius of the (H3) derivative-bound check around phi.
  double h3_radius = 0.1;
};

struct MinimizerResult {
  std::vector<double> lambda;  // values at cm points (h_0 = 0)
  Skeleton phi;
  double value = 0.0;  // F(phi) + |lambda|^2 / 2
  double grad_norm = 0.0;  // dual H^1 norm of the discrete gradient
  double hessian_floor = 0.0;
  int iterations = 0;
  bool unique = true;
  std::vector<double> start_values;
  /// Largest dual norm of DF sampled on the h3_radius ball around phi.
  double h3_bound = 0.0;
  double h3_radius = 0.0;
};

/// Multi-start preconditioned gradient descent with backtracking on
/// F(Psi^0(h)) + |h|^2 / 2. Throws a hypothesis error when the Ritz value
/// of A + Id is not positive.
MinimizerResult find_minimizer(const LaplaceProblem& problem, const MinimizerConfig& cfg = {});

struct XiResult {
  /// Xi on the fine skeleton grid (zero at t = 0).
  GridPath xi;
  /// Xi at the cm points, row-major.
  std::vector<double> cm_xi;
  double c = 0.0;
};

/// Xi solves dXi = d_y sigma(0, phi)[Xi, dLambda] + d_y b(0, phi)[Xi] dt +
/// d_eps sigma(0, phi) dLambda + d_eps b(0, phi) dt; c = DF(phi)[Xi].
XiResult xi_and_c(const LaplaceProblem& problem, const MinimizerResult& result);

struct SmokeRow {
  double eps = 0.0;
  double value = 0.0;  // log E[...] + Ftilde / eps^2 + c / eps
  double stderr_value = 0.0;
  bool conclusive = true;
};

struct SmokeConfig {
  std::vector<double> epsilons{0.4, 0.2, 0.1};
  std::size_t samples = 10000;
  int dyadic_level = 7;
  std::uint64_t seed = 7;
  int threads = 0;  // 0 selects hardware concurrency
  /// Samples are drawn in this many fixed blocks, block k from sub-seed (seed, k).
  int blocks = 64;
  SolverConfig solver;
};

struct SmokeReport {
  std::vector<SmokeRow> rows;
  bool stabilized = false;
};

/// Monte Carlo estimate of the corrected log Laplace integral per epsilon.
/// The cm grid must be a coarsening of the 2^m dyadic grid.
SmokeReport laplace_smoke(const LaplaceProblem& problem, const MinimizerResult& minimizer,
                          const XiResult& xi, const SmokeConfig& cfg);

struct LargeDeviationReport {
  double probability = 0.0;
  double empirical_rate = 0.0;  // -eps^2 log P
  double rate = 0.0;            // from rate_functional
  double relative_error = 0.0;
  std::size_t hits = 0;
};

/// P(sup_t |Y^eps_t|_1 > a) by Monte Carlo against inf of the rate over the
/// straight path to the level-a boundary in coordinate `coord`.
LargeDeviationReport large_deviation_check(const LaplaceProblem& problem, double a, double eps,
                                           const SmokeConfig& cfg, int coord = 0);

/// Runs fn(k) for k in [0, count) on `threads` workers.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace roughpath
