// Acceptance runner: one PASS/FAIL line per criterion.
//
//   acceptance [--long] [--only N]...
//
// Criterion 8 is long-running and only runs with --long or when
// ROUGHPATH_LONG_TESTS is set to a non-zero value in the environment.

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "roughpath/laplace.hpp"
#include "roughpath/lift.hpp"
#include "roughpath/rde.hpp"
#include "roughpath/rough_integral.hpp"
#include "roughpath/taylor.hpp"
#include "roughpath/tensor.hpp"
#include "roughpath/variation.hpp"
#include "roughpath/young.hpp"

using namespace roughpath;

namespace {

// ---- pinned tolerances and budgets -------------------------------------------

namespace tol {
constexpr double kAlgebra = 1e-10;         // relative
constexpr double kPvarExact = 1e-12;       // relative to max(1, value)
constexpr double kQuadrature = 1e-6;
constexpr double kFlowIdentity = 1e-8;
constexpr double kSeriesVsRk = 1e-7;
constexpr double kDuhamelResidual = 1e-8;
constexpr double kDuhamelHomogeneity = 1e-10;
constexpr double kArctan = 1e-6;
constexpr double kPicardDamping = 0.9;
constexpr double kKappaBand = 0.2;
constexpr double kExactTermination = 1e-9;
constexpr double kDuhamelBenchmark = 1e-7;
constexpr double kSlopeLow = 0.7;   // order n slope in [n + 0.7, n + 1.5]
constexpr double kSlopeHigh = 1.5;
constexpr double kGaugeSlack = 0.2;
constexpr double kXiZero = 1e-12;
constexpr double kXiFd = 1e-5;
constexpr double kQuadraticMin = 1e-8;
constexpr double kBrownianSlopeLow = 1.6;
constexpr double kBrownianSlopeHigh = 2.4;
constexpr double kSmokeSigmas = 3.0;
constexpr double kLdRelative = 0.25;
}  // namespace tol

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double rel_diff(const TruncatedTensor& a, const TruncatedTensor& b) {
  double scale = 1.0;
  for (double x : b.data()) scale = std::max(scale, std::abs(x));
  return max_abs_diff(a, b) / scale;
}

GridPath random_walk(std::mt19937_64& rng, std::size_t points, int d, double step) {
  std::normal_distribution<double> g(0.0, step);
  std::vector<double> v(points * d, 0.0);
  for (std::size_t i = 1; i < points; ++i)
    for (int c = 0; c < d; ++c) v[i * d + c] = v[(i - 1) * d + c] + g(rng);
  return GridPath(uniform_grid(points - 1), d, std::move(v));
}

GridPath ramp_path(std::size_t n, double scale = 1.0) {
  return GridPath::sample(uniform_grid(n), 1, [&](double t, std::span<double> v) { v[0] = scale * t; });
}

GridPath zero_path(std::size_t n) {
  return GridPath::sample(uniform_grid(n), 1, [](double, std::span<double> v) { v[0] = 0.0; });
}

/// Largest deviation of Sym(X^l) from (X^1)^l / l!.
double symmetric_defect(const TruncatedTensor& x) {
  const int d = x.dim();
  const auto seg = TruncatedTensor::segment(x[1], x.level());
  double worst = 0.0;
  for (int l = 2; l <= x.level(); ++l) {
    std::vector<int> idx(l);
    for (std::size_t flat = 0; flat < x[l].size(); ++flat) {
      std::size_t r = flat;
      for (int s = l - 1; s >= 0; --s) {
        idx[s] = static_cast<int>(r % d);
        r /= d;
      }
      std::sort(idx.begin(), idx.end());
      double sum = 0.0;
      int count = 0;
      do {
        std::size_t f = 0;
        for (int s = 0; s < l; ++s) f = f * d + idx[s];
        sum += x[l][f];
        ++count;
      } while (std::next_permutation(idx.begin(), idx.end()));
      worst = std::max(worst, std::abs(sum / count - seg[l][flat]));
    }
  }
  return worst;
}

// ---- 1 ---------------------------------------------------------------------

void algebra(Outcome& o) {
  std::mt19937_64 rng(101);
  double chen = 0, assoc = 0, dil = 0, inv = 0, sym = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + trial % 4, level = 1 + trial % 3;
    auto rp = lift_piecewise_linear(random_walk(rng, 9, d, 1.0), level);
    const auto whole = rp.compose(0, 8);
    chen = std::max(chen, rel_diff(rp.compose(0, 3) * rp.compose(3, 8), whole));
    sym = std::max(sym, symmetric_defect(whole) /
                            std::max(1.0, *std::max_element(whole.data().begin(), whole.data().end(),
                                                            [](double a, double b) {
                                                              return std::abs(a) < std::abs(b);
                                                            })));
    const auto a = oracle::random_group_element(rng, d, level);
    const auto b = oracle::random_group_element(rng, d, level);
    const auto c = oracle::random_group_element(rng, d, level);
    assoc = std::max(assoc, rel_diff((a * b) * c, a * (b * c)));
    for (double r : {-2.0, 0.5, 3.0}) dil = std::max(dil, rel_diff(dilate(r, a) * dilate(r, b), dilate(r, a * b)));
    inv = std::max(inv, rel_diff(a * group_inverse(a), TruncatedTensor::unit(d, level)));
    inv = std::max(inv, rel_diff(group_inverse(a) * a, TruncatedTensor::unit(d, level)));
  }
  o.detail << "chen=" << chen << " assoc=" << assoc << " dilation=" << dil << " inverse=" << inv
           << " sym=" << sym;
  o.check(chen <= tol::kAlgebra, "chen");
  o.check(assoc <= tol::kAlgebra, "associativity");
  o.check(dil <= tol::kAlgebra, "dilation");
  o.check(inv <= tol::kAlgebra, "inverse");
  o.check(sym <= tol::kAlgebra, "symmetric part");
}

// ---- 2 ---------------------------------------------------------------------

void variation(Outcome& o) {
  std::mt19937_64 rng(202);
  double worst = 0.0;
  for (std::size_t n = 2; n <= 12; ++n) {
    auto rp = lift_piecewise_linear(random_walk(rng, n, 2, 1.0 / std::sqrt(double(n))), 3);
    for (double p : {1.5, 2.0, 2.5, 3.7}) {
      for (int j = 1; j <= variation_levels(p, 3); ++j) {
        const double brute = oracle::brute_force_partition_sup(n, [&](std::size_t a, std::size_t b) {
          const auto x = rp.compose(a, b);
          double s = 0.0;
          for (double v : x[j]) s += std::abs(v);
          return std::pow(s, p / j);
        });
        const double norm_brute = std::pow(brute, j / p);
        const double dp = pvar_norm(rp, j, p, 0, n - 1);
        worst = std::max(worst, std::abs(dp - norm_brute) / std::max(1.0, norm_brute));
      }
    }
  }
  std::size_t super_fail = 0;
  std::uniform_int_distribution<int> len(3, 20);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = len(rng);
    auto x = lift_piecewise_linear(random_walk(rng, n, 2, 0.3), 2);
    auto lambda = random_walk(rng, n, 1, 0.3);
    CanonicalControl cv(x, &lambda, 2.5, 1.2);
    for (std::size_t u = 1; u + 1 < n; ++u)
      if (control_eval(cv, 0, u) + control_eval(cv, u, n - 1) > control_eval(cv, 0, n - 1) * (1 + 1e-12))
        ++super_fail;
  }
  std::size_t colin_fail = 0;
  std::uniform_real_distribution<double> u(-3.0, 3.0), w(0.0, 1.0);
  for (double q : {1.0, 1.5, 1.9})
    for (int trial = 0; trial < 200; ++trial) {
      const std::vector<double> a{u(rng), u(rng)}, c{u(rng), u(rng)};
      const double lam = w(rng);
      const std::vector<double> b{a[0] + lam * (c[0] - a[0]), a[1] + lam * (c[1] - a[1])};
      auto n1 = [](double x, double y) { return std::abs(x) + std::abs(y); };
      const double lhs = std::pow(n1(a[0] - b[0], a[1] - b[1]), q) + std::pow(n1(b[0] - c[0], b[1] - c[1]), q);
      if (lhs > std::pow(n1(a[0] - c[0], a[1] - c[1]), q) * (1 + 1e-12)) ++colin_fail;
    }
  o.detail << "pvar_vs_exhaustive=" << worst << " superadditivity_violations=" << super_fail
           << " collinearity_violations=" << colin_fail;
  o.check(worst <= tol::kPvarExact, "pvar enumeration");
  o.check(super_fail == 0, "superadditivity");
  o.check(colin_fail == 0, "collinearity");
}

// ---- 3 ---------------------------------------------------------------------

struct QuadratureCase {
  const char* name;
  int dim;
  std::function<void(double, std::span<double>)> x;  // path, x(0) = 0
  CoefficientPtr f;
  std::function<double(std::span<const double>, std::span<const double>)> integrand;  // f(x)<dx>
};

void integration(Outcome& o) {
  const std::size_t n = 1024;
  std::vector<QuadratureCase> cases;
  cases.push_back({"cos", 1, [](double t, std::span<double> v) { v[0] = std::sin(3 * t) + t; },
                   make_ridge(1, 1, 1, {{0, 0, 0, 1, RidgeShape::kCos, {1.0}, 0}}),
                   [](auto x, auto dx) { return std::cos(x[0]) * dx[0]; }});
  cases.push_back({"parabola-linear", 2,
                   [](double t, std::span<double> v) { v[0] = t; v[1] = t * t; },
                   make_linear(2, 1, 2, {0.0, 0.0}, {0.0, 0.0, 1.0, 0.0}),
                   [](auto x, auto dx) { return x[1] * dx[0]; }});
  cases.push_back({"loop-ridge", 2,
                   [](double t, std::span<double> v) {
                     v[0] = std::cos(2 * std::numbers::pi * t) - 1;
                     v[1] = std::sin(2 * std::numbers::pi * t);
                   },
                   make_ridge(2, 1, 2,
                              {{0, 0, 0.5, 1, RidgeShape::kSin, {1.0, 0.5}, 0.2},
                               {0, 1, 0, 1, RidgeShape::kCos, {-0.3, 1.0}, 0}}),
                   [](auto x, auto dx) {
                     return (0.5 + std::sin(x[0] + 0.5 * x[1] + 0.2)) * dx[0] +
                            std::cos(-0.3 * x[0] + x[1]) * dx[1];
                   }});
  cases.push_back({"cubic-polynomial", 2,
                   [](double t, std::span<double> v) { v[0] = t; v[1] = t * t * t - t; },
                   make_polynomial(2, 1, 2, {{0, 1, 1.0, {2, 0}}, {0, 0, -0.5, {1, 1}}}),
                   [](auto x, auto dx) { return x[0] * x[0] * dx[1] - 0.5 * x[0] * x[1] * dx[0]; }});
  cases.push_back({"sin-squared", 1, [](double t, std::span<double> v) { v[0] = 2 * std::sin(5 * t); },
                   make_ridge(1, 1, 1, {{0, 0, 0.1, 1, RidgeShape::kSinSquared, {1.0}, 0.3}}),
                   [](auto x, auto dx) {
                     const double s = std::sin(x[0] + 0.3);
                     return (0.1 + s * s) * dx[0];
                   }});
  double worst = 0.0;
  for (const auto& c : cases) {
    const auto path = GridPath::sample(uniform_grid(n), c.dim, c.x);
    const double got = integrate(*c.f, lift_piecewise_linear(path, 3)).increment(0, n)[1][0];
    // Riemann-Stieltjes integral along the interpolated path, segment by segment
    double want = 0.0;
    std::vector<double> xv(c.dim), dv(c.dim);
    for (std::size_t i = 0; i < n; ++i) {
      const auto a = path.value(i), b = path.value(i + 1);
      for (int k = 0; k < c.dim; ++k) dv[k] = b[k] - a[k];
      want += oracle::simpson(
          [&](double s) {
            for (int k = 0; k < c.dim; ++k) xv[k] = a[k] + s * dv[k];
            return c.integrand(xv, dv);
          },
          0.0, 1.0, 1e-15);
    }
    worst = std::max(worst, std::abs(got - want));
  }
  std::size_t pi_mismatch = 0, pi_sets = 0;
  for (int k = 1; k <= kMaxLevel; ++k)
    for (int parts = 1; parts <= k; ++parts)
      for (const auto& l : compositions(k, parts)) {
        if (k > 3) continue;  // S_2, S_3
        auto want = oracle::brute_force_pi(l);
        auto got = permutation_sets(l);
        std::sort(want.begin(), want.end());
        std::sort(got.begin(), got.end());
        ++pi_sets;
        if (got != want) ++pi_mismatch;
      }
  o.detail << "quadrature_max_err=" << worst << " (5 cases, N=" << n << ") pi_sets=" << pi_sets
           << " mismatches=" << pi_mismatch;
  o.check(worst <= tol::kQuadrature, "quadrature");
  o.check(pi_mismatch == 0, "permutation sets");
}

// ---- 4 ---------------------------------------------------------------------

OperatorPath smooth_omega(std::size_t n, double scale) {
  auto t = uniform_grid(n);
  std::vector<double> v(t.size() * 9);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double s = t[i];
    const double a[9] = {std::sin(2 * s), s * s, -0.5 * s, std::cos(s) - 1, 0.3 * s, s * s * s,
                         0.2 * s, -std::sin(s), 0.7 * s * s};
    for (int k = 0; k < 9; ++k) v[i * 9 + k] = scale * a[k];
  }
  return OperatorPath(t, 3, v);
}

using RowMat3 = Eigen::Matrix<double, 3, 3, Eigen::RowMajor>;

void linear_ode(Outcome& o) {
  std::mt19937_64 rng(404);
  double ident = 0.0;
  {
    auto om = random_walk(rng, 65, 9, 0.2);
    auto flow = linear_ode_series(OperatorPath(om.times(), 3, {om.values().begin(), om.values().end()}));
    for (std::size_t i = 0; i < om.points(); ++i) {
      Eigen::Map<const RowMat3> m(flow.m.value(i).data()), nn(flow.n.value(i).data());
      ident = std::max(ident, (m * nn - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff());
      ident = std::max(ident, (nn * m - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff());
    }
  }
  double rk = 0.0;
  {
    const std::size_t n = 128;
    auto omega = smooth_omega(n, 1.0);
    auto flow = linear_ode_series(omega);
    oracle::Vec y{1, 0, 0, 0, 1, 0, 0, 0, 1};
    for (std::size_t i = 0; i < n; ++i) {
      const double h = omega.times()[i + 1] - omega.times()[i];
      Eigen::Matrix3d a;
      for (int k = 0; k < 9; ++k) a(k / 3, k % 3) = (omega.value(i + 1)[k] - omega.value(i)[k]) / h;
      y = oracle::rk45(
          [&](double, const oracle::Vec& m, oracle::Vec& dm) {
            Eigen::Map<const RowMat3> mm(m.data());
            RowMat3 r = a * mm;
            std::copy(r.data(), r.data() + 9, dm.begin());
          },
          y, omega.times()[i], omega.times()[i + 1], 1e-13);
      for (int k = 0; k < 9; ++k) rk = std::max(rk, std::abs(y[k] - flow.m.value(i + 1)[k]));
    }
  }
  double residual = 0.0, homog = 0.0;
  {
    auto x = lift_piecewise_linear(random_walk(rng, 129, 3, 0.1), 3);
    auto omega = smooth_omega(128, 0.8);
    auto flow = linear_ode_series(omega);
    auto y = duhamel(x, omega, flow);
    residual = duhamel_residual(y.level1(), x.level1(), omega);
    const double eps = 0.3;
    std::vector<TruncatedTensor> scaled;
    for (const auto& inc : x.increments()) scaled.push_back(dilate(eps, inc));
    auto ye = duhamel(GridRoughPath(x.times(), scaled), omega, flow);
    for (std::size_t i = 0; i < ye.points(); ++i)
      homog = std::max(homog, rel_diff(ye.cumulative(i), dilate(eps, y.cumulative(i))));
  }
  o.detail << "MN-Id=" << ident << " series_vs_rk=" << rk << " duhamel_residual=" << residual
           << " homogeneity=" << homog;
  o.check(ident <= tol::kFlowIdentity, "M N = Id");
  o.check(rk <= tol::kSeriesVsRk, "series vs RK");
  o.check(residual <= tol::kDuhamelResidual, "Duhamel residual");
  o.check(homog <= tol::kDuhamelHomogeneity, "Duhamel homogeneity");
}

// ---- 5 ---------------------------------------------------------------------

void rde(Outcome& o) {
  auto cos2 = make_ridge(1, 1, 1, {{0, 0, 0, 1, RidgeShape::kCosSquared, {1.0}, 0}});
  auto x = lift_piecewise_linear(ramp_path(1024), 3);
  SolverConfig cfg;
  cfg.tol = 1e-13;
  auto f = make_clamped(cos2, 10.0);
  auto sol = solve(f, x, std::vector<double>{0.0}, cfg);
  const double arctan_err = std::abs(sol.state(1024)[0] - std::numbers::pi / 4);
  const double fpr = fixed_point_residual(f, sol);

  auto sol2 = solve(cos2, lift_piecewise_linear(ramp_path(512), 3), std::vector<double>{0.3}, cfg);
  double ratio = 0.0;
  for (const auto& piece : sol2.pieces)
    for (std::size_t k = 2; k + 1 < piece.residuals.size(); ++k)
      if (piece.residuals[k] > 1e-14) ratio = std::max(ratio, piece.residuals[k + 1] / piece.residuals[k]);

  auto lam = ramp_path(128);
  auto g = make_ridge(1, 1, 1, {{0, 0, 1.0, 0.5, RidgeShape::kSin, {1.0}, 0}});
  std::vector<double> ks, n1, n2;
  for (int k = 1; k <= 5; ++k) {
    const double kappa = std::ldexp(1.0, -k);
    auto xk = lift_piecewise_linear(
        GridPath::sample(uniform_grid(128), 1, [&](double t, std::span<double> v) { v[0] = kappa * std::sin(6 * t); }),
        2);
    auto q = solution_difference(g, xk, lam, std::vector<double>{0.0});
    ks.push_back(kappa);
    n1.push_back(pvar_norm(q, 1, 2.5));
    n2.push_back(pvar_norm(q, 2, 2.5));
  }
  const double s1 = oracle::loglog_slope(ks, n1), s2 = oracle::loglog_slope(ks, n2);
  o.detail << "arctan_err=" << arctan_err << " fixed_point_residual=" << fpr << " (tol " << cfg.tol
           << ") damping_ratio=" << ratio << " kappa_slopes=" << s1 << "," << s2;
  o.check(arctan_err <= tol::kArctan, "arctan");
  o.check(fpr <= 2 * cfg.tol, "fixed-point residual");
  o.check(ratio <= tol::kPicardDamping, "Picard damping");
  o.check(std::abs(s1 - 1) <= tol::kKappaBand && std::abs(s2 - 2) <= tol::kKappaBand, "kappa scaling");
}

// ---- 6 ---------------------------------------------------------------------

CoefficientPtr two_plus_sin() { return make_ridge(1, 1, 1, {{0, 0, 2.0, 1.0, RidgeShape::kSin, {1.0}, 0.0}}); }
CoefficientPtr zero_coef() { return make_constant(1, 1, 1, {0.0}); }

std::vector<double> dyadic_eps() {
  std::vector<double> e;
  for (int k = 2; k <= 8; ++k) e.push_back(std::ldexp(1.0, -k));
  return e;
}

void expansion(Outcome& o) {
  const std::vector<double> y0{0.0};
  auto sigma = make_constant(1, 1, 1, {1.0});
  auto b = make_linear(1, 1, 1, {0.0}, {1.0});
  double q2 = 0.0;
  {
    auto x = lift_piecewise_linear(ramp_path(1024), 3);
    auto e = expand(sigma, b, x, ramp_path(1024), y0, 1);
    for (double eps : dyadic_eps()) q2 = std::max(q2, remainder(sigma, b, e, eps).q_sup());
  }
  double y1 = 0.0;
  {
    auto e = expand(sigma, b, lift_piecewise_linear(ramp_path(256), 2), ramp_path(256), y0, 2);
    y1 = std::abs(e.value(1, 256)[0] - (std::numbers::e - 1));
  }
  double slope[3] = {0, 0, 0};
  for (int n : {1, 2}) {
    auto x = lift_piecewise_linear(ramp_path(256), 3);
    auto e = expand(two_plus_sin(), zero_coef(), x, zero_path(256), y0, n);
    std::vector<double> g;
    for (double s : dyadic_eps()) g.push_back(remainder(two_plus_sin(), zero_coef(), e, s).q_sup());
    const auto fit = order_fit(dyadic_eps(), g);
    slope[n] = fit.exact ? 0.0 : fit.slope;
  }
  double excess = -1e300;
  {
    auto bb = make_ridge(1, 1, 1, {{0, 0, 0.0, 0.5, RidgeShape::kCos, {1.0}, 0.0}});
    const std::vector<std::vector<int>> fams{{-2}, {1}, {2}, {-2, 1}, {1, 1}, {-1, 2}, {1, 2}};
    const std::vector<double> r{1.0, 2.0, 4.0, 8.0};
    std::vector<std::vector<double>> g(fams.size());
    for (double s : r) {
      auto path = GridPath::sample(uniform_grid(128), 1, [s](double t, std::span<double> v) { v[0] = s * std::sin(3 * t); });
      auto e = expand(two_plus_sin(), bb, lift_piecewise_linear(path, 2), ramp_path(128), y0, 2);
      for (std::size_t f = 0; f < fams.size(); ++f) g[f].push_back(e.gauge(fams[f]));
    }
    for (std::size_t f = 0; f < fams.size(); ++f) {
      double nu = 0.0;
      for (int i : fams[f]) nu += expansion_nu(i);
      excess = std::max(excess, oracle::loglog_slope(r, g[f]) - nu);
    }
  }
  o.detail << "linear_Q2=" << q2 << " Y1_err=" << y1 << " slope_n1=" << slope[1] << " slope_n2=" << slope[2]
           << " gauge_excess=" << excess;
  o.check(q2 <= tol::kExactTermination, "exact termination");
  o.check(y1 <= tol::kDuhamelBenchmark, "Duhamel benchmark");
  for (int n : {1, 2})
    o.check(slope[n] >= n + tol::kSlopeLow && slope[n] <= n + tol::kSlopeHigh, "slope n=" + std::to_string(n));
  o.check(excess <= tol::kGaugeSlack, "gauge growth");
}

// ---- 7 ---------------------------------------------------------------------

LaplaceProblem identity_problem(std::size_t m, FunctionalPtr f) {
  LaplaceProblem p;
  p.sigma = make_constant(1, 1, 1, {1.0});
  p.b = make_constant(1, 1, 1, {0.0});
  p.y0 = {0.0};
  p.cm_grid = uniform_grid(m);
  p.F = f ? f : make_constant_functional(0.0);
  p.G = make_constant_functional(1.0);
  p.substeps = 4;
  return p;
}

CoefficientPtr s_of_y() { return make_ridge(1, 1, 1, {{0, 0, 1.0, 0.5, RidgeShape::kSin, {1.0}, 0.0}}); }

MinimizerResult fixed_lambda(const LaplaceProblem& p, std::vector<double> lambda) {
  MinimizerResult r;
  r.lambda = std::move(lambda);
  r.phi = skeleton(p, r.lambda);
  return r;
}

void laplace_deterministic(Outcome& o) {
  double xi_zero = 0.0, c_zero = 0.0;
  {
    auto p = identity_problem(8, make_terminal_quadratic(9, 1, 1.0, {0.5}));
    p.sigma = s_of_y();
    p.b = make_ridge(1, 1, 1, {{0, 0, 0.0, 0.3, RidgeShape::kCos, {1.0}, 0.0}});
    std::vector<double> lam(9);
    for (std::size_t i = 0; i <= 8; ++i) lam[i] = 0.3 * p.cm_grid[i] + 0.2 * std::sin(4 * p.cm_grid[i]);
    auto xr = xi_and_c(p, fixed_lambda(p, lam));
    for (double x : xr.xi.values()) xi_zero = std::max(xi_zero, std::abs(x));
    c_zero = std::abs(xr.c);
  }
  double fd = 0.0;
  {
    auto p = identity_problem(8, nullptr);
    p.sigma = make_epsilon_expansion({s_of_y(), s_of_y()});
    p.b = make_epsilon_expansion({make_ridge(1, 1, 1, {{0, 0, 0.0, 0.3, RidgeShape::kCos, {1.0}, 0.0}}),
                                  make_constant(1, 1, 1, {0.2})});
    p.y0 = {0.1};
    p.substeps = 64;
    std::vector<double> lam(9);
    for (std::size_t i = 0; i <= 8; ++i) lam[i] = std::sin(3 * p.cm_grid[i]);
    auto xr = xi_and_c(p, fixed_lambda(p, lam));
    auto fine = p;
    fine.substeps = 512;
    const double d = 1e-4;
    const auto up = skeleton(fine, lam, d).cm_states, dn = skeleton(fine, lam, -d).cm_states;
    for (std::size_t i = 0; i <= 8; ++i) fd = std::max(fd, std::abs(xr.cm_xi[i] - (up[i] - dn[i]) / (2 * d)));
  }
  double quad = 0.0;
  {
    const std::size_t m = 6, n = m + 1;
    auto t = uniform_grid(m);
    std::vector<double> pm(n * n, 0.0), q(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      pm[i * n + i] = 0.5 + 0.1 * i;
      q[i] = -0.3 * std::cos(static_cast<double>(i));
      if (i + 1 < n) pm[i * n + i + 1] = pm[(i + 1) * n + i] = -0.2;
    }
    auto r = find_minimizer(identity_problem(m, make_quadratic_functional(pm, q)));
    Eigen::MatrixXd pt(m, m), g = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd qt(m);
    for (std::size_t i = 0; i < m; ++i) {
      qt[i] = q[i + 1];
      for (std::size_t j = 0; j < m; ++j) pt(i, j) = pm[(i + 1) * n + j + 1];
      const double w = 1.0 / (t[i + 1] - t[i]);
      g(i, i) += w;
      if (i > 0) {
        g(i - 1, i - 1) += w;
        g(i - 1, i) -= w;
        g(i, i - 1) -= w;
      }
    }
    const Eigen::VectorXd hstar = -(pt + g).ldlt().solve(qt);
    for (std::size_t i = 0; i < m; ++i) quad = std::max(quad, std::abs(r.lambda[i + 1] - hstar[i]));
  }
  o.detail << "eps_free_xi=" << xi_zero << " eps_free_c=" << c_zero << " xi_vs_fd=" << fd
           << " quadratic_minimizer_err=" << quad;
  o.check(xi_zero <= tol::kXiZero && c_zero <= tol::kXiZero, "eps-free Xi and c");
  o.check(fd <= tol::kXiFd, "Xi finite difference");
  o.check(quad <= tol::kQuadraticMin, "quadratic minimizer");
}

// ---- 8 (long) ----------------------------------------------------------------

void long_running(Outcome& o, int threads) {
  // remainder slope along one Brownian sample
  double slope = 0.0;
  {
    const int m = 12;
    auto x = sample_brownian_rough_path(1, m, 20240601, 3);
    const std::size_t n = x.intervals();
    auto e = expand(two_plus_sin(), zero_coef(), x, zero_path(n), std::vector<double>{0.0}, 1);
    const auto eps = dyadic_eps();
    std::vector<RemainderBundle> rs(eps.size());
    parallel_for(eps.size(), threads, [&](std::size_t k) { rs[k] = remainder(two_plus_sin(), zero_coef(), e, eps[k]); });
    std::vector<double> g;
    for (const auto& r : rs) g.push_back(r.q_sup());
    const auto fit = order_fit(eps, g);
    slope = fit.exact ? 0.0 : fit.slope;
  }
  // Ornstein-Uhlenbeck with a terminal quadratic: Gaussian, closed-form answer
  bool stabilized = false;
  double worst_sigmas = 0.0;
  const double want = -0.5 * std::log1p(0.5 * (1 - std::exp(-2.0)));
  {
    LaplaceProblem p = identity_problem(8, make_terminal_quadratic(9, 1, 1.0, {}));
    p.b = make_linear(1, 1, 1, {0.0}, {-1.0});
    p.substeps = 32;
    auto mr = find_minimizer(p);
    auto xr = xi_and_c(p, mr);
    SmokeConfig cfg;
    cfg.samples = 20000;
    cfg.dyadic_level = 7;
    cfg.threads = threads;
    auto rep = laplace_smoke(p, mr, xr, cfg);
    stabilized = rep.stabilized;
    o.detail << "smoke_rows=";
    for (const auto& row : rep.rows) {
      o.detail << row.eps << ":" << row.value << "+-" << row.stderr_value << " ";
      worst_sigmas = std::max(worst_sigmas, std::abs(row.value - want) / std::max(row.stderr_value, 1e-300));
    }
  }
  // large deviations for eps W at level a
  double ld_err = 0.0;
  {
    LaplaceProblem p = identity_problem(8, nullptr);
    SmokeConfig cfg;
    cfg.samples = 20000;
    cfg.dyadic_level = 7;
    cfg.threads = threads;
    cfg.seed = 11;
    auto rep = large_deviation_check(p, 0.3, 0.1, cfg);
    ld_err = rep.relative_error;
    o.detail << "ld_rate=" << rep.empirical_rate << " vs " << rep.rate << " hits=" << rep.hits << " ";
  }
  o.detail << "brownian_slope=" << slope << " smoke_target=" << want << " smoke_max_sigmas=" << worst_sigmas
           << " ld_relative_error=" << ld_err;
  o.check(slope >= tol::kBrownianSlopeLow && slope <= tol::kBrownianSlopeHigh, "Brownian slope");
  o.check(stabilized && worst_sigmas <= tol::kSmokeSigmas, "smoke stabilization");
  o.check(ld_err <= tol::kLdRelative, "large deviations");
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<void(Outcome&)> run;
  bool long_running = false;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"roughpath acceptance criteria"};
  bool long_flag = false;
  std::vector<int> only;
  int threads = 0;
  app.add_flag("--long", long_flag, "include the long-running criterion");
  app.add_option("--only", only, "run only these criteria");
  app.add_option("--threads", threads, "worker threads for Monte Carlo (0 = all cores)");
  CLI11_PARSE(app, argc, argv);
  if (const char* env = std::getenv("ROUGHPATH_LONG_TESTS"); env && *env && std::string(env) != "0")
    long_flag = true;

  const std::vector<Criterion> criteria{
      {1, "algebraic suite", 10, algebra},
      {2, "variation suite", 30, variation},
      {3, "integration suite", 60, integration},
      {4, "linear-ODE/Duhamel suite", 30, linear_ode},
      {5, "RDE suite", 120, rde},
      {6, "expansion suite", 300, expansion},
      {7, "Laplace deterministic suite", 60, laplace_deterministic},
      {8, "long-running suite", 3600, [threads](Outcome& o) { long_running(o, threads); }, true},
  };

  bool all = true;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    if (c.long_running && !long_flag) {
      std::printf("SKIP %d %s: opt-in, run with --long or ROUGHPATH_LONG_TESTS=1\n", c.id, c.name);
      continue;
    }
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.check(secs <= c.budget_s, "time budget");
    all = all && o.pass;
    std::printf("%s %d %s (%.1f s / %.0f s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs, c.budget_s,
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
