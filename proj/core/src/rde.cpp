#include "roughpath/rde.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "roughpath/error.hpp"
#include "roughpath/lift.hpp"
#include "roughpath/rough_integral.hpp"
#include "roughpath/variation.hpp"

namespace roughpath {

namespace {

double resolve_p(double p, int level) {
  if (p == 0.0) return level + 0.5;
  if (!(p >= level && p < level + 1))
    throw Error(ErrorKind::kRegularity, "solver p must satisfy L <= p < L + 1");
  return p;
}

struct PieceResult {
  GridRoughPath z;
  PieceReport report;
  bool ok = false;
};

class Solver {
 public:
  Solver(const CoefficientPtr& f, const GridRoughPath& x, const SolverConfig& cfg, double p)
      : f_(f), x_(x), cfg_(cfg), p_(p), v_(x.dim()), w_(f->out_dim()) {}

  PieceResult picard(std::size_t a, std::size_t b, std::span<const double> y_start) const {
    PieceResult out;
    out.report.first = a;
    out.report.last = b;
    const GridRoughPath xp = x_.window(a, b);
    bool shifted = false;
    for (double c : y_start) shifted |= c != 0.0;
    const CoefficientPtr fs =
        shifted ? make_shifted(f_, {y_start.begin(), y_start.end()}) : f_;
    const CoefficientPtr phi = phi_beta(fs, 1.0);
    const int d = v_ + 2 * w_;

    // K(1) = (X, f(0) X, f(0) X)
    std::vector<double> zero(w_, 0.0);
    auto a0 = fs->eval(0, 0, 0.0, zero);
    for (double& e : a0) e += cfg_.guess_offset;
    std::vector<double> alpha(static_cast<std::size_t>(d) * v_, 0.0);
    for (int i = 0; i < v_; ++i) alpha[i * v_ + i] = 1.0;
    for (int o = 0; o < w_; ++o)
      for (int c = 0; c < v_; ++c) {
        alpha[(v_ + o) * v_ + c] = a0[o * v_ + c];
        alpha[(v_ + w_ + o) * v_ + c] = a0[o * v_ + c];
      }
    GridRoughPath k = pushforward(alpha, d, v_, xp);

    for (int it = 1; it <= cfg_.max_iters; ++it) {
      GridRoughPath next = integrate(*phi, k);
      const double r = xi_gauge(project_block(next, v_ + w_, w_), p_);
      out.report.residuals.push_back(r);
      out.report.iterations = it;
      k = std::move(next);
      if (r <= cfg_.tol) {
        out.ok = true;
        break;
      }
      if (!std::isfinite(r)) break;
      const auto& rs = out.report.residuals;
      if (rs.size() >= 3 && r > 100.0 * cfg_.tol && r > rs[rs.size() - 2] / cfg_.beta) break;
    }
    if (!out.ok) return out;

    // Z = pi_{V+W}(K); the V block is copied from X bit for bit
    GridRoughPath z = project_block(k, 0, v_ + w_);
    std::vector<TruncatedTensor> inc(z.increments());
    const int dz = v_ + w_;
    for (std::size_t i = 0; i < inc.size(); ++i) {
      const auto& xi = xp.increment(i);
      for (int j = 1; j <= x_.level(); ++j) {
        auto dst = inc[i][j];
        auto src = xi[j];
        const std::size_t nx = src.size();
        for (std::size_t flat = 0; flat < nx; ++flat) {
          std::size_t r = flat, big = 0, mul = 1;
          for (int s = 0; s < j; ++s) {
            big += (r % v_) * mul;
            r /= v_;
            mul *= dz;
          }
          dst[big] = src[flat];
        }
      }
    }
    out.z = GridRoughPath(z.times(), std::move(inc));
    return out;
  }

  void run(std::size_t a, std::size_t b, std::vector<double>& y, int depth,
           std::vector<GridRoughPath>& pieces, std::vector<PieceReport>& reports,
           double budget) const {
    PieceResult res = picard(a, b, y);
    if (!res.ok) {
      const double last = res.report.residuals.empty() ? INFINITY : res.report.residuals.back();
      if (b - a < 2 || depth >= cfg_.max_bisections)
        throw NonConvergenceError("Picard iteration did not converge on [" +
                                      std::to_string(x_.times()[a]) + ", " +
                                      std::to_string(x_.times()[b]) + "]",
                                  last);
      spdlog::debug("rde: bisecting piece [{}, {}] (residual {:.3g})", a, b, last);
      const std::size_t mid = a + (b - a) / 2;
      run(a, mid, y, depth + 1, pieces, reports, budget / 2);
      run(mid, b, y, depth + 1, pieces, reports, budget / 2);
      return;
    }
    res.report.budget = budget;
    auto end = res.z.point(res.z.points() - 1);
    for (int c = 0; c < w_; ++c) y[c] += end[v_ + c];
    pieces.push_back(std::move(res.z));
    reports.push_back(std::move(res.report));
  }

 private:
  const CoefficientPtr& f_;
  const GridRoughPath& x_;
  const SolverConfig& cfg_;
  double p_;
  int v_;
  int w_;
};

}  // namespace

std::vector<double> RdeSolution::state(std::size_t i) const {
  const int w = static_cast<int>(y0.size());
  auto pt = z.point(i);
  std::vector<double> s(y0);
  for (int c = 0; c < w; ++c) s[c] += pt[drive_dim() + c];
  return s;
}

std::vector<double> RdeSolution::states() const {
  std::vector<double> out;
  out.reserve(z.points() * y0.size());
  for (std::size_t i = 0; i < z.points(); ++i) {
    auto s = state(i);
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

std::vector<double> budget_row(const GridRoughPath& x, double p, std::size_t start) {
  return CanonicalControl(x, nullptr, p, 1.0, 1.0).row(start);
}

RdeSolution solve(const CoefficientPtr& f, const GridRoughPath& x, std::span<const double> y0,
                  const SolverConfig& cfg) {
  if (!f) throw Error(ErrorKind::kShape, "solve: missing coefficient");
  if (f->drive_dim() != x.dim() || f->point_dim() != f->out_dim() ||
      static_cast<int>(y0.size()) != f->point_dim())
    throw Error(ErrorKind::kShape, "solve: f must map W to L(V, W) with V the driver space");
  if (f->eps_dependent()) throw Error(ErrorKind::kShape, "solve: coefficient must be eps-free");
  if (!(cfg.beta > 1.0)) throw Error(ErrorKind::kDomain, "solver beta must exceed 1");
  if (!(cfg.tol > 0.0)) throw Error(ErrorKind::kDomain, "solver tol must be positive");
  const int level = x.level();
  const double p = resolve_p(cfg.p, level);
  if (f->max_order() < level + 1)
    throw Error(ErrorKind::kDerivativeOrder, "solve: coefficient needs L + 1 derivatives");

  RdeSolution sol;
  sol.y0.assign(y0.begin(), y0.end());
  sol.p = p;
  double radius = cfg.radius;
  if (radius <= 0.0) radius = 1.0 + l1_norm(y0);
  sol.rho = cfg.rho > 0.0 ? cfg.rho : std::max(1.0, sup_norm(*f, level + 1, radius).value);
  const double scale = std::pow(sol.rho, p);

  // greedy budget pieces on the unnormalised control of X
  std::vector<std::pair<std::size_t, std::size_t>> plan;
  std::vector<double> budgets;
  std::size_t start = 0;
  while (start + 1 < x.points()) {
    VariationSweep sweep(x, p, start);
    sweep.advance();
    double used = scale * sweep.total();
    while (sweep.end() + 1 < x.points()) {
      sweep.advance();
      const double next = scale * sweep.total();
      if (next > cfg.step_budget) {
        // back off to the previous end point
        break;
      }
      used = next;
    }
    std::size_t end = sweep.end();
    if (end > start + 1 && scale * sweep.total() > cfg.step_budget) --end;
    plan.emplace_back(start, end);
    budgets.push_back(used);
    start = end;
  }

  Solver solver(f, x, cfg, p);
  std::vector<GridRoughPath> pieces;
  std::vector<double> y(sol.y0);
  for (std::size_t k = 0; k < plan.size(); ++k)
    solver.run(plan[k].first, plan[k].second, y, 0, pieces, sol.pieces, budgets[k]);
  sol.z = concat(pieces);
  for (const auto& r : sol.pieces) {
    sol.iterations += r.iterations;
    sol.residual = std::max(sol.residual, r.residuals.empty() ? 0.0 : r.residuals.back());
  }
  spdlog::debug("rde: {} pieces, {} iterations, residual {:.3g}, rho {:.3g}", sol.pieces.size(),
                sol.iterations, sol.residual, sol.rho);
  return sol;
}

double fixed_point_residual(const CoefficientPtr& f, const RdeSolution& sol) {
  const int v = sol.drive_dim();
  std::vector<double> base(sol.z.dim(), 0.0);
  std::copy(sol.y0.begin(), sol.y0.end(), base.begin() + v);
  const auto again = integrate(*lift_coefficient(f), sol.z, base);
  return rough_distance(again, sol.z, sol.p);
}

ItoDistance ito_map_distance(const CoefficientPtr& f, const GridRoughPath& x,
                             std::span<const double> y0, const CoefficientPtr& fhat,
                             const GridRoughPath& xhat, std::span<const double> yhat0,
                             const SolverConfig& cfg) {
  const RdeSolution a = solve(f, x, y0, cfg);
  const RdeSolution b = solve(fhat, xhat, yhat0, cfg);
  const double p = a.p;
  const int level = x.level();
  const std::size_t n = x.points();
  ItoDistance out;
  out.level.assign(level + 1, 0.0);

  // sampled starts; every end point
  const std::size_t stride = std::max<std::size_t>(1, (n - 1) / 8);
  for (std::size_t s = 0; s + 1 < n; s += stride) {
    VariationSweep sx(x, p, s, level), sy(xhat, p, s, level);
    while (sx.advance()) {
      sy.advance();
      const std::size_t t = sx.end();
      const double w = sx.total() + sy.total();
      if (w <= 0.0) continue;
      const auto za = a.z.increment(s, t), zb = b.z.increment(s, t);
      for (int j = 1; j <= level; ++j) {
        double diff = 0.0;
        for (std::size_t i = 0; i < za[j].size(); ++i) diff += std::abs(za[j][i] - zb[j][i]);
        out.level[j] = std::max(out.level[j], diff / std::pow(w, j / p));
      }
    }
  }
  double gap = 0.0;
  for (std::size_t c = 0; c < y0.size(); ++c) gap += std::abs(y0[c] - yhat0[c]);
  gap += rough_distance(x, xhat, p);
  if (f != fhat) {
    const double radius = 1.0 + std::max(l1_norm(y0), l1_norm(yhat0));
    gap += sup_norm(*make_sum({f, make_scaled(-1.0, fhat)}), level + 1, radius).value;
  }
  out.input_gap = gap;
  if (gap > 0.0) out.lipschitz = *std::max_element(out.level.begin(), out.level.end()) / gap;
  return out;
}

GridRoughPath solution_difference(const CoefficientPtr& f, const GridRoughPath& x,
                                  const GridPath& lambda, std::span<const double> y0,
                                  const SolverConfig& cfg) {
  const int v = x.dim(), w = f->out_dim();
  if (lambda.dim() != v) throw Error(ErrorKind::kShape, "solution_difference: Lambda dimension");
  // (y1, y2) <- (f(y1)(dx + dl), f(y2) dl) on the driver (X, Lambda)
  auto g = std::make_shared<StackedCoefficient>(
      2 * w, 2 * w, 2 * v,
      std::vector<StackedCoefficient::Term>{{f, 0, 0, 0}, {f, 0, 0, v}, {f, w, w, v}});
  std::vector<double> start(2 * w);
  std::copy(y0.begin(), y0.end(), start.begin());
  std::copy(y0.begin(), y0.end(), start.begin() + w);
  const RdeSolution sol = solve(g, join(x, lambda), start, cfg);
  const int dz = 2 * v + 2 * w;
  std::vector<double> alpha(static_cast<std::size_t>(w) * dz, 0.0);
  for (int c = 0; c < w; ++c) {
    alpha[c * dz + 2 * v + c] = 1.0;
    alpha[c * dz + 2 * v + w + c] = -1.0;
  }
  return pushforward(alpha, w, dz, sol.z);
}

}  // namespace roughpath
