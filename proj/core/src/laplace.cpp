#include "roughpath/laplace.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <thread>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "roughpath/error.hpp"
#include "roughpath/lift.hpp"
#include "roughpath/variation.hpp"
#include "roughpath/young.hpp"

namespace roughpath {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

GridPath brownian_path(std::mt19937_64& rng, int dim, int m) {
  const std::size_t n = std::size_t{1} << m;
  const double sd = std::sqrt(1.0 / static_cast<double>(n));
  std::normal_distribution<double> normal(0.0, sd);
  std::vector<double> v((n + 1) * dim, 0.0);
  for (std::size_t i = 1; i <= n; ++i)
    for (int c = 0; c < dim; ++c) v[i * dim + c] = v[(i - 1) * dim + c] + normal(rng);
  return GridPath(uniform_grid(n), dim, std::move(v));
}

std::mt19937_64 sub_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

GridRoughPath sample_brownian_rough_path(int dim, int dyadic_level, std::uint64_t seed,
                                         int level) {
  if (dim < 1) throw Error(ErrorKind::kDomain, "Brownian dimension must be >= 1");
  if (dyadic_level < 0 || dyadic_level > 14)
    throw Error(ErrorKind::kDomain, "dyadic level must lie in [0, 14]");
  auto rng = sub_engine(seed, 0);
  return lift_piecewise_linear(brownian_path(rng, dim, dyadic_level), level);
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = static_cast<int>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  if (threads == 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t k; !failed && (k = next++) < count;) {
        try {
          fn(k);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// ---- functionals -------------------------------------------------------------

std::vector<double> PathFunctional::gradient(std::span<const double> states) const {
  std::vector<double> y(states.begin(), states.end()), g(states.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(y[i]));
    const double keep = y[i];
    y[i] = keep + h;
    const double up = value(y);
    y[i] = keep - h;
    const double dn = value(y);
    y[i] = keep;
    g[i] = (up - dn) / (2 * h);
  }
  return g;
}

namespace {

class QuadraticFunctional : public PathFunctional {
 public:
  QuadraticFunctional(std::vector<double> p, std::vector<double> q, double c)
      : p_(std::move(p)), q_(std::move(q)), c_(c) {
    if (!p_.empty() && p_.size() != q_.size() * q_.size())
      throw Error(ErrorKind::kShape, "quadratic functional: P must be n x n for q of size n");
  }
  double value(std::span<const double> z) const override {
    check(z);
    double s = c_;
    const std::size_t n = q_.size();
    for (std::size_t i = 0; i < n; ++i) {
      s += q_[i] * z[i];
      if (p_.empty()) continue;
      double r = 0.0;
      for (std::size_t j = 0; j < n; ++j) r += p_[i * n + j] * z[j];
      s += 0.5 * z[i] * r;
    }
    return s;
  }
  std::vector<double> gradient(std::span<const double> z) const override {
    check(z);
    const std::size_t n = q_.size();
    std::vector<double> g(q_);
    if (!p_.empty())
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) g[i] += 0.5 * (p_[i * n + j] + p_[j * n + i]) * z[j];
    return g;
  }

 private:
  void check(std::span<const double> z) const {
    if (z.size() != q_.size()) throw Error(ErrorKind::kShape, "functional: state table size");
  }
  std::vector<double> p_;
  std::vector<double> q_;
  double c_;
};

class ConstantFunctional : public PathFunctional {
 public:
  explicit ConstantFunctional(double c) : c_(c) {}
  double value(std::span<const double>) const override { return c_; }
  std::vector<double> gradient(std::span<const double> z) const override {
    return std::vector<double>(z.size(), 0.0);
  }

 private:
  double c_;
};

class FunctionFunctional : public PathFunctional {
 public:
  explicit FunctionFunctional(std::function<double(std::span<const double>)> f)
      : f_(std::move(f)) {}
  double value(std::span<const double> z) const override { return f_(z); }

 private:
  std::function<double(std::span<const double>)> f_;
};

}  // namespace

FunctionalPtr make_constant_functional(double c) { return std::make_shared<ConstantFunctional>(c); }

FunctionalPtr make_quadratic_functional(std::vector<double> p, std::vector<double> q, double c) {
  return std::make_shared<QuadraticFunctional>(std::move(p), std::move(q), c);
}

FunctionalPtr make_terminal_quadratic(std::size_t points, int w, double a, std::vector<double> c) {
  if (c.empty()) c.assign(w, 0.0);
  if (static_cast<int>(c.size()) != w || points < 1)
    throw Error(ErrorKind::kShape, "terminal quadratic: c must have W entries");
  const std::size_t n = points * w;
  std::vector<double> p(n * n, 0.0), q(n, 0.0);
  for (int k = 0; k < w; ++k) {
    const std::size_t i = (points - 1) * w + k;
    p[i * n + i] = a;
    q[i] = c[k];
  }
  return make_quadratic_functional(std::move(p), std::move(q));
}

FunctionalPtr make_cm_pairing(std::span<const double> times, int w, std::vector<double> h,
                              double scale) {
  const std::size_t pts = times.size();
  if (h.size() != pts * w) throw Error(ErrorKind::kShape, "cm pairing: h must match the grid");
  std::vector<double> q(pts * w, 0.0);
  for (std::size_t i = 0; i + 1 < pts; ++i) {
    const double dt = times[i + 1] - times[i];
    for (int c = 0; c < w; ++c) {
      const double dh = (h[(i + 1) * w + c] - h[i * w + c]) / dt;
      q[(i + 1) * w + c] -= scale * dh;
      q[i * w + c] += scale * dh;
    }
  }
  return make_quadratic_functional({}, std::move(q));
}

FunctionalPtr make_function_functional(std::function<double(std::span<const double>)> f) {
  return std::make_shared<FunctionFunctional>(std::move(f));
}

FunctionalPtr functional_from_json(const nlohmann::json& spec, std::span<const double> times,
                                   int w) {
  try {
    if (!spec.is_object()) throw Error(ErrorKind::kConfig, "functional spec must be an object");
    const auto family = spec.at("family").get<std::string>();
    if (family == "constant") return make_constant_functional(spec.value("value", 0.0));
    if (family == "quadratic")
      return make_quadratic_functional(spec.value("p", std::vector<double>{}),
                                       spec.at("q").get<std::vector<double>>(), spec.value("c", 0.0));
    if (family == "terminal_quadratic")
      return make_terminal_quadratic(times.size(), w, spec.at("a").get<double>(),
                                     spec.value("c", std::vector<double>{}));
    if (family == "cm_pairing")
      return make_cm_pairing(times, w, spec.at("h").get<std::vector<double>>(),
                             spec.value("scale", 1.0));
    throw Error(ErrorKind::kConfig, "unknown functional family '" + family + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("functional spec: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kShape) throw Error(ErrorKind::kConfig, e.what());
    throw;
  }
}

// ---- skeleton ------------------------------------------------------------------

void validate(const LaplaceProblem& pr) {
  if (!pr.sigma || !pr.b || !pr.F || !pr.G)
    throw Error(ErrorKind::kConfig, "laplace problem needs sigma, b, F and G");
  const int w = pr.w();
  if (w < 1 || pr.sigma->point_dim() != w || pr.sigma->out_dim() != w ||
      pr.b->point_dim() != w || pr.b->out_dim() != w || pr.b->drive_dim() != 1)
    throw Error(ErrorKind::kConfig, "laplace problem: sigma, b and y0 shapes disagree");
  if (pr.cm_grid.size() < 2 || pr.cm_grid.front() != 0.0)
    throw Error(ErrorKind::kConfig, "cm grid must start at 0 and have >= 2 points");
  for (std::size_t i = 1; i < pr.cm_grid.size(); ++i)
    if (!(pr.cm_grid[i] > pr.cm_grid[i - 1]))
      throw Error(ErrorKind::kConfig, "cm grid must be strictly increasing");
  if (pr.substeps < 1) throw Error(ErrorKind::kConfig, "substeps must be >= 1");
}

namespace {

Skeleton skeleton_with(const LaplaceProblem& pr, std::span<const double> h, double eps, int sub) {
  const int v = pr.v(), w = pr.w();
  const auto& tg = pr.cm_grid;
  const std::size_t m = tg.size() - 1;
  if (h.size() != (m + 1) * v) throw Error(ErrorKind::kShape, "skeleton: h must match the cm grid");
  Skeleton out;
  out.times.reserve(m * sub + 1);
  out.states.reserve((m * sub + 1) * w);
  out.times.push_back(tg[0]);
  out.states.insert(out.states.end(), pr.y0.begin(), pr.y0.end());
  out.cm_states = out.states;
  std::vector<double> y(pr.y0), k1(w), k2(w), k3(w), k4(w), tmp(w), hdot(v);
  std::vector<double> sig(static_cast<std::size_t>(w) * v), bb(w);
  auto rhs = [&](std::span<const double> p, std::vector<double>& out_) {
    pr.sigma->eval(0, 0, eps, p, sig);
    pr.b->eval(0, 0, eps, p, bb);
    for (int o = 0; o < w; ++o) {
      double s = bb[o];
      for (int c = 0; c < v; ++c) s += sig[o * v + c] * hdot[c];
      out_[o] = s;
    }
  };
  for (std::size_t i = 0; i < m; ++i) {
    const double dt = (tg[i + 1] - tg[i]) / sub;
    for (int c = 0; c < v; ++c) hdot[c] = (h[(i + 1) * v + c] - h[i * v + c]) / (tg[i + 1] - tg[i]);
    for (int s = 0; s < sub; ++s) {
      rhs(y, k1);
      for (int c = 0; c < w; ++c) tmp[c] = y[c] + 0.5 * dt * k1[c];
      rhs(tmp, k2);
      for (int c = 0; c < w; ++c) tmp[c] = y[c] + 0.5 * dt * k2[c];
      rhs(tmp, k3);
      for (int c = 0; c < w; ++c) tmp[c] = y[c] + dt * k3[c];
      rhs(tmp, k4);
      for (int c = 0; c < w; ++c) y[c] += dt / 6 * (k1[c] + 2 * k2[c] + 2 * k3[c] + k4[c]);
      out.times.push_back(s + 1 == sub ? tg[i + 1] : tg[i] + (s + 1) * dt);
      out.states.insert(out.states.end(), y.begin(), y.end());
    }
    out.cm_states.insert(out.cm_states.end(), y.begin(), y.end());
  }
  return out;
}

/// Optimisation state: h restricted to the cm points 1..m.
struct CmSpace {
  const LaplaceProblem* pr;
  std::size_t m;
  int v;
  MatrixXd gram;  // H^1 Gram matrix on the tail coordinates
  Eigen::LLT<MatrixXd> llt;

  explicit CmSpace(const LaplaceProblem& p) : pr(&p), m(p.cm_grid.size() - 1), v(p.v()) {
    const Eigen::Index n = static_cast<Eigen::Index>(m * v);
    gram = MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < m; ++i) {
      const double r = 1.0 / (p.cm_grid[i + 1] - p.cm_grid[i]);
      for (int c = 0; c < v; ++c) {
        // interval i joins point i (index i-1 in the tail, absent for i = 0) and point i+1
        const Eigen::Index b = static_cast<Eigen::Index>(i * v + c);
        gram(b, b) += r;
        if (i > 0) {
          const Eigen::Index a = b - v;
          gram(a, a) += r;
          gram(a, b) -= r;
          gram(b, a) -= r;
        }
      }
    }
    llt.compute(gram);
  }
  Eigen::Index size() const { return static_cast<Eigen::Index>(m * v); }
  std::vector<double> full(const VectorXd& x) const {
    std::vector<double> h((m + 1) * v, 0.0);
    for (Eigen::Index i = 0; i < size(); ++i) h[v + i] = x[i];
    return h;
  }
  double energy(const VectorXd& x) const { return x.dot(gram * x); }
  double objective(const VectorXd& x) const {
    const auto sk = skeleton_with(*pr, full(x), 0.0, pr->substeps);
    return pr->F->value(sk.cm_states) + 0.5 * energy(x);
  }
  /// Gradient of F(Psi^0(h)) via central differences of Psi^0 and DF.
  VectorXd f_gradient(const VectorXd& x) const {
    const auto sk = skeleton_with(*pr, full(x), 0.0, pr->substeps);
    const auto df = pr->F->gradient(sk.cm_states);
    VectorXd g(size());
    VectorXd xp = x;
    for (Eigen::Index k = 0; k < size(); ++k) {
      const double d = 1e-6 * std::max(1.0, std::abs(x[k]));
      xp[k] = x[k] + d;
      const auto up = skeleton_with(*pr, full(xp), 0.0, pr->substeps).cm_states;
      xp[k] = x[k] - d;
      const auto dn = skeleton_with(*pr, full(xp), 0.0, pr->substeps).cm_states;
      xp[k] = x[k];
      double s = 0.0;
      for (std::size_t i = 0; i < df.size(); ++i) s += df[i] * (up[i] - dn[i]);
      g[k] = s / (2 * d);
    }
    return g;
  }
  VectorXd gradient(const VectorXd& x) const { return f_gradient(x) + gram * x; }
  double dual_norm(const VectorXd& g) const { return std::sqrt(std::max(0.0, g.dot(llt.solve(g)))); }
};

struct Descent {
  VectorXd x;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
};

Descent descend(const CmSpace& cm, VectorXd x, const MinimizerConfig& cfg) {
  Descent d;
  double f = cm.objective(x);
  VectorXd g = cm.gradient(x);
  VectorXd x_prev, g_prev;
  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    if (cm.dual_norm(g) <= cfg.grad_tol) break;
    const VectorXd dir = -cm.llt.solve(g);
    double alpha = 1.0;
    if (it > 0) {
      const VectorXd s = x - x_prev, y = g - g_prev;
      const double sy = s.dot(y);
      if (sy > 0) alpha = s.dot(cm.gram * s) / sy;
    }
    const double slope = g.dot(dir);
    bool accepted = false;
    VectorXd xn;
    double fn = 0.0;
    for (int bt = 0; bt < 50; ++bt, alpha *= 0.5) {
      xn = x + alpha * dir;
      fn = cm.objective(xn);
      if (fn <= f + 1e-4 * alpha * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;  // at the noise floor of the difference gradient
    x_prev = x;
    g_prev = g;
    x = xn;
    f = fn;
    g = cm.gradient(x);
  }
  d.x = std::move(x);
  d.value = f;
  d.grad_norm = cm.dual_norm(g);
  d.iterations = it;
  return d;
}

/// H^1-orthonormal Ritz basis: the full space when small, otherwise the
/// leading Karhunen-Loeve modes sin((k - 1/2) pi t) per coordinate.
MatrixXd ritz_basis(const CmSpace& cm, int modes) {
  const Eigen::Index n = cm.size();
  if (n <= modes) {
    // columns of L^{-T}: G-orthonormal
    MatrixXd l = cm.llt.matrixL();
    return l.transpose().triangularView<Eigen::Upper>().solve(MatrixXd::Identity(n, n));
  }
  const double t_end = cm.pr->cm_grid.back();
  MatrixXd e = MatrixXd::Zero(n, modes);
  for (int a = 0; a < modes; ++a) {
    const int k = a / cm.v + 1, c = a % cm.v;
    const double f = (k - 0.5) * std::numbers::pi / t_end;
    for (std::size_t i = 0; i < cm.m; ++i) e(i * cm.v + c, a) = std::sin(f * cm.pr->cm_grid[i + 1]);
  }
  // Gram-Schmidt in the G inner product
  for (int a = 0; a < modes; ++a) {
    for (int b = 0; b < a; ++b) e.col(a) -= e.col(b).dot(cm.gram * e.col(a)) * e.col(b);
    e.col(a) /= std::sqrt(e.col(a).dot(cm.gram * e.col(a)));
  }
  return e;
}

double hessian_floor(const CmSpace& cm, const VectorXd& x, int modes) {
  const MatrixXd e = ritz_basis(cm, modes);
  const Eigen::Index k = e.cols();
  MatrixXd r(k, k);
  const double d = 1e-4;
  for (Eigen::Index b = 0; b < k; ++b) {
    const VectorXd gp = cm.f_gradient(x + d * e.col(b));
    const VectorXd gm = cm.f_gradient(x - d * e.col(b));
    r.col(b) = e.transpose() * (gp - gm) / (2 * d);
  }
  const MatrixXd sym = 0.5 * (r + r.transpose()) + MatrixXd::Identity(k, k);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

Skeleton skeleton(const LaplaceProblem& problem, std::span<const double> h, double eps) {
  validate(problem);
  return skeleton_with(problem, h, eps, problem.substeps);
}

double cm_energy(std::span<const double> times, int dim, std::span<const double> h) {
  if (h.size() != times.size() * dim) throw Error(ErrorKind::kShape, "cm_energy: size mismatch");
  double e = 0.0;
  for (std::size_t i = 0; i + 1 < times.size(); ++i)
    for (int c = 0; c < dim; ++c) {
      const double d = h[(i + 1) * dim + c] - h[i * dim + c];
      e += d * d / (times[i + 1] - times[i]);
    }
  return e;
}

RateResult rate_functional(const LaplaceProblem& pr, std::span<const double> y, double tol) {
  validate(pr);
  const int v = pr.v(), w = pr.w();
  const std::size_t m = pr.cm_grid.size() - 1;
  RateResult out;
  out.approximate = v != w;
  const double inf = std::numeric_limits<double>::infinity();
  if (y.size() != (m + 1) * w) {
    out.value = inf;
    out.residual = inf;
    return out;
  }
  double start_gap = 0.0;
  for (int c = 0; c < w; ++c) start_gap = std::max(start_gap, std::abs(y[c] - pr.y0[c]));
  if (start_gap > tol) {
    out.value = inf;
    out.residual = start_gap;
    return out;
  }
  // explicit midpoint inversion as the starting guess
  std::vector<double> h((m + 1) * v, 0.0), mid(w), sig(static_cast<std::size_t>(w) * v), bb(w);
  for (std::size_t i = 0; i < m; ++i) {
    const double dt = pr.cm_grid[i + 1] - pr.cm_grid[i];
    for (int c = 0; c < w; ++c) mid[c] = 0.5 * (y[i * w + c] + y[(i + 1) * w + c]);
    pr.sigma->eval(0, 0, 0.0, mid, sig);
    pr.b->eval(0, 0, 0.0, mid, bb);
    MatrixXd s(w, v);
    VectorXd rhs(w);
    for (int o = 0; o < w; ++o) {
      for (int c = 0; c < v; ++c) s(o, c) = sig[o * v + c];
      rhs[o] = y[(i + 1) * w + o] - y[i * w + o] - bb[o] * dt;
    }
    const VectorXd dh = s.completeOrthogonalDecomposition().solve(rhs);
    for (int c = 0; c < v; ++c) h[(i + 1) * v + c] = h[i * v + c] + dh[c];
  }
  auto residual = [&](const std::vector<double>& hh, VectorXd& r) {
    const auto sk = skeleton_with(pr, hh, 0.0, pr.substeps);
    r.resize(static_cast<Eigen::Index>(m * w));
    for (std::size_t i = 0; i < m * w; ++i) r[i] = sk.cm_states[w + i] - y[w + i];
  };
  VectorXd r;
  residual(h, r);
  for (int it = 0; it < 40 && r.lpNorm<Eigen::Infinity>() > 1e-3 * tol; ++it) {
    MatrixXd jac(m * w, m * v);
    auto hp = h;
    for (std::size_t k = 0; k < m * v; ++k) {
      const double d = 1e-6 * std::max(1.0, std::abs(h[v + k]));
      VectorXd up, dn;
      hp[v + k] = h[v + k] + d;
      residual(hp, up);
      hp[v + k] = h[v + k] - d;
      residual(hp, dn);
      hp[v + k] = h[v + k];
      jac.col(static_cast<Eigen::Index>(k)) = (up - dn) / (2 * d);
    }
    const VectorXd step = jac.completeOrthogonalDecomposition().solve(r);
    for (std::size_t k = 0; k < m * v; ++k) h[v + k] -= step[k];
    const double before = r.lpNorm<Eigen::Infinity>();
    residual(h, r);
    if (r.lpNorm<Eigen::Infinity>() > 0.999 * before) break;
  }
  out.residual = r.lpNorm<Eigen::Infinity>();
  out.h = h;
  out.value = out.residual <= tol ? 0.5 * cm_energy(pr.cm_grid, v, h) : inf;
  return out;
}

MinimizerResult find_minimizer(const LaplaceProblem& pr, const MinimizerConfig& cfg) {
  validate(pr);
  if (cfg.starts < 1) throw Error(ErrorKind::kConfig, "minimizer needs at least one start");
  const CmSpace cm(pr);
  const MatrixXd l = cm.llt.matrixL();
  auto rng = sub_engine(cfg.seed, 0);
  std::normal_distribution<double> normal;
  std::vector<Descent> runs;
  for (int s = 0; s < cfg.starts; ++s) {
    VectorXd x0 = VectorXd::Zero(cm.size());
    if (s > 0) {
      VectorXd z(cm.size());
      for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
      x0 = cfg.start_scale * l.transpose().triangularView<Eigen::Upper>().solve(z);
    }
    runs.push_back(descend(cm, x0, cfg));
  }
  const auto best = std::min_element(runs.begin(), runs.end(),
                                     [](const Descent& a, const Descent& b) { return a.value < b.value; });
  MinimizerResult out;
  const double scale = 1.0 + std::sqrt(cm.energy(best->x));
  for (const auto& r : runs) {
    out.start_values.push_back(r.value);
    const VectorXd diff = r.x - best->x;
    if (std::sqrt(cm.energy(diff)) > cfg.agree_tol * scale) out.unique = false;
  }
  if (!out.unique)
    spdlog::warn("find_minimizer: starts disagree, the minimizer may not be unique");
  out.lambda = cm.full(best->x);
  out.phi = skeleton_with(pr, out.lambda, 0.0, pr.substeps);
  out.value = best->value;
  out.grad_norm = best->grad_norm;
  out.iterations = best->iterations;
  out.hessian_floor = hessian_floor(cm, best->x, cfg.ritz_modes);

  // (H3): |DF| on the r-ball around phi
  out.h3_radius = cfg.h3_radius;
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int s = 0; s < 8; ++s) {
    auto y = out.phi.cm_states;
    for (std::size_t i = static_cast<std::size_t>(pr.w()); i < y.size(); ++i)
      y[i] += cfg.h3_radius * (s == 0 ? 0.0 : unif(rng));
    out.h3_bound = std::max(out.h3_bound, l1_norm(pr.F->gradient(y)));
  }
  if (!(out.hessian_floor > 0.0))
    throw Error(ErrorKind::kHypothesis,
                "minimizer: Hessian of F o Psi^0 + |.|^2/2 is not positive (floor " +
                    std::to_string(out.hessian_floor) + ")");
  return out;
}

XiResult xi_and_c(const LaplaceProblem& pr, const MinimizerResult& res) {
  validate(pr);
  const int v = pr.v(), w = pr.w();
  const std::size_t m = pr.cm_grid.size() - 1;
  const int sub = std::max(pr.substeps, static_cast<int>((4096 + m - 1) / m));
  const auto sk = skeleton_with(pr, res.lambda, 0.0, sub);
  const std::size_t pts = sk.times.size();

  // driver (Lambda, t) on the fine grid
  std::vector<double> drv(pts * (v + 1));
  for (std::size_t i = 0; i < m; ++i)
    for (int s = 0; s <= sub; ++s) {
      const std::size_t k = i * sub + s;
      const double th = static_cast<double>(s) / sub;
      for (int c = 0; c < v; ++c)
        drv[k * (v + 1) + c] = (1 - th) * res.lambda[i * v + c] + th * res.lambda[(i + 1) * v + c];
      drv[k * (v + 1) + v] = sk.times[k] - sk.times[0];
    }
  const GridPath x(sk.times, v + 1, std::move(drv));

  std::vector<double> om(pts * w * w * (v + 1)), fo(pts * w * (v + 1), 0.0);
  for (std::size_t k = 0; k < pts; ++k) {
    std::span<const double> phi(sk.states.data() + k * w, w);
    const auto ds = pr.sigma->eval(0, 1, 0.0, phi);  // [o][a][b]
    const auto db = pr.b->eval(0, 1, 0.0, phi);      // [o][a][0]
    for (int o = 0; o < w; ++o)
      for (int a = 0; a < w; ++a) {
        double* row = om.data() + ((k * w + o) * w + a) * (v + 1);
        for (int c = 0; c < v; ++c) row[c] = ds[(o * w + a) * v + c];
        row[v] = db[o * w + a];
      }
    if (pr.sigma->eps_dependent()) {
      const auto es = pr.sigma->eval(1, 0, 0.0, phi);
      for (int o = 0; o < w; ++o)
        for (int c = 0; c < v; ++c) fo[(k * w + o) * (v + 1) + c] = es[o * v + c];
    }
    if (pr.b->eps_dependent()) {
      const auto eb = pr.b->eval(1, 0, 0.0, phi);
      for (int o = 0; o < w; ++o) fo[(k * w + o) * (v + 1) + v] = eb[o];
    }
  }
  const auto omega = operator_path(young_integral(om, w * w, x), w);
  const auto forcing = young_integral(fo, w, x);
  const auto flow = linear_ode_series(omega, 1.0);
  const auto shift = duhamel_shift(forcing, flow, omega);
  std::vector<double> xi(pts * w);
  for (std::size_t i = 0; i < xi.size(); ++i) xi[i] = forcing.values()[i] + shift.values()[i];

  XiResult out;
  out.xi = GridPath(sk.times, w, std::move(xi));
  out.cm_xi.resize((m + 1) * w);
  for (std::size_t i = 0; i <= m; ++i)
    for (int c = 0; c < w; ++c) out.cm_xi[i * w + c] = out.xi.value(i * sub)[c];
  const auto df = pr.F->gradient(res.phi.cm_states);
  out.c = std::inner_product(df.begin(), df.end(), out.cm_xi.begin(), 0.0);
  return out;
}

// ---- Monte Carlo ---------------------------------------------------------------

namespace {

struct McSetup {
  std::vector<std::size_t> cm_index;  // dyadic index of each cm point
  std::vector<std::size_t> block_start;
};

McSetup mc_setup(const LaplaceProblem& pr, const SmokeConfig& cfg) {
  if (cfg.dyadic_level < 1 || cfg.dyadic_level > 14)
    throw Error(ErrorKind::kConfig, "dyadic level must lie in [1, 14]");
  if (cfg.blocks < 1 || cfg.samples < static_cast<std::size_t>(cfg.blocks))
    throw Error(ErrorKind::kConfig, "need at least one sample per block");
  McSetup s;
  const double n = static_cast<double>(std::size_t{1} << cfg.dyadic_level);
  if (std::abs(pr.cm_grid.back() - 1.0) > 1e-12)
    throw Error(ErrorKind::kConfig, "Monte Carlo needs the cm grid on [0, 1]");
  for (double t : pr.cm_grid) {
    const double k = std::round(t * n);
    if (std::abs(k - t * n) > 1e-9) throw Error(ErrorKind::kConfig, "cm grid is not dyadic");
    s.cm_index.push_back(static_cast<std::size_t>(k));
  }
  for (int b = 0; b <= cfg.blocks; ++b) s.block_start.push_back(cfg.samples * b / cfg.blocks);
  return s;
}

/// Y^eps on the dyadic grid for one Brownian sample: absolute states.
std::vector<double> solve_sample(const CoefficientPtr& h, const GridPath& wpath, double eps,
                                 std::span<const double> y0, const SolverConfig& cfg) {
  std::vector<double> scaled(wpath.values().begin(), wpath.values().end());
  for (double& x : scaled) x *= eps;
  const int level = std::max(2, static_cast<int>(std::floor(cfg.p)));
  const auto x = lift_piecewise_linear(GridPath(wpath.times(), wpath.dim(), std::move(scaled)), level);
  std::vector<double> t(wpath.times().begin(), wpath.times().end());
  const GridPath time(wpath.times(), 1, std::move(t));
  return solve(h, join(x, time), y0, cfg).states();
}

CoefficientPtr driven(const LaplaceProblem& pr, double eps) {
  const int v = pr.v(), w = pr.w();
  return std::make_shared<StackedCoefficient>(
      w, w, v + 1,
      std::vector<StackedCoefficient::Term>{{fix_epsilon(pr.sigma, eps), 0, 0, 0},
                                            {fix_epsilon(pr.b, eps), 0, 0, v}});
}

SolverConfig sample_solver(const LaplaceProblem& pr, const CoefficientPtr& h,
                           const SolverConfig& base) {
  SolverConfig cfg = base;
  if (cfg.p == 0.0) cfg.p = 2.5;
  if (cfg.rho == 0.0) {
    const double r = cfg.radius > 0 ? cfg.radius : 1.0 + l1_norm(pr.y0);
    cfg.rho = std::max(1.0, sup_norm(*h, static_cast<int>(std::floor(cfg.p)) + 1, r).value);
  }
  return cfg;
}

}  // namespace

SmokeReport laplace_smoke(const LaplaceProblem& pr, const MinimizerResult& mr, const XiResult& xr,
                          const SmokeConfig& cfg) {
  validate(pr);
  const auto setup = mc_setup(pr, cfg);
  const int v = pr.v(), w = pr.w();
  SmokeReport rep;
  for (double eps : cfg.epsilons) {
    if (!(eps > 0.0)) throw Error(ErrorKind::kConfig, "epsilons must be positive");
    const auto h = driven(pr, eps);
    const auto scfg = sample_solver(pr, h, cfg.solver);
    std::vector<double> logw(cfg.samples);
    parallel_for(cfg.blocks, cfg.threads, [&](std::size_t b) {
      auto rng = sub_engine(cfg.seed, b);
      std::vector<double> cm((pr.cm_grid.size()) * w);
      for (std::size_t k = setup.block_start[b]; k < setup.block_start[b + 1]; ++k) {
        const auto wp = brownian_path(rng, v, cfg.dyadic_level);
        const auto y = solve_sample(h, wp, eps, pr.y0, scfg);
        for (std::size_t i = 0; i < setup.cm_index.size(); ++i)
          std::copy_n(y.begin() + setup.cm_index[i] * w, w, cm.begin() + i * w);
        const double g = pr.G->value(cm);
        if (!(g > 0.0)) throw Error(ErrorKind::kDomain, "laplace_smoke needs G > 0");
        logw[k] = std::log(g) - (pr.F->value(cm) - mr.value) / (eps * eps);
      }
    });
    const double top = *std::max_element(logw.begin(), logw.end());
    double s1 = 0.0, s2 = 0.0;
    for (double l : logw) {
      const double e = std::exp(l - top);
      s1 += e;
      s2 += e * e;
    }
    const double n = static_cast<double>(cfg.samples);
    const double mean = s1 / n;
    const double var = std::max(0.0, s2 / n - mean * mean);
    SmokeRow row;
    row.eps = eps;
    row.value = top + std::log(mean) + xr.c / eps;
    row.stderr_value = std::sqrt(var / n) / mean;
    row.conclusive = std::isfinite(row.value) && row.stderr_value < 0.5;
    spdlog::info("laplace_smoke: eps {} value {} +- {}", eps, row.value, row.stderr_value);
    rep.rows.push_back(row);
  }
  rep.stabilized = rep.rows.size() >= 2;
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    if (!rep.rows[i].conclusive) rep.stabilized = false;
    if (i == 0) continue;
    const auto& a = rep.rows[i - 1];
    const auto& b = rep.rows[i];
    const double se = std::hypot(a.stderr_value, b.stderr_value);
    if (std::abs(a.value - b.value) > 3.0 * se) rep.stabilized = false;
  }
  return rep;
}

LargeDeviationReport large_deviation_check(const LaplaceProblem& pr, double a, double eps,
                                           const SmokeConfig& cfg, int coord) {
  validate(pr);
  const auto setup = mc_setup(pr, cfg);
  const int v = pr.v(), w = pr.w();
  if (coord < 0 || coord >= w) throw Error(ErrorKind::kConfig, "coordinate out of range");
  const double start = l1_norm(pr.y0);
  if (!(a > start)) throw Error(ErrorKind::kDomain, "level must exceed |y0|");
  const auto h = driven(pr, eps);
  const auto scfg = sample_solver(pr, h, cfg.solver);
  std::vector<std::size_t> hits(cfg.blocks, 0);
  parallel_for(cfg.blocks, cfg.threads, [&](std::size_t b) {
    auto rng = sub_engine(cfg.seed, b);
    for (std::size_t k = setup.block_start[b]; k < setup.block_start[b + 1]; ++k) {
      const auto wp = brownian_path(rng, v, cfg.dyadic_level);
      const auto y = solve_sample(h, wp, eps, pr.y0, scfg);
      for (std::size_t i = 0; i < y.size() / w; ++i)
        if (l1_norm(std::span<const double>(y.data() + i * w, w)) > a) {
          ++hits[b];
          break;
        }
    }
  });
  LargeDeviationReport rep;
  rep.hits = std::accumulate(hits.begin(), hits.end(), std::size_t{0});
  rep.probability = static_cast<double>(rep.hits) / static_cast<double>(cfg.samples);
  rep.empirical_rate = rep.hits ? -eps * eps * std::log(rep.probability)
                                : std::numeric_limits<double>::infinity();
  // straight path from y0 to the level-a boundary along `coord`
  std::vector<double> y((pr.cm_grid.size()) * w);
  for (std::size_t i = 0; i < pr.cm_grid.size(); ++i)
    for (int c = 0; c < w; ++c)
      y[i * w + c] = pr.y0[c] + (c == coord ? (a - start) * pr.cm_grid[i] : 0.0);
  rep.rate = rate_functional(pr, y).value;
  rep.relative_error = std::abs(rep.empirical_rate - rep.rate) / rep.rate;
  return rep;
}

}  // namespace roughpath
