#include "roughpath/young.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <spdlog/spdlog.h>

#include "roughpath/error.hpp"
#include "roughpath/lift.hpp"

namespace roughpath {

namespace {

using Mat = Eigen::MatrixXd;
using RowMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

Mat load(std::span<const double> v, int m) { return RowMap(v.data(), m, m); }

void store(const Mat& a, std::span<double> out) {
  const int m = static_cast<int>(a.rows());
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) out[r * m + c] = a(r, c);
}

double op_norm(const Mat& a) { return a.cwiseAbs().colwise().sum().maxCoeff(); }

/// sum_k z^k / (k + shift)! truncated once terms stop mattering.
Mat phi(const Mat& z, int shift) {
  const int m = static_cast<int>(z.rows());
  double f = 1.0;
  for (int i = 2; i <= shift; ++i) f *= i;
  Mat term = Mat::Identity(m, m) / f;
  Mat sum = term;
  const double a = op_norm(z);
  for (int k = 1; k < 200; ++k) {
    term = z * term / static_cast<double>(k + shift);
    sum += term;
    if (op_norm(term) <= 1e-17 * std::max(1.0, op_norm(sum)) && a / (k + shift + 1) < 0.5) break;
  }
  return sum;
}

}  // namespace

OperatorPath::OperatorPath(std::vector<double> times, int dim, std::vector<double> values)
    : times_(std::move(times)), dim_(dim), values_(std::move(values)) {
  if (dim < 1) throw Error(ErrorKind::kShape, "operator path dimension must be >= 1");
  if (times_.size() < 2) throw Error(ErrorKind::kShape, "operator path needs two grid points");
  if (values_.size() != times_.size() * dim * dim)
    throw Error(ErrorKind::kShape, "operator path values must be points x dim x dim");
  for (std::size_t i = 1; i < times_.size(); ++i)
    if (!(times_[i] > times_[i - 1]))
      throw Error(ErrorKind::kInvalidPartition, "operator path times must increase");
}

OperatorPath OperatorPath::identity(std::vector<double> times, int dim) {
  std::vector<double> v(times.size() * dim * dim, 0.0);
  for (std::size_t i = 0; i < times.size(); ++i)
    for (int c = 0; c < dim; ++c) v[i * dim * dim + c * dim + c] = 1.0;
  return OperatorPath(std::move(times), dim, std::move(v));
}

OperatorPath OperatorPath::zero(std::vector<double> times, int dim) {
  std::vector<double> v(times.size() * dim * dim, 0.0);
  return OperatorPath(std::move(times), dim, std::move(v));
}

OperatorPath operator_path(const GridPath& flat, int dim) {
  if (flat.dim() != dim * dim) throw Error(ErrorKind::kShape, "operator path needs dim^2 columns");
  return OperatorPath(flat.times(), dim, {flat.values().begin(), flat.values().end()});
}

GridPath young_integral(std::span<const double> integrand, int out_dim, const GridPath& x) {
  const int d = x.dim();
  const std::size_t n = x.points();
  if (integrand.size() != n * out_dim * d)
    throw Error(ErrorKind::kShape, "young_integral: integrand must be points x out x dim");
  std::vector<double> v(n * out_dim, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto dx = x.increment(i);
    const double* a0 = integrand.data() + i * out_dim * d;
    const double* a1 = a0 + out_dim * d;
    for (int o = 0; o < out_dim; ++o) {
      double s = 0.0;
      for (int b = 0; b < d; ++b) s += 0.5 * (a0[o * d + b] + a1[o * d + b]) * dx[b];
      v[(i + 1) * out_dim + o] = v[i * out_dim + o] + s;
    }
  }
  return GridPath(x.times(), out_dim, std::move(v));
}

GridPath young_integral(const OperatorPath& omega, std::span<const double> y) {
  const int m = omega.dim();
  const std::size_t n = omega.points();
  if (y.size() != n * m) throw Error(ErrorKind::kShape, "young_integral: vector path size");
  std::vector<double> v(n * m, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    auto w0 = omega.value(i), w1 = omega.value(i + 1);
    for (int r = 0; r < m; ++r) {
      double s = 0.0;
      for (int c = 0; c < m; ++c)
        s += (w1[r * m + c] - w0[r * m + c]) * 0.5 * (y[i * m + c] + y[(i + 1) * m + c]);
      v[(i + 1) * m + r] = v[i * m + r] + s;
    }
  }
  return GridPath(omega.times(), m, std::move(v));
}

double series_constant(double q) {
  if (!(q >= 1.0 && q < 2.0)) throw Error(ErrorKind::kRegularity, "series constant needs 1 <= q < 2");
  return 1.0 + std::pow(2.0, 2.0 / q) * std::riemann_zeta(2.0 / q);
}

LinearFlow linear_ode_series(const OperatorPath& omega, double q) {
  const double c = series_constant(q);
  const int m = omega.dim();
  const std::size_t n = omega.points();
  std::vector<Mat> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = load(omega.value(i), m);

  // greedy pieces: extend while c * omega(T, b)^{1/q} <= 1/2
  LinearFlow flow{OperatorPath::identity(omega.times(), m), OperatorPath::identity(omega.times(), m),
                  {0}, 0};
  std::vector<double> best{0.0};
  std::size_t start = 0;
  for (std::size_t b = 1; b < n; ++b) {
    double v = 0.0;
    for (std::size_t a = start; a < b; ++a)
      v = std::max(v, best[a - start] + std::pow(op_norm(w[b] - w[a]), q));
    if (b > start + 1 && c * std::pow(v, 1.0 / q) > 0.5) {
      flow.pieces.push_back(b - 1);
      start = b - 1;
      best.assign(1, 0.0);
      v = std::pow(op_norm(w[b] - w[start]), q);
    }
    best.push_back(v);
  }
  flow.pieces.push_back(n - 1);

  Mat m_base = Mat::Identity(m, m), n_base = Mat::Identity(m, m);
  double total = 0.0;
  for (std::size_t piece = 0; piece + 1 < flow.pieces.size(); ++piece) {
    const std::size_t s = flow.pieces[piece], e = flow.pieces[piece + 1];
    // q-variation of the piece and the number of terms
    std::vector<double> pv(e - s + 1, 0.0);
    for (std::size_t b = s + 1; b <= e; ++b)
      for (std::size_t a = s; a < b; ++a)
        pv[b - s] = std::max(pv[b - s], pv[a - s] + std::pow(op_norm(w[b] - w[a]), q));
    total += pv.back();
    const double k = c * std::pow(pv.back(), 1.0 / q);
    int terms = 0;
    if (k > 0.0 && k <= 0.5) {
      double tail = k / (1.0 - k);
      while (tail >= 1e-12) {
        ++terms;
        tail *= k;
      }
    } else if (k > 0.5) {
      // single interval over budget: exponential series bound
      const double a = op_norm(w[e] - w[s]);
      double t = 1.0;
      for (terms = 1; terms < 400; ++terms) {
        t *= a / terms;
        if (terms > 2 * a && t < 1e-13 * std::max(1.0, std::exp(a))) break;
      }
      spdlog::debug("linear_ode_series: interval {} exceeds the piece budget (K = {})", s, k);
    }
    flow.max_terms = std::max(flow.max_terms, terms);

    // T_k: level-k iterated integrals from s, later factors on the left for M
    std::vector<Mat> tm(terms + 1, Mat::Zero(m, m)), tn = tm;
    tm[0] = Mat::Identity(m, m);
    tn[0] = Mat::Identity(m, m);
    std::vector<Mat> ep(terms + 1), en(terms + 1);
    for (std::size_t i = s; i < e; ++i) {
      const Mat d = w[i + 1] - w[i];
      ep[0] = en[0] = Mat::Identity(m, m);
      for (int j = 1; j <= terms; ++j) {
        ep[j] = d * ep[j - 1] / j;
        en[j] = -d * en[j - 1] / j;
      }
      for (int kk = terms; kk >= 1; --kk) {
        Mat a = tm[kk], b = tn[kk];
        for (int j = 1; j <= kk; ++j) {
          a += ep[j] * tm[kk - j];
          b += tn[kk - j] * en[j];
        }
        tm[kk] = std::move(a);
        tn[kk] = std::move(b);
      }
      Mat sm = Mat::Zero(m, m), sn = Mat::Zero(m, m);
      for (int kk = 0; kk <= terms; ++kk) {
        sm += tm[kk];
        sn += tn[kk];
      }
      store(sm * m_base, flow.m.value(i + 1));
      store(n_base * sn, flow.n.value(i + 1));
    }
    m_base = load(flow.m.value(e), m);
    n_base = load(flow.n.value(e), m);
  }
  const double bound = std::pow(2.0, q) * std::pow(c, q) * total;
  spdlog::debug("linear_ode_series: {} pieces, count bound {:.3g}, {} terms",
                flow.pieces.size() - 1, bound + 1.0, flow.max_terms);
  return flow;
}

GridPath duhamel_shift(const GridPath& x, const LinearFlow& flow, const OperatorPath& omega) {
  const int m = omega.dim();
  if (x.dim() != m || x.times() != omega.times() || flow.m.points() != x.points())
    throw Error(ErrorKind::kShape, "duhamel: X, Omega and the flow must share grid and dimension");
  const std::size_t n = x.points();
  std::vector<double> h(n * m, 0.0);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(m);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const Mat d = load(omega.value(i + 1), m) - load(omega.value(i), m);
    const auto dx = x.increment(i);
    const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(dx.data(), m);
    acc += load(flow.n.value(i), m) * (phi(-d, 1) * b);
    const Eigen::VectorXd y = load(flow.m.value(i + 1), m) * acc;
    auto xv = x.value(i + 1);
    for (int r = 0; r < m; ++r) h[(i + 1) * m + r] = y(r) - xv[r];
  }
  return GridPath(x.times(), m, std::move(h));
}

GridRoughPath duhamel(const GridRoughPath& x, const OperatorPath& omega, const LinearFlow& flow) {
  return translate(x, duhamel_shift(x.level1(), flow, omega));
}

GridRoughPath duhamel(const GridRoughPath& x, const OperatorPath& omega, double q) {
  return duhamel(x, omega, linear_ode_series(omega, q));
}

double duhamel_residual(const GridPath& y, const GridPath& x, const OperatorPath& omega) {
  const int m = omega.dim();
  if (y.dim() != m || x.dim() != m || y.points() != omega.points() || x.points() != omega.points())
    throw Error(ErrorKind::kShape, "duhamel_residual: shapes differ");
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < y.points(); ++i) {
    const Mat d = load(omega.value(i + 1), m) - load(omega.value(i), m);
    const auto dx = x.increment(i);
    const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(dx.data(), m);
    const Eigen::VectorXd y0 = Eigen::Map<const Eigen::VectorXd>(y.value(i).data(), m);
    const Eigen::VectorXd y1 = Eigen::Map<const Eigen::VectorXd>(y.value(i + 1).data(), m);
    // int dOmega Y over the interval along y(u) = e^{Au} y0 + u phi1(Au) b/h
    const Eigen::VectorXd integral = d * (phi(d, 1) * y0 + phi(d, 2) * b);
    worst = std::max(worst, (y1 - y0 - integral - b).lpNorm<1>());
  }
  return worst;
}

}  // namespace roughpath
