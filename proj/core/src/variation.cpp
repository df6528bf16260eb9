#include "roughpath/variation.hpp"

#include <algorithm>
#include <cmath>

#include "roughpath/error.hpp"

namespace roughpath {

int variation_levels(double p, int level) {
  if (!(p >= 1.0)) throw Error(ErrorKind::kDomain, "variation exponent p must be >= 1");
  return std::min(level, static_cast<int>(std::floor(p)));
}

VariationSweep::VariationSweep(const GridRoughPath& x, double p, std::size_t start, int levels,
                               const GridRoughPath* y)
    : x_(&x), y_(y), p_(p), start_(start) {
  if (!(p > 0.0)) throw Error(ErrorKind::kDomain, "variation exponent must be positive");
  if (start >= x.points()) throw Error(ErrorKind::kDomain, "variation start out of range");
  levels_ = levels > 0 ? levels : variation_levels(p, x.level());
  if (levels_ > x.level()) throw Error(ErrorKind::kDomain, "variation level exceeds truncation");
  if (y && (y->dim() != x.dim() || y->level() != x.level() || y->points() != x.points()))
    throw Error(ErrorKind::kShape, "rough paths must share grid, dim and level");
  best_.push_back(std::vector<double>(levels_, 0.0));
  scratch_ = TruncatedTensor(x.dim(), x.level());
}

bool VariationSweep::advance() {
  const std::size_t b = end() + 1;
  if (b >= x_->points()) return false;
  const auto& inc_x = x_->increment(b - 1);
  for (auto& t : run_x_) {
    tensor_mul_into(t, inc_x, scratch_);
    std::swap(t, scratch_);
  }
  run_x_.push_back(inc_x);
  if (y_) {
    const auto& inc_y = y_->increment(b - 1);
    for (auto& t : run_y_) {
      tensor_mul_into(t, inc_y, scratch_);
      std::swap(t, scratch_);
    }
    run_y_.push_back(inc_y);
  }
  std::vector<double> best(levels_, 0.0);
  for (std::size_t k = 0; k < run_x_.size(); ++k) {
    const auto& prev = best_[k];
    for (int j = 1; j <= levels_; ++j) {
      auto xj = run_x_[k][j];
      double n = 0.0;
      if (y_) {
        auto yj = run_y_[k][j];
        for (std::size_t i = 0; i < xj.size(); ++i) n += std::abs(xj[i] - yj[i]);
      } else {
        for (double v : xj) n += std::abs(v);
      }
      const double w = n == 0.0 ? 0.0 : std::pow(n, p_ / j);
      best[j - 1] = std::max(best[j - 1], prev[j - 1] + w);
    }
  }
  best_.push_back(std::move(best));
  return true;
}

double VariationSweep::total() const {
  double s = 0.0;
  for (int j = 1; j <= levels_; ++j) s += sum(j);
  return s;
}

static void check_window(const GridRoughPath& rp, std::size_t first, std::size_t last) {
  if (first > last || last >= rp.points())
    throw Error(ErrorKind::kDomain, "variation window out of range");
}

double pvar_sum(const GridRoughPath& rp, int j, double p, std::size_t first, std::size_t last) {
  check_window(rp, first, last);
  if (j < 1 || j > rp.level()) throw Error(ErrorKind::kDomain, "pvar level out of range");
  VariationSweep sweep(rp, p, first, j);
  while (sweep.end() < last) sweep.advance();
  return sweep.sum(j);
}

double pvar_norm(const GridRoughPath& rp, int j, double p, std::size_t first, std::size_t last) {
  const double s = pvar_sum(rp, j, p, first, last);
  return s == 0.0 ? 0.0 : std::pow(s, j / p);
}

double pvar_norm(const GridRoughPath& rp, int j, double p) {
  return pvar_norm(rp, j, p, 0, rp.points() - 1);
}

double xi_gauge(const GridRoughPath& rp, double p, std::size_t first, std::size_t last) {
  check_window(rp, first, last);
  VariationSweep sweep(rp, p, first);
  while (sweep.end() < last) sweep.advance();
  double xi = 0.0;
  for (int j = 1; j <= sweep.levels(); ++j) {
    const double s = sweep.sum(j);
    if (s > 0.0) xi += std::pow(s, 1.0 / p);  // (s^{j/p})^{1/j}
  }
  return xi;
}

double xi_gauge(const GridRoughPath& rp, double p) { return xi_gauge(rp, p, 0, rp.points() - 1); }

double rough_distance(const GridRoughPath& x, const GridRoughPath& y, double p) {
  VariationSweep sweep(x, p, 0, 0, &y);
  while (sweep.advance()) {
  }
  double d = 0.0;
  for (int j = 1; j <= sweep.levels(); ++j) {
    const double s = sweep.sum(j);
    if (s > 0.0) d += std::pow(s, j / p);
  }
  return d;
}

double l1_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

double path_variation_sum(const GridPath& path, double q, std::size_t first, std::size_t last,
                          const VectorNorm& norm) {
  if (first > last || last >= path.points())
    throw Error(ErrorKind::kDomain, "variation window out of range");
  const int d = path.dim();
  std::vector<double> best(last - first + 1, 0.0);
  std::vector<double> diff(d);
  for (std::size_t b = first + 1; b <= last; ++b) {
    auto xb = path.value(b);
    double m = 0.0;
    for (std::size_t a = first; a < b; ++a) {
      auto xa = path.value(a);
      for (int c = 0; c < d; ++c) diff[c] = xb[c] - xa[c];
      const double n = norm(diff);
      m = std::max(m, best[a - first] + (n == 0.0 ? 0.0 : std::pow(n, q)));
    }
    best[b - first] = m;
  }
  return best.back();
}

double qvar_norm(const GridPath& path, double q, const VectorNorm& norm) {
  const double s = path_variation_sum(path, q, 0, path.points() - 1, norm);
  return s == 0.0 ? 0.0 : std::pow(s, 1.0 / q);
}

GridPath project_piecewise_linear(const GridPath& path, std::span<const std::size_t> keep) {
  if (keep.size() < 2 || keep.front() != 0 || keep.back() != path.points() - 1)
    throw Error(ErrorKind::kInvalidPartition, "partition must contain both end points");
  for (std::size_t k = 1; k < keep.size(); ++k)
    if (keep[k] <= keep[k - 1])
      throw Error(ErrorKind::kInvalidPartition, "partition points must be increasing");
  const int d = path.dim();
  const auto& t = path.times();
  std::vector<double> v(path.points() * d);
  for (std::size_t k = 1; k < keep.size(); ++k) {
    const std::size_t a = keep[k - 1];
    const std::size_t b = keep[k];
    auto xa = path.value(a);
    auto xb = path.value(b);
    for (std::size_t i = a; i <= b; ++i) {
      const double w = (t[i] - t[a]) / (t[b] - t[a]);
      for (int c = 0; c < d; ++c) v[i * d + c] = i == b ? xb[c] : xa[c] + w * (xb[c] - xa[c]);
    }
  }
  return GridPath(t, d, std::move(v));
}

double control_eval(const Control& cv, std::size_t a, std::size_t b) {
  if (a > b) throw Error(ErrorKind::kDomain, "control evaluated with s > t");
  if (b >= cv.points()) throw Error(ErrorKind::kDomain, "control index out of range");
  if (a == b) return 0.0;
  return cv.value(a, b);
}

CanonicalControl::CanonicalControl(GridRoughPath x, const GridPath* lambda, double p, double q,
                                   double kappa)
    : x_(std::move(x)), p_(p), q_(q), kappa_(kappa) {
  if (lambda) {
    if (lambda->times() != x_.times())
      throw Error(ErrorKind::kShape, "control inputs must share the time grid");
    lambda_ = std::make_unique<GridPath>(*lambda);
  }
  if (kappa_ <= 0.0) {
    kappa_ = xi_gauge(x_, p_);
    if (kappa_ == 0.0) kappa_ = 1.0;
  }
}

std::vector<double> CanonicalControl::row(std::size_t a) const {
  const std::size_t n = x_.points();
  std::vector<double> out(n - a, 0.0);
  VariationSweep sweep(x_, p_, a);
  const double scale = std::pow(kappa_, -p_);
  while (sweep.advance()) out[sweep.end() - a] = scale * sweep.total();
  if (lambda_) {
    // same DP for the level-1 Lambda path, all ends at once
    const int d = lambda_->dim();
    std::vector<double> best(n - a, 0.0);
    std::vector<double> diff(d);
    for (std::size_t b = a + 1; b < n; ++b) {
      auto xb = lambda_->value(b);
      double m = 0.0;
      for (std::size_t s = a; s < b; ++s) {
        auto xs = lambda_->value(s);
        for (int c = 0; c < d; ++c) diff[c] = xb[c] - xs[c];
        const double nn = l1_norm(diff);
        m = std::max(m, best[s - a] + (nn == 0.0 ? 0.0 : std::pow(nn, q_)));
      }
      best[b - a] = m;
      out[b - a] += m;
    }
  }
  return out;
}

double CanonicalControl::value(std::size_t a, std::size_t b) const {
  VariationSweep sweep(x_, p_, a);
  while (sweep.end() < b) sweep.advance();
  double w = std::pow(kappa_, -p_) * sweep.total();
  if (lambda_) w += path_variation_sum(*lambda_, q_, a, b);
  return w;
}

TableControl::TableControl(std::size_t points, std::vector<double> table)
    : points_(points), table_(std::move(table)) {
  if (table_.size() != points_ * points_)
    throw Error(ErrorKind::kShape, "control table must be points x points");
}

}  // namespace roughpath
