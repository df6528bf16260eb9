#include "roughpath/coefficient.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "roughpath/error.hpp"
#include "roughpath/quadrature.hpp"
#include "roughpath/tensor.hpp"

namespace roughpath {

namespace {

constexpr int kAnalyticOrder = 8;

/// Decodes flat index `flat` in [0, base^k) into k digits.
void digits(std::size_t flat, int base, int k, int* out) {
  for (int s = k - 1; s >= 0; --s) {
    out[s] = static_cast<int>(flat % base);
    flat /= base;
  }
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

std::size_t SmoothCoefficient::size(int k) const {
  return static_cast<std::size_t>(out_dim()) * ipow(point_dim(), k) * drive_dim();
}

std::vector<double> SmoothCoefficient::eval(int j, int k, double eps,
                                            std::span<const double> y) const {
  std::vector<double> out(size(k));
  eval(j, k, eps, y, out);
  return out;
}

void SmoothCoefficient::check(int j, int k, std::span<const double> y,
                              std::span<double> out) const {
  if (j < 0 || k < 0 || j + k > max_order())
    throw Error(ErrorKind::kDerivativeOrder,
                "coefficient derivative of order " + std::to_string(j + k) +
                    " exceeds supported order " + std::to_string(max_order()));
  if (static_cast<int>(y.size()) != point_dim() || out.size() != size(k))
    throw Error(ErrorKind::kShape, "coefficient evaluation buffer has the wrong size");
}

double operator_norm(std::span<const double> deriv, int out_dim) {
  const std::size_t cols = deriv.size() / out_dim;
  double m = 0.0;
  for (std::size_t c = 0; c < cols; ++c) {
    double s = 0.0;
    for (int o = 0; o < out_dim; ++o) s += std::abs(deriv[o * cols + c]);
    m = std::max(m, s);
  }
  return m;
}

SupNormReport sup_norm(const SmoothCoefficient& f, int k, double radius, std::size_t samples,
                       double eps) {
  static constexpr std::array<int, 16> kPrimes = {2,  3,  5,  7,  11, 13, 17, 19,
                                                  23, 29, 31, 37, 41, 43, 47, 53};
  const int d = f.point_dim();
  SupNormReport rep{k, radius, 0.0, samples + 1};
  std::vector<double> y(d, 0.0);
  auto visit = [&] {
    for (int j = 0; j <= k; ++j)
      rep.value = std::max(rep.value, operator_norm(f.eval(0, j, eps, y), f.out_dim()));
  };
  visit();
  for (std::size_t i = 1; i <= samples; ++i) {
    double l1 = 0.0, linf = 0.0;
    for (int c = 0; c < d; ++c) {
      // radical inverse in base prime[c]
      const int base = kPrimes[c % kPrimes.size()];
      double inv = 1.0 / base, r = 0.0;
      for (std::size_t n = i; n > 0; n /= base, inv /= base) r += static_cast<double>(n % base) * inv;
      y[c] = 2.0 * r - 1.0;
      l1 += std::abs(y[c]);
      linf = std::max(linf, std::abs(y[c]));
    }
    // radial map of the cube onto the l1 ball
    const double scale = l1 > 0.0 ? radius * linf / l1 : 0.0;
    for (double& v : y) v *= scale;
    visit();
  }
  return rep;
}

// ---- constant / linear ------------------------------------------------------

namespace {

class ConstantCoefficient : public SmoothCoefficient {
 public:
  ConstantCoefficient(int p, int o, int v, std::vector<double> a)
      : p_(p), o_(o), v_(v), a_(std::move(a)) {
    if (a_.size() != static_cast<std::size_t>(o) * v)
      throw Error(ErrorKind::kShape, "constant coefficient matrix must be out x drive");
  }
  int point_dim() const override { return p_; }
  int drive_dim() const override { return v_; }
  int out_dim() const override { return o_; }
  int max_order() const override { return kAnalyticOrder; }
  void eval(int j, int k, double, std::span<const double> y,
            std::span<double> out) const override {
    check(j, k, y, out);
    std::fill(out.begin(), out.end(), 0.0);
    if (j == 0 && k == 0) std::copy(a_.begin(), a_.end(), out.begin());
  }

 private:
  int p_, o_, v_;
  std::vector<double> a_;
};

class LinearCoefficient : public SmoothCoefficient {
 public:
  LinearCoefficient(int p, int o, int v, std::vector<double> a, std::vector<double> b)
      : p_(p), o_(o), v_(v), a_(std::move(a)), b_(std::move(b)) {
    if (a_.empty()) a_.assign(static_cast<std::size_t>(o) * v, 0.0);
    if (a_.size() != static_cast<std::size_t>(o) * v ||
        b_.size() != static_cast<std::size_t>(o) * p * v)
      throw Error(ErrorKind::kShape, "linear coefficient arrays have the wrong size");
  }
  int point_dim() const override { return p_; }
  int drive_dim() const override { return v_; }
  int out_dim() const override { return o_; }
  int max_order() const override { return kAnalyticOrder; }
  void eval(int j, int k, double, std::span<const double> y,
            std::span<double> out) const override {
    check(j, k, y, out);
    std::fill(out.begin(), out.end(), 0.0);
    if (j != 0) return;
    if (k == 0) {
      for (int o = 0; o < o_; ++o)
        for (int b = 0; b < v_; ++b) {
          double s = a_[o * v_ + b];
          for (int a = 0; a < p_; ++a) s += b_[(o * p_ + a) * v_ + b] * y[a];
          out[o * v_ + b] = s;
        }
    } else if (k == 1) {
      std::copy(b_.begin(), b_.end(), out.begin());
    }
  }

 private:
  int p_, o_, v_;
  std::vector<double> a_, b_;
};

// ---- polynomial ---------------------------------------------------------------

class PolynomialCoefficient : public SmoothCoefficient {
 public:
  PolynomialCoefficient(int p, int o, int v, std::vector<Monomial> terms)
      : p_(p), o_(o), v_(v), terms_(std::move(terms)) {
    for (const auto& t : terms_) {
      if (t.out < 0 || t.out >= o || t.drive < 0 || t.drive >= v ||
          static_cast<int>(t.powers.size()) != p)
        throw Error(ErrorKind::kShape, "polynomial term does not fit the coefficient shape");
      int deg = 0;
      for (int e : t.powers) {
        if (e < 0) throw Error(ErrorKind::kConfig, "polynomial exponents must be >= 0");
        deg += e;
      }
      if (deg > 4) throw Error(ErrorKind::kConfig, "polynomial degree must be <= 4");
    }
  }
  int point_dim() const override { return p_; }
  int drive_dim() const override { return v_; }
  int out_dim() const override { return o_; }
  int max_order() const override { return kAnalyticOrder; }
  void eval(int j, int k, double, std::span<const double> y,
            std::span<double> out) const override {
    check(j, k, y, out);
    std::fill(out.begin(), out.end(), 0.0);
    if (j != 0) return;
    const std::size_t tuples = ipow(p_, k);
    std::vector<int> idx(k), mult(p_);
    for (std::size_t flat = 0; flat < tuples; ++flat) {
      digits(flat, p_, k, idx.data());
      std::fill(mult.begin(), mult.end(), 0);
      for (int a : idx) ++mult[a];
      for (const auto& t : terms_) {
        double v = t.coef;
        for (int a = 0; a < p_ && v != 0.0; ++a) {
          const int e = t.powers[a];
          if (mult[a] > e) {
            v = 0.0;
            break;
          }
          for (int r = 0; r < mult[a]; ++r) v *= e - r;
          v *= std::pow(y[a], e - mult[a]);
        }
        out[(t.out * tuples + flat) * v_ + t.drive] += v;
      }
    }
  }

 private:
  int p_, o_, v_;
  std::vector<Monomial> terms_;
};

// ---- ridge -----------------------------------------------------------------

double ridge_phi(RidgeShape shape, int k, double x) {
  const double shift = k * std::numbers::pi / 2.0;
  switch (shape) {
    case RidgeShape::kSin: return std::sin(x + shift);
    case RidgeShape::kCos: return std::cos(x + shift);
    case RidgeShape::kCosSquared:
      // (1 + cos 2x) / 2
      return k == 0 ? 0.5 * (1.0 + std::cos(2.0 * x))
                    : std::ldexp(1.0, k - 1) * std::cos(2.0 * x + shift);
    case RidgeShape::kSinSquared:
      return k == 0 ? 0.5 * (1.0 - std::cos(2.0 * x))
                    : -std::ldexp(1.0, k - 1) * std::cos(2.0 * x + shift);
    case RidgeShape::kIdentity: return k == 0 ? x : (k == 1 ? 1.0 : 0.0);
  }
  return 0.0;
}

class RidgeCoefficient : public SmoothCoefficient {
 public:
  RidgeCoefficient(int p, int o, int v, std::vector<RidgeEntry> entries)
      : p_(p), o_(o), v_(v), entries_(std::move(entries)) {
    for (const auto& e : entries_)
      if (e.out < 0 || e.out >= o || e.drive < 0 || e.drive >= v ||
          static_cast<int>(e.u.size()) != p)
        throw Error(ErrorKind::kShape, "ridge entry does not fit the coefficient shape");
  }
  int point_dim() const override { return p_; }
  int drive_dim() const override { return v_; }
  int out_dim() const override { return o_; }
  int max_order() const override { return kAnalyticOrder; }
  void eval(int j, int k, double, std::span<const double> y,
            std::span<double> out) const override {
    check(j, k, y, out);
    std::fill(out.begin(), out.end(), 0.0);
    if (j != 0) return;
    const std::size_t tuples = ipow(p_, k);
    std::vector<int> idx(k);
    for (const auto& e : entries_) {
      double arg = e.gamma;
      for (int a = 0; a < p_; ++a) arg += e.u[a] * y[a];
      const double base = e.beta * ridge_phi(e.shape, k, arg) + (k == 0 ? e.alpha : 0.0);
      for (std::size_t flat = 0; flat < tuples; ++flat) {
        digits(flat, p_, k, idx.data());
        double v = base;
        for (int a : idx) v *= e.u[a];
        out[(e.out * tuples + flat) * v_ + e.drive] += v;
      }
    }
  }

 private:
  int p_, o_, v_;
  std::vector<RidgeEntry> entries_;
};

// ---- combinators -------------------------------------------------------------

void require_same_shape(const SmoothCoefficient& a, const SmoothCoefficient& b) {
  if (a.point_dim() != b.point_dim() || a.out_dim() != b.out_dim() ||
      a.drive_dim() != b.drive_dim())
    throw Error(ErrorKind::kShape, "coefficients must share point, out and drive dimensions");
}

class EpsilonExpansion : public SmoothCoefficient {
 public:
  explicit EpsilonExpansion(std::vector<CoefficientPtr> terms) : terms_(std::move(terms)) {
    if (terms_.empty()) throw Error(ErrorKind::kShape, "epsilon expansion needs terms");
    for (const auto& t : terms_) {
      require_same_shape(*terms_.front(), *t);
      if (t->eps_dependent())
        throw Error(ErrorKind::kConfig, "epsilon expansion terms must be eps-free");
    }
  }
  int point_dim() const override { return terms_.front()->point_dim(); }
  int drive_dim() const override { return terms_.front()->drive_dim(); }
  int out_dim() const override { return terms_.front()->out_dim(); }
  bool eps_dependent() const override { return terms_.size() > 1; }
  int max_order() const override {
    int m = kAnalyticOrder;
    for (const auto& t : terms_) m = std::min(m, t->max_order());
    return m;
  }
  void eval(int j, int k, double eps, std::span<const double> y,
            std::span<double> out) const override {
    check(j, k, y, out);
    std::fill(out.begin(), out.end(), 0.0);
    std::vector<double> buf(out.size());
    for (int m = j; m < static_cast<int>(terms_.size()); ++m) {
      // d_eps^j eps^m = m!/(m-j)! eps^{m-j}
      const double c = factorial(m) / factorial(m - j) * std::pow(eps, m - j);
      if (c == 0.0) continue;
      terms_[m]->eval(0, k, 0.0, y, buf);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += c * buf[i];
    }
  }

 private:
  std::vector<CoefficientPtr> terms_;
};

class FixedEpsilon : public SmoothCoefficient {
 public:
  FixedEpsilon(CoefficientPtr inner, double eps) : inner_(std::move(inner)), eps_(eps) {}
  int point_dim() const override { return inner_->point_dim(); }
  int drive_dim() const override { return inner_->drive_dim(); }
  int out_dim() const override { return inner_->out_dim(); }
  int max_order() const override { return inner_->max_order(); }
  void eval(int j, int k, double, std::span<const double> y,
            std::span<double> out) const override {
    check(j, k, y, out);
    if (j > 0) {
      std::fill(out.begin(), out.end(), 0.0);
      return;
    }
    inner_->eval(0, k, eps_, y, out);
  }

 private:
  CoefficientPtr inner_;
  double eps_;
};

class SumCoefficient : public SmoothCoefficient {
 public:
  SumCoefficient(std::vector<CoefficientPtr> terms, std::vector<double> scales)
      : terms_(std::move(terms)), scales_(std::move(scales)) {
    if (terms_.empty()) throw Error(ErrorKind::kShape, "sum needs at least one term");
    for (const auto& t : terms_) require_same_shape(*terms_.front(), *t);
  }
  int point_dim() const override { return terms_.front()->point_dim(); }
  int drive_dim() const override { return terms_.front()->drive_dim(); }
  int out_dim() const override { return terms_.front()->out_dim(); }
  bool eps_dependent() const override {
    return std::any_of(terms_.begin(), terms_.end(), [](auto& t) { return t->eps_dependent(); });
  }
  int max_order() const override {
    int m = kAnalyticOrder;
    for (const auto& t : terms_) m = std::min(m, t->max_order());
    return m;
  }
  void eval(int j, int k, double eps, std::span<const double> y,
            std::span<double> out) const override {
    check(j, k, y, out);
    std::fill(out.begin(), out.end(), 0.0);
    std::vector<double> buf(out.size());
    for (std::size_t t = 0; t < terms_.size(); ++t) {
      terms_[t]->eval(j, k, eps, y, buf);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += scales_[t] * buf[i];
    }
  }

 private:
  std::vector<CoefficientPtr> terms_;
  std::vector<double> scales_;
};

class ShiftedCoefficient : public SmoothCoefficient {
 public:
  ShiftedCoefficient(CoefficientPtr inner, std::vector<double> shift)
      : inner_(std::move(inner)), shift_(std::move(shift)) {
    if (static_cast<int>(shift_.size()) != inner_->point_dim())
      throw Error(ErrorKind::kShape, "shift does not match the point dimension");
  }
  int point_dim() const override { return inner_->point_dim(); }
  int drive_dim() const override { return inner_->drive_dim(); }
  int out_dim() const override { return inner_->out_dim(); }
  bool eps_dependent() const override { return inner_->eps_dependent(); }
  int max_order() const override { return inner_->max_order(); }
  void eval(int j, int k, double eps, std::span<const double> y,
            std::span<double> out) const override {
    check(j, k, y, out);
    std::vector<double> z(y.begin(), y.end());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += shift_[i];
    inner_->eval(j, k, eps, z, out);
  }

 private:
  CoefficientPtr inner_;
  std::vector<double> shift_;
};

// ---- clamp ---------------------------------------------------------------

constexpr int kJet = kAnalyticOrder + 1;
using Jet = std::array<double, kJet>;  // Taylor coefficients c_k = f^(k)/k!

Jet jet_div(const Jet& a, const Jet& b) {
  Jet c{};
  for (int k = 0; k < kJet; ++k) {
    double s = a[k];
    for (int i = 1; i <= k; ++i) s -= b[i] * c[k - i];
    c[k] = s / b[0];
  }
  return c;
}

Jet jet_exp(const Jet& a) {
  Jet e{};
  e[0] = std::exp(a[0]);
  for (int k = 1; k < kJet; ++k) {
    double s = 0.0;
    for (int i = 1; i <= k; ++i) s += i * a[i] * e[k - i];
    e[k] = s / k;
  }
  return e;
}

/// Smooth step S(u): 0 for u <= 0, 1 for u >= 1, as a jet at u.
Jet smooth_step(double u) {
  Jet s{};
  if (u <= 1e-3) return s;  // exp(-1/u) and its derivatives vanish in double
  if (u >= 1.0 - 1e-3) {
    s[0] = 1.0;
    return s;
  }
  Jet one{};
  one[0] = 1.0;
  Jet x{};
  x[0] = u;
  x[1] = 1.0;
  Jet y{};
  y[0] = 1.0 - u;
  y[1] = -1.0;
  Jet nx = jet_div(one, x), ny = jet_div(one, y);
  for (auto& v : nx) v = -v;
  for (auto& v : ny) v = -v;
  const Jet ex = jet_exp(nx);
  const Jet ey = jet_exp(ny);
  Jet den{};
  for (int k = 0; k < kJet; ++k) den[k] = ex[k] + ey[k];
  return jet_div(ex, den);
}

}  // namespace

double clamp_derivative(int order, double x, double radius, double width) {
  if (order < 0 || order > kAnalyticOrder)
    throw Error(ErrorKind::kDerivativeOrder, "clamp derivative order out of range");
  if (x < 0.0) {
    // chi is odd: chi^(k)(-x) = (-1)^(k+1) chi^(k)(x)
    const double v = clamp_derivative(order, -x, radius, width);
    return order % 2 == 0 ? -v : v;
  }
  if (x <= radius) return order == 0 ? x : (order == 1 ? 1.0 : 0.0);
  const double u = (x - radius) / width;
  if (order == 0) {
    const double v = std::min(u, 1.0);
    const double int_s =
        v <= 0.0 ? 0.0 : integrate_gl([](double s) { return smooth_step(s)[0]; }, 0.0, v, 16, 8);
    return radius + width * (v - int_s);
  }
  const Jet s = smooth_step(u);
  // chi' = 1 - S(u); chi^(k) = -S^(k-1)(u) / width^(k-1)
  if (order == 1) return 1.0 - s[0];
  return -s[order - 1] * factorial(order - 1) / std::pow(width, order - 1);
}

namespace {

/// All set partitions of {0..k-1}, as block label per element.
const std::vector<std::vector<int>>& set_partitions(int k) {
  static const auto table = [] {
    std::vector<std::vector<std::vector<int>>> t(kAnalyticOrder + 1);
    for (int n = 0; n <= kAnalyticOrder; ++n) {
      // restricted growth strings
      std::vector<int> a(n, 0);
      if (n == 0) {
        t[0].push_back({});
        continue;
      }
      while (true) {
        t[n].push_back(a);
        int i = n - 1;
        while (i > 0) {
          int mx = 0;
          for (int q = 0; q < i; ++q) mx = std::max(mx, a[q]);
          if (a[i] <= mx) break;
          --i;
        }
        if (i == 0) break;
        ++a[i];
        for (int q = i + 1; q < n; ++q) a[q] = 0;
      }
    }
    return t;
  }();
  return table[k];
}

class ClampedCoefficient : public SmoothCoefficient {
 public:
  ClampedCoefficient(CoefficientPtr inner, double radius, double width)
      : inner_(std::move(inner)), radius_(radius), width_(width) {
    if (!(radius > 0.0) || !(width > 0.0))
      throw Error(ErrorKind::kConfig, "clamp radius and width must be positive");
  }
  int point_dim() const override { return inner_->point_dim(); }
  int drive_dim() const override { return inner_->drive_dim(); }
  int out_dim() const override { return inner_->out_dim(); }
  bool eps_dependent() const override { return inner_->eps_dependent(); }
  int max_order() const override { return std::min(inner_->max_order(), kAnalyticOrder); }
  void eval(int j, int k, double eps, std::span<const double> y,
            std::span<double> out) const override {
    check(j, k, y, out);
    const int p = point_dim();
    std::vector<double> cy(p);
    bool inside = true;
    for (int a = 0; a < p; ++a) {
      cy[a] = clamp_derivative(0, y[a], radius_, width_);
      inside &= std::abs(y[a]) <= radius_;
    }
    if (inside) {
      inner_->eval(j, k, eps, y, out);
      return;
    }
    std::fill(out.begin(), out.end(), 0.0);
    if (k == 0) {
      inner_->eval(j, 0, eps, cy, out);
      return;
    }
    // chi derivatives per coordinate
    std::vector<std::vector<double>> dchi(p, std::vector<double>(k + 1));
    for (int a = 0; a < p; ++a)
      for (int r = 1; r <= k; ++r) dchi[a][r] = clamp_derivative(r, y[a], radius_, width_);
    std::vector<std::vector<double>> inner(k + 1);
    for (int m = 1; m <= k; ++m) inner[m] = inner_->eval(j, m, eps, cy);
    const int o_dim = out_dim(), v_dim = drive_dim();
    const std::size_t tuples = ipow(p, k);
    std::vector<int> idx(k);
    for (std::size_t flat = 0; flat < tuples; ++flat) {
      digits(flat, p, k, idx.data());
      for (const auto& part : set_partitions(k)) {
        const int blocks = 1 + *std::max_element(part.begin(), part.end());
        std::vector<int> coord(blocks, -1), bsize(blocks, 0);
        bool ok = true;
        for (int s = 0; s < k && ok; ++s) {
          int& c = coord[part[s]];
          if (c < 0) c = idx[s];
          ok = c == idx[s];
          ++bsize[part[s]];
        }
        if (!ok) continue;
        double w = 1.0;
        std::size_t inner_flat = 0;
        for (int b = 0; b < blocks; ++b) {
          w *= dchi[coord[b]][bsize[b]];
          inner_flat = inner_flat * p + coord[b];
        }
        if (w == 0.0) continue;
        const std::size_t itup = ipow(p, blocks);
        for (int o = 0; o < o_dim; ++o)
          for (int v = 0; v < v_dim; ++v)
            out[(o * tuples + flat) * v_dim + v] +=
                w * inner[blocks][(o * itup + inner_flat) * v_dim + v];
      }
    }
  }

 private:
  CoefficientPtr inner_;
  double radius_, width_;
};

}  // namespace

CoefficientPtr make_constant(int point_dim, int out_dim, int drive_dim, std::vector<double> a) {
  return std::make_shared<ConstantCoefficient>(point_dim, out_dim, drive_dim, std::move(a));
}

CoefficientPtr make_linear(int point_dim, int out_dim, int drive_dim, std::vector<double> a,
                           std::vector<double> b) {
  return std::make_shared<LinearCoefficient>(point_dim, out_dim, drive_dim, std::move(a),
                                             std::move(b));
}

CoefficientPtr make_polynomial(int point_dim, int out_dim, int drive_dim,
                               std::vector<Monomial> terms) {
  return std::make_shared<PolynomialCoefficient>(point_dim, out_dim, drive_dim, std::move(terms));
}

CoefficientPtr make_ridge(int point_dim, int out_dim, int drive_dim,
                          std::vector<RidgeEntry> entries) {
  return std::make_shared<RidgeCoefficient>(point_dim, out_dim, drive_dim, std::move(entries));
}

CoefficientPtr make_epsilon_expansion(std::vector<CoefficientPtr> terms) {
  return std::make_shared<EpsilonExpansion>(std::move(terms));
}

CoefficientPtr fix_epsilon(CoefficientPtr inner, double eps0) {
  return std::make_shared<FixedEpsilon>(std::move(inner), eps0);
}

CoefficientPtr make_sum(std::vector<CoefficientPtr> terms) {
  std::vector<double> ones(terms.size(), 1.0);
  return std::make_shared<SumCoefficient>(std::move(terms), std::move(ones));
}

CoefficientPtr make_scaled(double scale, CoefficientPtr inner) {
  return std::make_shared<SumCoefficient>(std::vector<CoefficientPtr>{std::move(inner)},
                                          std::vector<double>{scale});
}

CoefficientPtr make_clamped(CoefficientPtr inner, double radius, double width) {
  return std::make_shared<ClampedCoefficient>(std::move(inner), radius, width);
}

CoefficientPtr make_shifted(CoefficientPtr inner, std::vector<double> shift) {
  return std::make_shared<ShiftedCoefficient>(std::move(inner), std::move(shift));
}

// ---- JSON factory ---------------------------------------------------------------

namespace {

using nlohmann::json;

template <class T>
T required(const json& j, const char* key) {
  if (!j.contains(key))
    throw Error(ErrorKind::kConfig, std::string("coefficient spec is missing '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("coefficient field '") + key + "': " + e.what());
  }
}

RidgeShape ridge_shape(const std::string& name) {
  if (name == "sin") return RidgeShape::kSin;
  if (name == "cos") return RidgeShape::kCos;
  if (name == "sin2") return RidgeShape::kSinSquared;
  if (name == "cos2") return RidgeShape::kCosSquared;
  if (name == "identity") return RidgeShape::kIdentity;
  throw Error(ErrorKind::kConfig, "unknown ridge shape '" + name + "'");
}

}  // namespace

CoefficientPtr coefficient_from_json(const json& spec) {
  if (!spec.is_object()) throw Error(ErrorKind::kConfig, "coefficient spec must be an object");
  const auto family = required<std::string>(spec, "family");
  auto dims = [&](int& p, int& o, int& v) {
    p = required<int>(spec, "point_dim");
    o = spec.value("out_dim", p);
    v = required<int>(spec, "drive_dim");
    if (p < 1 || o < 1 || v < 1) throw Error(ErrorKind::kConfig, "coefficient dims must be >= 1");
  };
  int p = 0, o = 0, v = 0;
  if (family == "identity") {
    const int d = required<int>(spec, "dim");
    std::vector<double> a(static_cast<std::size_t>(d) * d, 0.0);
    for (int i = 0; i < d; ++i) a[i * d + i] = 1.0;
    return make_constant(d, d, d, std::move(a));
  }
  if (family == "zero") {
    dims(p, o, v);
    return make_constant(p, o, v, std::vector<double>(static_cast<std::size_t>(o) * v, 0.0));
  }
  if (family == "constant") {
    dims(p, o, v);
    return make_constant(p, o, v, required<std::vector<double>>(spec, "matrix"));
  }
  if (family == "linear") {
    dims(p, o, v);
    return make_linear(p, o, v, spec.value("matrix", std::vector<double>{}),
                       required<std::vector<double>>(spec, "slope"));
  }
  if (family == "polynomial") {
    dims(p, o, v);
    std::vector<Monomial> terms;
    for (const auto& t : required<json>(spec, "terms"))
      terms.push_back({t.value("out", 0), t.value("drive", 0), required<double>(t, "coef"),
                       required<std::vector<int>>(t, "powers")});
    return make_polynomial(p, o, v, std::move(terms));
  }
  if (family == "ridge") {
    dims(p, o, v);
    std::vector<RidgeEntry> entries;
    for (const auto& e : required<json>(spec, "entries"))
      entries.push_back({e.value("out", 0), e.value("drive", 0), e.value("alpha", 0.0),
                         e.value("beta", 1.0), ridge_shape(required<std::string>(e, "shape")),
                         required<std::vector<double>>(e, "u"), e.value("gamma", 0.0)});
    return make_ridge(p, o, v, std::move(entries));
  }
  if (family == "epsilon_expansion" || family == "sum") {
    std::vector<CoefficientPtr> terms;
    for (const auto& t : required<json>(spec, "terms")) terms.push_back(coefficient_from_json(t));
    return family == "sum" ? make_sum(std::move(terms)) : make_epsilon_expansion(std::move(terms));
  }
  if (family == "scaled")
    return make_scaled(required<double>(spec, "scale"),
                       coefficient_from_json(required<json>(spec, "inner")));
  if (family == "clamped")
    return make_clamped(coefficient_from_json(required<json>(spec, "inner")),
                        required<double>(spec, "radius"), spec.value("width", 1.0));
  throw Error(ErrorKind::kConfig, "unknown coefficient family '" + family + "'");
}

}  // namespace roughpath
