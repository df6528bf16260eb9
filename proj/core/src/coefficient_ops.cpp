#include <algorithm>
#include <cmath>
#include <map>

#include "roughpath/coefficient.hpp"
#include "roughpath/error.hpp"
#include "roughpath/tensor.hpp"

namespace roughpath {

namespace {

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

std::vector<std::vector<int>> compositions(int m, int k) {
  std::vector<std::vector<int>> out;
  if (k == 0) {
    if (m == 0) out.push_back({});
    return out;
  }
  for (int first = 1; first <= m - (k - 1); ++first)
    for (auto& rest : compositions(m - first, k - 1)) {
      rest.insert(rest.begin(), first);
      out.push_back(std::move(rest));
    }
  return out;
}

// ---- stacked ----------------------------------------------------------------

StackedCoefficient::StackedCoefficient(int point_dim, int out_dim, int drive_dim,
                                       std::vector<Term> terms, std::vector<Identity> identities)
    : point_dim_(point_dim),
      out_dim_(out_dim),
      drive_dim_(drive_dim),
      terms_(std::move(terms)),
      identities_(std::move(identities)) {
  for (const auto& t : terms_) {
    if (!t.coef) throw Error(ErrorKind::kShape, "stacked term without coefficient");
    if (t.out_offset < 0 || t.out_offset + t.coef->out_dim() > out_dim ||
        t.point_offset < 0 || t.point_offset + t.coef->point_dim() > point_dim ||
        t.drive_offset < 0 || t.drive_offset + t.coef->drive_dim() > drive_dim)
      throw Error(ErrorKind::kShape, "stacked term does not fit the block layout");
  }
  for (const auto& id : identities_)
    if (id.out_offset < 0 || id.out_offset + id.dim > out_dim || id.drive_offset < 0 ||
        id.drive_offset + id.dim > drive_dim)
      throw Error(ErrorKind::kShape, "stacked identity does not fit the block layout");
}

bool StackedCoefficient::eps_dependent() const {
  return std::any_of(terms_.begin(), terms_.end(),
                     [](const Term& t) { return t.coef->eps_dependent(); });
}

int StackedCoefficient::max_order() const {
  int m = 8;
  for (const auto& t : terms_) m = std::min(m, t.coef->max_order());
  return m;
}

void StackedCoefficient::eval(int j, int k, double eps, std::span<const double> y,
                              std::span<double> out) const {
  check(j, k, y, out);
  std::fill(out.begin(), out.end(), 0.0);
  const std::size_t tuples = ipow(point_dim_, k);
  if (j == 0 && k == 0)
    for (const auto& id : identities_)
      for (int i = 0; i < id.dim; ++i)
        out[(id.out_offset + i) * drive_dim_ + id.drive_offset + i] += 1.0;
  std::vector<int> idx(k);
  for (const auto& t : terms_) {
    const auto& c = *t.coef;
    const int p = c.point_dim(), o = c.out_dim(), v = c.drive_dim();
    auto inner = c.eval(j, k, eps, y.subspan(t.point_offset, p));
    const std::size_t itup = ipow(p, k);
    for (std::size_t flat = 0; flat < itup; ++flat) {
      digits(flat, p, k, idx.data());
      std::size_t big = 0;
      for (int s = 0; s < k; ++s) big = big * point_dim_ + t.point_offset + idx[s];
      for (int oo = 0; oo < o; ++oo) {
        const double* src = inner.data() + (oo * itup + flat) * v;
        double* dst = out.data() + ((t.out_offset + oo) * tuples + big) * drive_dim_ + t.drive_offset;
        for (int b = 0; b < v; ++b) dst[b] += src[b];
      }
    }
  }
}

// ---- Psi / Phi ----------------------------------------------------------------

namespace {

class PsiBeta : public SmoothCoefficient {
 public:
  PsiBeta(CoefficientPtr f, double beta) : f_(std::move(f)), beta_(beta) {
    if (beta == 0.0) throw Error(ErrorKind::kDomain, "Psi_beta needs beta != 0");
  }
  int point_dim() const override { return 2 * f_->point_dim(); }
  int drive_dim() const override { return f_->drive_dim(); }
  int out_dim() const override { return f_->out_dim(); }
  bool eps_dependent() const override { return f_->eps_dependent(); }
  int max_order() const override { return f_->max_order(); }
  void eval(int j, int k, double eps, std::span<const double> yz,
            std::span<double> out) const override {
    check(j, k, yz, out);
    const int w = f_->point_dim();
    auto y = yz.subspan(0, w);
    std::vector<double> shifted(w);
    for (int a = 0; a < w; ++a) shifted[a] = yz[a] - yz[w + a] / beta_;
    const auto at_y = f_->eval(j, k, eps, y);
    const auto at_s = f_->eval(j, k, eps, shifted);
    const int o_dim = out_dim(), v = drive_dim();
    const std::size_t tuples = ipow(2 * w, k), itup = ipow(w, k);
    std::vector<int> idx(k);
    for (std::size_t flat = 0; flat < tuples; ++flat) {
      digits(flat, 2 * w, k, idx.data());
      int c = 0;
      std::size_t iflat = 0;
      for (int s = 0; s < k; ++s) {
        c += idx[s] >= w;
        iflat = iflat * w + idx[s] % w;
      }
      // d_y^a d_k^c Psi = beta (delta_{c0} f^(a+c)(y) - (-1/beta)^c f^(a+c)(y - k/beta))
      const double ws = -beta_ * std::pow(-1.0 / beta_, c);
      const double wy = c == 0 ? beta_ : 0.0;
      for (int o = 0; o < o_dim; ++o)
        for (int b = 0; b < v; ++b) {
          const std::size_t src = (o * itup + iflat) * v + b;
          out[(o * tuples + flat) * v + b] = wy * at_y[src] + ws * at_s[src];
        }
    }
  }

 private:
  CoefficientPtr f_;
  double beta_;
};

void require_state_map(const SmoothCoefficient& f) {
  if (f.out_dim() != f.point_dim())
    throw Error(ErrorKind::kShape, "coefficient must map the state space to itself");
}

}  // namespace

CoefficientPtr psi_beta(CoefficientPtr f, double beta) {
  return std::make_shared<PsiBeta>(std::move(f), beta);
}

CoefficientPtr phi_beta(CoefficientPtr f, double beta) {
  require_state_map(*f);
  const int v = f->drive_dim(), w = f->point_dim();
  auto psi = psi_beta(f, beta);
  return std::make_shared<StackedCoefficient>(
      v + 2 * w, v + 2 * w, v + 2 * w,
      std::vector<StackedCoefficient::Term>{{f, v, v, 0}, {psi, v + w, v, 0}},
      std::vector<StackedCoefficient::Identity>{{0, 0, v}});
}

CoefficientPtr lift_coefficient(CoefficientPtr f) {
  require_state_map(*f);
  const int v = f->drive_dim(), w = f->point_dim();
  return std::make_shared<StackedCoefficient>(
      v + w, v + w, v + w, std::vector<StackedCoefficient::Term>{{f, v, v, 0}},
      std::vector<StackedCoefficient::Identity>{{0, 0, v}});
}

// ---- expansion coefficients ------------------------------------------------------

std::vector<double> taylor_coefficient(const SmoothCoefficient& sigma, int order, int r,
                                       std::span<const std::vector<double>> ys) {
  if (ys.empty()) throw Error(ErrorKind::kShape, "taylor_coefficient needs y^0");
  const int w = sigma.point_dim(), o_dim = sigma.out_dim(), v = sigma.drive_dim();
  const std::size_t rest = ipow(w, r) * v;
  std::vector<double> out(o_dim * rest, 0.0);
  if (order < 0) return out;
  std::map<std::pair<int, int>, std::vector<double>> cache;
  auto deriv = [&](int j, int k) -> const std::vector<double>& {
    auto it = cache.find({j, k});
    if (it == cache.end()) it = cache.emplace(std::pair{j, k}, sigma.eval(j, k, 0.0, ys[0])).first;
    return it->second;
  };
  const int top = static_cast<int>(ys.size()) - 1;
  for (int j = 0; j <= order; ++j) {
    if (j > 0 && !sigma.eps_dependent()) break;
    const int m = order - j;
    for (int k = 0; k <= m; ++k) {
      const double coef = 1.0 / (factorial(j) * factorial(k));
      for (const auto& comp : compositions(m, k)) {
        if (std::any_of(comp.begin(), comp.end(), [&](int i) { return i > top; })) continue;
        const auto& d = deriv(j, r + k);
        // v = y^{i_1} (x) ... (x) y^{i_k}
        std::vector<double> vec{1.0};
        for (int i : comp) {
          std::vector<double> next(vec.size() * w);
          for (std::size_t a = 0; a < vec.size(); ++a)
            for (int c = 0; c < w; ++c) next[a * w + c] = vec[a] * ys[i][c];
          vec.swap(next);
        }
        const std::size_t front = vec.size();
        for (int o = 0; o < o_dim; ++o)
          for (std::size_t f = 0; f < front; ++f) {
            const double s = coef * vec[f];
            if (s == 0.0) continue;
            const double* src = d.data() + (o * front + f) * rest;
            double* dst = out.data() + o * rest;
            for (std::size_t q = 0; q < rest; ++q) dst[q] += s * src[q];
          }
      }
    }
  }
  return out;
}

namespace {

class ExpansionCoefficient : public SmoothCoefficient {
 public:
  ExpansionCoefficient(CoefficientPtr sigma, int base_order, ExpansionLayout layout)
      : sigma_(std::move(sigma)), base_(base_order), layout_(std::move(layout)) {
    const int w = sigma_->point_dim();
    for (int off : layout_.y_offsets)
      if (off < 0 || off + w > layout_.point_dim)
        throw Error(ErrorKind::kShape, "expansion layout: state block out of range");
    if (layout_.drive_offset < 0 || layout_.drive_offset + sigma_->drive_dim() > layout_.point_dim)
      throw Error(ErrorKind::kShape, "expansion layout: drive block out of range");
    if (layout_.y_offsets.empty()) throw Error(ErrorKind::kShape, "expansion layout needs y^0");
  }
  int point_dim() const override { return layout_.point_dim; }
  int drive_dim() const override { return layout_.point_dim; }
  int out_dim() const override { return sigma_->out_dim(); }
  int max_order() const override { return std::max(0, sigma_->max_order() - base_); }
  void eval(int j, int k, double, std::span<const double> point,
            std::span<double> out) const override {
    check(j, k, point, out);
    std::fill(out.begin(), out.end(), 0.0);
    if (j > 0) return;
    const int w = sigma_->point_dim(), v = sigma_->drive_dim(), o_dim = out_dim();
    const int P = layout_.point_dim;
    std::vector<std::vector<double>> ys;
    for (int off : layout_.y_offsets) ys.emplace_back(point.begin() + off, point.begin() + off + w);
    // block index and in-block coordinate of each point coordinate
    std::vector<int> block(P, -1), coord(P, 0);
    for (std::size_t i = 0; i < layout_.y_offsets.size(); ++i)
      for (int c = 0; c < w; ++c) {
        block[layout_.y_offsets[i] + c] = static_cast<int>(i);
        coord[layout_.y_offsets[i] + c] = c;
      }
    std::vector<std::vector<double>> table(base_ + 1);
    const std::size_t tuples = ipow(P, k), itup = ipow(w, k);
    std::vector<int> idx(k);
    for (std::size_t flat = 0; flat < tuples; ++flat) {
      digits(flat, P, k, idx.data());
      int xi = 0;
      std::size_t iflat = 0;
      bool ok = true;
      for (int s = 0; s < k && ok; ++s) {
        ok = block[idx[s]] >= 0;
        if (!ok) break;
        xi += block[idx[s]];
        iflat = iflat * w + coord[idx[s]];
      }
      // d_xi f_n = [eps^{base - |xi|}] d_y^k sigma(eps, y^0 + sum eps^i y^i)
      if (!ok || xi > base_) continue;
      auto& t = table[base_ - xi];
      if (t.empty()) t = taylor_coefficient(*sigma_, base_ - xi, k, ys);
      for (int o = 0; o < o_dim; ++o)
        for (int b = 0; b < v; ++b)
          out[(o * tuples + flat) * P + layout_.drive_offset + b] = t[(o * itup + iflat) * v + b];
    }
  }

 private:
  CoefficientPtr sigma_;
  int base_;
  ExpansionLayout layout_;
};

}  // namespace

CoefficientPtr build_fn(CoefficientPtr sigma, int n, ExpansionLayout layout) {
  if (n < 1) throw Error(ErrorKind::kDomain, "expansion order must be >= 1");
  if (static_cast<int>(layout.y_offsets.size()) != n)
    throw Error(ErrorKind::kShape, "f_n needs the state blocks y^0..y^{n-1}");
  if (sigma->max_order() < n - 1)
    throw Error(ErrorKind::kDerivativeOrder, "sigma lacks the derivatives needed for f_n");
  return std::make_shared<ExpansionCoefficient>(std::move(sigma), n - 1, std::move(layout));
}

CoefficientPtr build_gn(CoefficientPtr b, int n, ExpansionLayout layout) {
  if (n < 1) throw Error(ErrorKind::kDomain, "expansion order must be >= 1");
  if (static_cast<int>(layout.y_offsets.size()) != n)
    throw Error(ErrorKind::kShape, "g_n needs the state blocks y^0..y^{n-1}");
  if (b->max_order() < n)
    throw Error(ErrorKind::kDerivativeOrder, "b lacks the derivatives needed for g_n");
  return std::make_shared<ExpansionCoefficient>(std::move(b), n, std::move(layout));
}

}  // namespace roughpath
