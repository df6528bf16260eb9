#include "roughpath/rough_integral.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "roughpath/error.hpp"
#include "roughpath/quadrature.hpp"

namespace roughpath {

namespace {

std::vector<std::vector<int>> filter_permutations(const std::vector<int>& l) {
  const int n = std::accumulate(l.begin(), l.end(), 0);
  std::vector<int> pi(n);
  std::iota(pi.begin(), pi.end(), 0);
  std::vector<std::vector<int>> out;
  do {
    bool ok = true;
    int pos = 0;
    int prev_end = -1;
    for (int len : l) {
      for (int q = pos + 1; q < pos + len && ok; ++q) ok = pi[q - 1] < pi[q];
      const int end = pos + len - 1;
      if (ok && prev_end >= 0) ok = pi[prev_end] < pi[end];
      prev_end = end;
      pos += len;
      if (!ok) break;
    }
    if (ok) out.push_back(pi);
  } while (std::next_permutation(pi.begin(), pi.end()));
  return out;
}

/// All compositions of 1..kMaxLevel with their Pi_l sets.
const std::map<std::vector<int>, std::vector<std::vector<int>>>& pi_table() {
  static const auto table = [] {
    std::map<std::vector<int>, std::vector<std::vector<int>>> t;
    for (int n = 1; n <= kMaxLevel; ++n)
      for (int parts = 1; parts <= n; ++parts)
        for (auto& l : compositions(n, parts)) t.emplace(l, filter_permutations(l));
    return t;
  }();
  return table;
}

}  // namespace

const std::vector<std::vector<int>>& permutation_sets(std::span<const int> l) {
  const std::vector<int> key(l.begin(), l.end());
  for (int x : key)
    if (x < 1) throw Error(ErrorKind::kDomain, "composition parts must be >= 1");
  const auto& t = pi_table();
  auto it = t.find(key);
  if (it == t.end())
    throw Error(ErrorKind::kDomain, "composition order exceeds the supported tensor level");
  return it->second;
}

std::vector<double> permuted_sum(std::span<const int> l, std::span<const double> level, int dim) {
  std::vector<double> out(level.size(), 0.0);
  for (const auto& pi : permutation_sets(l)) permute_slots_add(level, dim, pi, out);
  return out;
}

std::vector<std::vector<double>> derivative_stack(const SmoothCoefficient& f,
                                                  std::span<const double> x, int count) {
  if (f.max_order() < count - 1)
    throw Error(ErrorKind::kDerivativeOrder, "coefficient lacks derivatives for this level");
  std::vector<std::vector<double>> g;
  g.reserve(count);
  for (int k = 0; k < count; ++k) g.push_back(f.eval(0, k, 0.0, x));
  return g;
}

TruncatedTensor integral_increment(const std::vector<std::vector<double>>& g, int out_dim,
                                   const TruncatedTensor& x) {
  const int level = x.level();
  const int d = x.dim();
  TruncatedTensor y = TruncatedTensor::unit(out_dim, level);
  std::vector<std::span<const double>> blocks;
  for (int n = 1; n <= level; ++n) {
    for (int parts = 1; parts <= n; ++parts) {
      for (const auto& l : compositions(n, parts)) {
        const auto sum = permuted_sum(l, x[n], d);
        blocks.clear();
        for (int len : l) blocks.emplace_back(g[len - 1]);
        contract_blocks(sum, d, l, blocks, out_dim, y[parts]);
      }
    }
  }
  return y;
}

static std::vector<double> point_at(const GridRoughPath& x, std::size_t i,
                                    std::span<const double> base) {
  auto p = x.point(i);
  std::vector<double> v(p.begin(), p.end());
  if (!base.empty()) {
    if (base.size() != v.size()) throw Error(ErrorKind::kShape, "integrate: base point size");
    for (std::size_t c = 0; c < v.size(); ++c) v[c] += base[c];
  }
  return v;
}

static void require_fit(const SmoothCoefficient& f, const GridRoughPath& x) {
  if (f.point_dim() != x.dim() || f.drive_dim() != x.dim())
    throw Error(ErrorKind::kShape, "integrate: coefficient must act on the driving space");
}

Association integrate_with_diagnostics(const SmoothCoefficient& f, const GridRoughPath& x,
                                       const Control* cv, std::span<const double> base,
                                       double p) {
  require_fit(f, x);
  const int level = x.level();
  if (p == 0.0) p = level;
  if (!(p >= level && p < level + 1))
    throw Error(ErrorKind::kDomain, "integrate: need L <= p < L + 1");
  AlmostRoughPath arp;
  arp.times = x.times();
  arp.theta = (level + 1.0) / p;
  arp.increments.reserve(x.intervals());
  for (std::size_t i = 0; i < x.intervals(); ++i) {
    const auto g = derivative_stack(f, point_at(x, i, base), level);
    arp.increments.push_back(integral_increment(g, f.out_dim(), x.increment(i)));
  }
  if (cv) {
    std::vector<double> b(base.begin(), base.end());
    arp.candidate = [&f, &x, level, b](std::size_t s, std::size_t t) {
      const auto g = derivative_stack(f, point_at(x, s, b), level);
      return integral_increment(g, f.out_dim(), x.increment(s, t));
    };
  }
  return associate(arp, cv);
}

GridRoughPath integrate(const SmoothCoefficient& f, const GridRoughPath& x,
                        std::span<const double> base) {
  return integrate_with_diagnostics(f, x, nullptr, base).path;
}

std::vector<double> remainder_Rl(const SmoothCoefficient& f, std::span<const double> x,
                                 std::span<const double> y, int l, int level) {
  if (l < 1 || l > level) throw Error(ErrorKind::kDomain, "remainder_Rl: need 1 <= l <= L");
  if (f.max_order() < level)
    throw Error(ErrorKind::kDerivativeOrder, "remainder_Rl needs derivatives of order L");
  const int p = f.point_dim(), o_dim = f.out_dim(), v = f.drive_dim();
  const int m = level - l + 1;  // number of (y - x) insertions
  std::vector<double> h(p);
  for (int c = 0; c < p; ++c) h[c] = y[c] - x[c];
  std::vector<double> hm{1.0};
  for (int s = 0; s < m; ++s) {
    std::vector<double> next(hm.size() * p);
    for (std::size_t a = 0; a < hm.size(); ++a)
      for (int c = 0; c < p; ++c) next[a * p + c] = hm[a] * h[c];
    hm.swap(next);
  }
  double fact = 1.0;
  for (int i = 2; i <= level - l; ++i) fact *= i;
  const std::size_t rest = ipow(p, l - 1) * v;
  const std::size_t front = hm.size();
  std::vector<double> out(o_dim * rest, 0.0);
  const auto& rule = gauss_legendre(16);
  std::vector<double> z(p);
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const double th = rule.nodes[q];
    for (int c = 0; c < p; ++c) z[c] = x[c] + th * h[c];
    const auto d = f.eval(0, level, 0.0, z);
    const double w = rule.weights[q] * std::pow(1.0 - th, level - l) / fact;
    for (int o = 0; o < o_dim; ++o)
      for (std::size_t a = 0; a < front; ++a) {
        const double s = w * hm[a];
        const double* src = d.data() + (o * front + a) * rest;
        for (std::size_t r = 0; r < rest; ++r) out[o * rest + r] += s * src[r];
      }
  }
  return out;
}

std::vector<double> integration_defect_N(const SmoothCoefficient& f, const GridRoughPath& x,
                                         std::size_t s, std::size_t u, std::size_t t) {
  require_fit(f, x);
  if (!(s <= u && u <= t && t < x.points()))
    throw Error(ErrorKind::kDomain, "integration_defect_N: need s <= u <= t");
  const int level = x.level();
  auto xs = x.point(s);
  auto xu = x.point(u);
  const auto inc = x.increment(u, t);
  const auto g = derivative_stack(f, xu, level);
  auto gm = g;
  for (int l = 1; l <= level; ++l) {
    const auto r = remainder_Rl(f, xs, xu, l, level);
    for (std::size_t i = 0; i < r.size(); ++i) gm[l - 1][i] -= r[i];
  }
  const auto yu = integral_increment(g, f.out_dim(), inc);
  const auto m = integral_increment(gm, f.out_dim(), inc);
  std::vector<double> n(level + 1, 0.0);
  for (int j = 1; j <= level; ++j) {
    auto a = yu[j];
    auto b = m[j];
    for (std::size_t i = 0; i < a.size(); ++i) n[j] += std::abs(a[i] - b[i]);
  }
  return n;
}

}  // namespace roughpath
