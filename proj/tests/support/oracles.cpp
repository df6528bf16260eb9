#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace oracle {

Vec rk45(const Rhs& f, Vec y, double t0, double t1, double tol) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  const std::size_t n = y.size();
  double t = t0;
  double h = (t1 - t0) / 16;
  Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), yn(n);
  f(t, y, k1);
  while (t < t1) {
    if (t + h > t1) h = t1 - t;
    auto stage = [&](Vec& out, double tt, std::initializer_list<std::pair<double, Vec*>> terms) {
      for (std::size_t i = 0; i < n; ++i) {
        double s = y[i];
        for (auto& [c, k] : terms) s += h * c * (*k)[i];
        tmp[i] = s;
      }
      f(tt, tmp, out);
    };
    stage(k2, t + c2 * h, {{a21, &k1}});
    stage(k3, t + c3 * h, {{a31, &k1}, {a32, &k2}});
    stage(k4, t + c4 * h, {{a41, &k1}, {a42, &k2}, {a43, &k3}});
    stage(k5, t + c5 * h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}});
    stage(k6, t + h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}});
    for (std::size_t i = 0; i < n; ++i)
      yn[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    f(t + h, yn, k7);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e =
          h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = tol * (1.0 + std::max(std::abs(y[i]), std::abs(yn[i])));
      err = std::max(err, std::abs(e) / sc);
    }
    if (err <= 1.0) {
      t += h;
      y = yn;
      k1 = k7;
    }
    const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    h *= fac;
  }
  return y;
}

static double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                          double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6 * (fa + 4 * flm + fm);
  const double right = (b - m) / 6 * (fm + 4 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15 * tol)
    return left + right + (left + right - whole) / 15;
  return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

double simpson(const std::function<double(double)>& f, double a, double b, double tol) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return simpson_rec(f, a, b, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb), tol, 50);
}

double brute_force_partition_sup(std::size_t n,
                                 const std::function<double(std::size_t, std::size_t)>& weight) {
  if (n < 2) return 0.0;
  const std::size_t inner = n - 2;
  double best = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << inner); ++mask) {
    std::size_t prev = 0;
    double s = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
      const bool chosen = i == n - 1 || (mask >> (i - 1)) & 1;
      if (!chosen) continue;
      s += weight(prev, i);
      prev = i;
    }
    best = std::max(best, s);
  }
  return best;
}

roughpath::TruncatedTensor random_group_element(std::mt19937_64& rng, int dim, int level,
                                                double scale) {
  std::normal_distribution<double> g(0.0, scale);
  auto x = roughpath::TruncatedTensor::unit(dim, level);
  for (int s = 0; s < 3; ++s) {
    std::vector<double> v(dim);
    for (double& c : v) c = g(rng);
    x = x * roughpath::TruncatedTensor::segment(v, level);
  }
  return x;
}

std::vector<std::vector<int>> brute_force_pi(const std::vector<int>& l) {
  const int n = std::accumulate(l.begin(), l.end(), 0);
  std::vector<int> pi(n);
  std::iota(pi.begin(), pi.end(), 0);
  std::vector<std::vector<int>> out;
  do {
    // 1-based transcription of the defining inequalities
    auto P = [&](int i) { return pi[i - 1] + 1; };
    bool ok = true;
    int start = 1;
    std::vector<int> ends;
    for (int len : l) {
      for (int i = start; i < start + len - 1; ++i) ok = ok && P(i) < P(i + 1);
      ends.push_back(start + len - 1);
      start += len;
    }
    for (std::size_t e = 1; e < ends.size(); ++e) ok = ok && P(ends[e - 1]) < P(ends[e]);
    if (ok) out.push_back(pi);
  } while (std::next_permutation(pi.begin(), pi.end()));
  return out;
}

double loglog_slope(const Vec& x, const Vec& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oracle
