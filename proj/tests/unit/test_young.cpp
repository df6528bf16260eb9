#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "roughpath/error.hpp"
#include "roughpath/lift.hpp"
#include "roughpath/young.hpp"

using namespace roughpath;

namespace {

OperatorPath scalar_ramp(std::size_t n, double a) {
  auto t = uniform_grid(n);
  std::vector<double> v(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) v[i] = a * t[i];
  return OperatorPath(t, 1, v);
}

OperatorPath smooth_omega(std::size_t n, double scale) {
  // non-commuting 3 x 3 path
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

double max_diff(std::span<const double> a, std::span<const double> b) {
  double w = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) w = std::max(w, std::abs(a[i] - b[i]));
  return w;
}

}  // namespace

TEST(Young, IntegralOfIdentity) {
  auto x = GridPath::sample(uniform_grid(8), 1, [](double t, std::span<double> v) { v[0] = t; });
  std::vector<double> a(x.values().begin(), x.values().end());
  auto y = young_integral(a, 1, x);
  EXPECT_NEAR(y.value(8)[0], 0.5, 1e-15);
  EXPECT_EQ(y.value(3)[0] - y.value(3)[0], 0.0);
}

TEST(Young, StieltjesAgainstQuadrature) {
  auto t = uniform_grid(1024);
  auto x = GridPath::sample(t, 1, [](double s, std::span<double> v) { v[0] = s * s; });
  std::vector<double> a(t.begin(), t.end());
  auto y = young_integral(a, 1, x);
  const double oracle_value = oracle::simpson([](double s) { return s * 2 * s; }, 0, 1);
  EXPECT_NEAR(y.value(1024)[0], oracle_value, 1e-5);
  EXPECT_NEAR(oracle_value, 2.0 / 3, 1e-12);
}

TEST(Young, Additivity) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  auto t = uniform_grid(20);
  std::vector<double> a(21 * 2), xv(21 * 2, 0.0);
  for (double& v : a) v = g(rng);
  for (std::size_t i = 1; i <= 20; ++i)
    for (int c = 0; c < 2; ++c) xv[i * 2 + c] = xv[(i - 1) * 2 + c] + g(rng);
  GridPath x(t, 2, xv);
  auto whole = young_integral(a, 1, x);
  auto head = young_integral(std::span<const double>(a).first(11 * 2), 1, x.window(0, 10));
  auto tail = young_integral(std::span<const double>(a).subspan(10 * 2), 1, x.window(10, 20));
  EXPECT_NEAR(head.value(10)[0] + tail.value(10)[0], whole.value(20)[0], 1e-14);
}

TEST(LinearOde, ZeroOmega) {
  auto flow = linear_ode_series(OperatorPath::zero(uniform_grid(10), 2));
  for (std::size_t i = 0; i <= 10; ++i) {
    EXPECT_EQ(flow.m.value(i)[0], 1.0);
    EXPECT_EQ(flow.m.value(i)[1], 0.0);
    EXPECT_EQ(flow.n.value(i)[3], 1.0);
  }
}

TEST(LinearOde, ScalarExponential) {
  auto flow = linear_ode_series(scalar_ramp(1024, 1.0));
  const double rk = oracle::rk45([](double, const oracle::Vec& y, oracle::Vec& dy) { dy[0] = y[0]; },
                                 {1.0}, 0, 1)[0];
  EXPECT_NEAR(flow.m.value(1024)[0], rk, 1e-8);
  EXPECT_NEAR(flow.m.value(1024)[0], 2.718281828, 1e-8);
  EXPECT_GT(flow.pieces.size(), 2u);
}

TEST(LinearOde, MTimesNIsIdentity) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  auto t = uniform_grid(64);
  std::vector<double> v(65 * 9, 0.0);
  for (std::size_t i = 1; i <= 64; ++i)
    for (int k = 0; k < 9; ++k) v[i * 9 + k] = v[(i - 1) * 9 + k] + 0.2 * g(rng);
  auto flow = linear_ode_series(OperatorPath(t, 3, v));
  for (std::size_t i = 0; i <= 64; ++i) {
    Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>> m(flow.m.value(i).data());
    Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>> n(flow.n.value(i).data());
    EXPECT_LT((m * n - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((n * m - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(LinearOde, AgreesWithRungeKutta) {
  // RK on the interpolated Omega: dM/dt = Omega'(t) M with Omega' piecewise constant
  const std::size_t n = 128;
  auto omega = smooth_omega(n, 1.0);
  auto flow = linear_ode_series(omega);
  oracle::Vec y(9, 0.0);
  y[0] = y[4] = y[8] = 1.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double h = omega.times()[i + 1] - omega.times()[i];
    Eigen::Matrix3d a;
    for (int k = 0; k < 9; ++k) a(k / 3, k % 3) = (omega.value(i + 1)[k] - omega.value(i)[k]) / h;
    y = oracle::rk45(
        [&](double, const oracle::Vec& m, oracle::Vec& dm) {
          Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>> mm(m.data());
          Eigen::Matrix<double, 3, 3, Eigen::RowMajor> r = a * mm;
          std::copy(r.data(), r.data() + 9, dm.begin());
        },
        y, omega.times()[i], omega.times()[i + 1], 1e-13);
    worst = std::max(worst, max_diff(y, flow.m.value(i + 1)));
  }
  EXPECT_LT(worst, 1e-7);
  // and the grid solution converges to the smooth-Omega solution
  auto fine = linear_ode_series(smooth_omega(2048, 1.0));
  auto coarse = linear_ode_series(smooth_omega(512, 1.0));
  auto smooth = oracle::rk45(
      [](double s, const oracle::Vec& m, oracle::Vec& dm) {
        const double da[9] = {2 * std::cos(2 * s), 2 * s, -0.5, -std::sin(s), 0.3, 3 * s * s,
                              0.2, -std::cos(s), 1.4 * s};
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c) {
            double acc = 0.0;
            for (int k = 0; k < 3; ++k) acc += da[r * 3 + k] * m[k * 3 + c];
            dm[r * 3 + c] = acc;
          }
      },
      {1, 0, 0, 0, 1, 0, 0, 0, 1}, 0, 1, 1e-13);
  const double ef = max_diff(smooth, fine.m.value(2048));
  const double ec = max_diff(smooth, coarse.m.value(512));
  EXPECT_LT(ef, 1e-6);
  EXPECT_NEAR(std::log2(ec / ef), 4.0, 0.3);  // second order in the mesh
}

TEST(LinearOde, LipschitzInOmega) {
  auto base = smooth_omega(256, 1.0);
  auto flow = linear_ode_series(base);
  std::vector<double> h, d;
  for (int k = 4; k <= 10; ++k) {
    const double delta = std::ldexp(1.0, -k);
    std::vector<double> v(base.values().begin(), base.values().end());
    for (std::size_t i = 0; i < base.points(); ++i)
      for (int c = 0; c < 9; ++c) v[i * 9 + c] += delta * std::sin(3.0 * base.times()[i] + c);
    auto other = linear_ode_series(OperatorPath(base.times(), 3, v));
    h.push_back(delta);
    d.push_back(max_diff(flow.m.values(), other.m.values()));
  }
  const double slope = oracle::loglog_slope(h, d);
  EXPECT_GE(slope, 0.9);
  EXPECT_LE(slope, 1.1);
}

TEST(LinearOde, RejectsBadRegularity) {
  EXPECT_THROW(linear_ode_series(scalar_ramp(4, 1.0), 2.0), Error);
  EXPECT_THROW(OperatorPath({0, 1}, 2, {1, 0, 0}), Error);
}

TEST(Duhamel, ZeroOmegaIsIdentity) {
  auto x = lift_piecewise_linear(
      GridPath::sample(uniform_grid(16), 2,
                       [](double t, std::span<double> v) {
                         v[0] = std::sin(3 * t);
                         v[1] = t * t;
                       }),
      3);
  auto y = duhamel(x, OperatorPath::zero(x.times(), 2));
  for (std::size_t i = 0; i <= 16; ++i) EXPECT_LT(max_abs_diff(y.cumulative(i), x.cumulative(i)), 1e-14);
}

TEST(Duhamel, ExponentialKernel) {
  auto x = lift_piecewise_linear(
      GridPath::sample(uniform_grid(1024), 1, [](double t, std::span<double> v) { v[0] = t; }), 2);
  auto omega = scalar_ramp(1024, 1.0);
  auto y = duhamel(x, omega);
  const double rk = oracle::rk45([](double, const oracle::Vec& v, oracle::Vec& dv) { dv[0] = v[0] + 1.0; },
                                 {0.0}, 0, 1)[0];
  EXPECT_NEAR(y.point(1024)[0], rk, 1e-7);
  EXPECT_NEAR(y.point(1024)[0], 1.718281828, 1e-7);
  EXPECT_LT(duhamel_residual(y.level1(), x.level1(), omega), 1e-8);
}

TEST(Duhamel, ResidualAndHomogeneity) {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> g;
  std::vector<double> xv(129 * 3, 0.0);
  for (std::size_t i = 1; i <= 128; ++i)
    for (int c = 0; c < 3; ++c) xv[i * 3 + c] = xv[(i - 1) * 3 + c] + 0.1 * g(rng);
  auto x = lift_piecewise_linear(GridPath(uniform_grid(128), 3, xv), 3);
  auto omega = smooth_omega(128, 0.8);
  auto flow = linear_ode_series(omega);
  auto y = duhamel(x, omega, flow);
  EXPECT_LT(duhamel_residual(y.level1(), x.level1(), omega), 1e-8);
  std::vector<TruncatedTensor> twice;
  for (const auto& inc : x.increments()) twice.push_back(dilate(2.0, inc));
  auto y2 = duhamel(GridRoughPath(x.times(), twice), omega, flow);
  for (std::size_t i = 0; i <= 128; ++i) {
    auto a = y2.cumulative(i), b = dilate(2.0, y.cumulative(i));
    double scale = 1.0;
    for (double v : b.data()) scale = std::max(scale, std::abs(v));
    EXPECT_LT(max_abs_diff(a, b), 1e-10 * scale);
  }
}
