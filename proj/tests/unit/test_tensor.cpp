#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "roughpath/error.hpp"
#include "roughpath/tensor.hpp"

using roughpath::TruncatedTensor;

namespace {

TruncatedTensor make(int d, int level, std::initializer_list<std::vector<double>> levels) {
  TruncatedTensor t(d, level);
  int j = 0;
  for (const auto& v : levels) {
    std::copy(v.begin(), v.end(), t[j].begin());
    ++j;
  }
  return t;
}

}  // namespace

TEST(Tensor, ProductOfLevelOneElements) {
  auto a = make(2, 2, {{1}, {1, 2}, {0, 0, 0, 0}});
  auto b = make(2, 2, {{1}, {3, -1}, {0, 0, 0, 0}});
  auto c = a * b;
  EXPECT_DOUBLE_EQ(c[1][0], 4);
  EXPECT_DOUBLE_EQ(c[1][1], 1);
  // a (x) b
  EXPECT_DOUBLE_EQ(c[2][0], 3);
  EXPECT_DOUBLE_EQ(c[2][1], -1);
  EXPECT_DOUBLE_EQ(c[2][2], 6);
  EXPECT_DOUBLE_EQ(c[2][3], -2);
}

TEST(Tensor, ProductIsNotCommutative) {
  auto a = make(2, 2, {{1}, {1, 0}, {0, 0, 0, 0}});
  auto b = make(2, 2, {{1}, {0, 1}, {0, 0, 0, 0}});
  auto ab = a * b;
  auto ba = b * a;
  EXPECT_EQ(ab[2][1], 1.0);  // slot (1,2)
  EXPECT_EQ(ab[2][2], 0.0);  // slot (2,1)
  EXPECT_EQ(ba[2][1], 0.0);
  EXPECT_EQ(ba[2][2], 1.0);
}

TEST(Tensor, UnitIsIdentity) {
  std::mt19937_64 rng(1);
  auto x = oracle::random_group_element(rng, 3, 3);
  auto e = TruncatedTensor::unit(3, 3);
  EXPECT_EQ(roughpath::max_abs_diff(e * x, x), 0.0);
  EXPECT_EQ(roughpath::max_abs_diff(x * e, x), 0.0);
}

TEST(Tensor, ShapeMismatchThrows) {
  TruncatedTensor a(2, 2), b(3, 2), c(2, 3);
  EXPECT_THROW(a * b, roughpath::Error);
  EXPECT_THROW(a * c, roughpath::Error);
  EXPECT_THROW(TruncatedTensor(0, 2), roughpath::Error);
  EXPECT_THROW(TruncatedTensor(2, 0), roughpath::Error);
}

TEST(Tensor, Dilation) {
  auto a = make(1, 2, {{1}, {3}, {5}});
  auto r2 = roughpath::dilate(2.0, a);
  EXPECT_EQ(r2[1][0], 6.0);
  EXPECT_EQ(r2[2][0], 20.0);
  EXPECT_EQ(roughpath::max_abs_diff(roughpath::dilate(1.0, a), a), 0.0);
  auto r0 = roughpath::dilate(0.0, a);
  EXPECT_EQ(roughpath::max_abs_diff(r0, TruncatedTensor::unit(1, 2)), 0.0);
}

TEST(Tensor, InverseOfSegmentIsReversedSegment) {
  std::vector<double> v{0.3, -1.2, 2.0};
  auto s = TruncatedTensor::segment(v, 2);
  auto inv = roughpath::group_inverse(s);
  std::vector<double> mv{-0.3, 1.2, -2.0};
  EXPECT_LT(roughpath::max_abs_diff(inv, TruncatedTensor::segment(mv, 2)), 1e-15);
  auto e = TruncatedTensor::unit(3, 3);
  EXPECT_EQ(roughpath::max_abs_diff(roughpath::group_inverse(e), e), 0.0);
}

TEST(Tensor, InverseRequiresUnitScalar) {
  TruncatedTensor z(2, 2);
  EXPECT_THROW(roughpath::group_inverse(z), roughpath::Error);
  try {
    roughpath::group_inverse(z);
  } catch (const roughpath::Error& e) {
    EXPECT_EQ(e.kind(), roughpath::ErrorKind::kNotGroupElement);
  }
}

TEST(Tensor, RandomInverse) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    auto g = oracle::random_group_element(rng, 1 + trial % 4, 1 + trial % 3);
    auto prod = g * roughpath::group_inverse(g);
    EXPECT_LT(roughpath::max_abs_diff(prod, TruncatedTensor::unit(g.dim(), g.level())), 1e-12);
  }
}

TEST(Tensor, L1Norms) {
  auto a = make(2, 1, {{1}, {3, -4}});
  auto n = roughpath::l1_level_norms(a);
  EXPECT_EQ(n.level[1], 7.0);
  auto u = roughpath::l1_level_norms(TruncatedTensor::unit(2, 2));
  EXPECT_EQ(u.level, (std::vector<double>{1, 0, 0}));
}

TEST(Tensor, ConvolutionBoundOnLevelTwo) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    auto a = oracle::random_group_element(rng, 3, 2);
    auto b = oracle::random_group_element(rng, 3, 2);
    auto na = roughpath::l1_level_norms(a), nb = roughpath::l1_level_norms(b);
    auto nc = roughpath::l1_level_norms(a * b);
    EXPECT_LE(nc.level[2], na.level[1] * nb.level[1] + na.level[2] + nb.level[2] + 1e-12);
  }
}

TEST(Tensor, AssociativityAndDilationHomomorphism) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + trial % 4, level = 1 + trial % 3;
    auto a = oracle::random_group_element(rng, d, level);
    auto b = oracle::random_group_element(rng, d, level);
    auto c = oracle::random_group_element(rng, d, level);
    auto lhs = (a * b) * c;
    auto rhs = a * (b * c);
    double scale = 1.0;
    for (double x : lhs.data()) scale = std::max(scale, std::abs(x));
    EXPECT_LT(roughpath::max_abs_diff(lhs, rhs), 1e-12 * scale);
    for (double r : {-2.0, 0.5}) {
      auto l2 = roughpath::dilate(r, a) * roughpath::dilate(r, b);
      auto r2 = roughpath::dilate(r, a * b);
      double s2 = 1.0;
      for (double x : r2.data()) s2 = std::max(s2, std::abs(x));
      EXPECT_LT(roughpath::max_abs_diff(l2, r2), 1e-12 * s2);
    }
  }
}

TEST(Tensor, ExpLogRoundTrip) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = oracle::random_group_element(rng, 3, 3, 0.5);
    auto back = roughpath::tensor_exp(roughpath::tensor_log(g));
    EXPECT_LT(roughpath::max_abs_diff(back, g), 1e-12);
  }
}

TEST(Tensor, EmbedAndApplyLinear) {
  std::vector<double> v{1.0, 2.0};
  auto s = TruncatedTensor::segment(v, 3);
  const int map[] = {2, 0};
  auto e = roughpath::embed(s, 3, map);
  std::vector<double> w{2.0, 0.0, 1.0};
  EXPECT_LT(roughpath::max_abs_diff(e, TruncatedTensor::segment(w, 3)), 1e-15);
  // alpha = [[1, 1]] maps to a 1-d segment of length 3
  const double alpha[] = {1.0, 1.0};
  auto p = roughpath::apply_linear(alpha, 1, 2, s);
  std::vector<double> u{3.0};
  EXPECT_LT(roughpath::max_abs_diff(p, TruncatedTensor::segment(u, 3)), 1e-14);
}
