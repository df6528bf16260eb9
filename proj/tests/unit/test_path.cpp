#include <gtest/gtest.h>

#include <cmath>

#include <sstream>

#include "roughpath/error.hpp"
#include "roughpath/lift.hpp"
#include "roughpath/path.hpp"

using namespace roughpath;

TEST(GridPath, RejectsBadGrids) {
  EXPECT_THROW(GridPath({0.0, 0.0}, 1, {0.0, 1.0}), Error);
  EXPECT_THROW(GridPath({0.0, 1.0}, 1, {1.0, 1.0}), Error);
  EXPECT_THROW(GridPath({0.0, 1.0}, 2, {0.0, 1.0}), Error);
}

TEST(GridPath, CsvRoundTrip) {
  std::istringstream in("time,x1,x2\n0,0,0\n0.5,1.5,-2\n1,0.25,3e-3\n");
  auto p = read_path_csv(in);
  EXPECT_EQ(p.dim(), 2);
  EXPECT_EQ(p.points(), 3u);
  EXPECT_DOUBLE_EQ(p.value(2)[1], 3e-3);
  std::ostringstream out;
  write_path_csv(out, p);
  std::istringstream again(out.str());
  auto q = read_path_csv(again);
  EXPECT_EQ(std::vector<double>(q.values().begin(), q.values().end()),
            std::vector<double>(p.values().begin(), p.values().end()));
}

TEST(GridPath, CsvShiftsNonzeroStart) {
  std::istringstream in("time,x1\n0,2\n1,5\n");
  auto p = read_path_csv(in);
  EXPECT_EQ(p.value(0)[0], 0.0);
  EXPECT_EQ(p.value(1)[0], 3.0);
}

TEST(GridPath, CsvErrors) {
  std::istringstream bad_header("t,x1\n0,0\n");
  EXPECT_THROW(read_path_csv(bad_header), Error);
  std::istringstream bad_start("time,x1\n0.1,0\n1,1\n");
  EXPECT_THROW(read_path_csv(bad_start), Error);
  std::istringstream bad_order("time,x1\n0,0\n0.5,1\n0.5,2\n");
  EXPECT_THROW(read_path_csv(bad_order), Error);
  std::istringstream bad_number("time,x1\n0,0\n1,abc\n");
  EXPECT_THROW(read_path_csv(bad_number), Error);
  try {
    read_path_csv(std::string("/nonexistent/file.csv"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIo);
  }
}

TEST(GridRoughPath, ChenOnGridTriples) {
  auto t = uniform_grid(16);
  auto path = GridPath::sample(t, 2, [](double s, std::span<double> v) {
    v[0] = std::sin(3 * s);
    v[1] = s * s - s;
  });
  auto rp = lift_piecewise_linear(path, 3);
  for (std::size_t s = 0; s <= 16; s += 3)
    for (std::size_t u = s; u <= 16; u += 2)
      for (std::size_t v = u; v <= 16; v += 5) {
        auto lhs = rp.increment(s, v);
        auto rhs = rp.increment(s, u) * rp.increment(u, v);
        EXPECT_LT(max_abs_diff(lhs, rhs), 1e-12);
        EXPECT_LT(max_abs_diff(rp.compose(s, v), lhs), 1e-12);
      }
}

TEST(GridRoughPath, WindowRebases) {
  auto rp = lift_piecewise_linear(GridPath({0, 0.5, 1}, 1, {0, 1, 3}), 2);
  auto w = rp.window(1, 2);
  EXPECT_EQ(w.points(), 2u);
  EXPECT_DOUBLE_EQ(w.point(1)[0], 2.0);
  EXPECT_THROW(rp.window(1, 1), Error);
}
