#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "roughpath/tensor.hpp"

namespace roughpath {

/// Piecewise-linear path sampled on a strictly increasing time grid, starting
/// at the origin. Values are stored row-major, one row of `dim` per time.
class GridPath {
 public:
  GridPath() = default;
  GridPath(std::vector<double> times, int dim, std::vector<double> values);

  /// Samples fn(t, out) on the grid and re-bases so the first value is zero.
  template <class Fn>
  static GridPath sample(std::vector<double> times, int dim, Fn&& fn) {
    std::vector<double> values(times.size() * dim);
    for (std::size_t i = 0; i < times.size(); ++i)
      fn(times[i], std::span<double>(values.data() + i * dim, dim));
    for (std::size_t i = times.size(); i-- > 0;)
      for (int c = 0; c < dim; ++c) values[i * dim + c] -= values[c];
    return GridPath(std::move(times), dim, std::move(values));
  }

  int dim() const { return dim_; }
  std::size_t points() const { return times_.size(); }
  std::size_t intervals() const { return times_.empty() ? 0 : times_.size() - 1; }
  const std::vector<double>& times() const { return times_; }
  std::span<const double> values() const { return values_; }
  std::span<const double> value(std::size_t i) const {
    return {values_.data() + i * dim_, static_cast<std::size_t>(dim_)};
  }
  /// Increment over interval i, i.e. value(i+1) - value(i).
  std::vector<double> increment(std::size_t i) const;

  /// Sub-path on grid indices [first, last], re-based to start at zero.
  GridPath window(std::size_t first, std::size_t last) const;

 private:
  std::vector<double> times_;
  int dim_ = 0;
  std::vector<double> values_;
};

/// Uniform grid 0 = t_0 < ... < t_n = 1.
std::vector<double> uniform_grid(std::size_t intervals);

/// Rough path on a time grid: one truncated-tensor increment per interval
/// plus cached cumulative signatures S_{0,i} for constant-time queries.
class GridRoughPath {
 public:
  GridRoughPath() = default;
  GridRoughPath(std::vector<double> times, std::vector<TruncatedTensor> increments);

  int dim() const { return dim_; }
  int level() const { return level_; }
  std::size_t intervals() const { return increments_.size(); }
  std::size_t points() const { return times_.size(); }
  const std::vector<double>& times() const { return times_; }

  /// Increment X_{t_i, t_{i+1}}.
  const TruncatedTensor& increment(std::size_t i) const { return increments_[i]; }
  const std::vector<TruncatedTensor>& increments() const { return increments_; }
  /// Cumulative signature S_{0,i} = X_{t_0, t_i}.
  const TruncatedTensor& cumulative(std::size_t i) const { return cumulative_[i]; }

  /// X_{t_a, t_b} = S_{0,a}^{-1} (x) S_{0,b}.
  TruncatedTensor increment(std::size_t a, std::size_t b) const;
  /// X_{t_a, t_b} by sequential Chen composition; no cancellation.
  TruncatedTensor compose(std::size_t a, std::size_t b) const;

  /// Level-1 value path t_i -> X^1_{0,t_i}.
  GridPath level1() const;
  /// Point value X^1_{0,t_i}.
  std::span<const double> point(std::size_t i) const { return cumulative_[i][1]; }

  GridRoughPath window(std::size_t first, std::size_t last) const;

 private:
  int dim_ = 0;
  int level_ = 0;
  std::vector<double> times_;
  std::vector<TruncatedTensor> increments_;
  std::vector<TruncatedTensor> cumulative_;
};

/// Reads `time,x1,...,xd` CSV. The first time must be 0; a nonzero first row
/// is subtracted from every row (logged as a warning).
GridPath read_path_csv(const std::string& file);
GridPath read_path_csv(std::istream& in, const std::string& source = "<stream>");
void write_path_csv(std::ostream& out, const GridPath& path,
                    std::span<const double> offset = {});

}  // namespace roughpath
