#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "roughpath/path.hpp"

namespace roughpath {

/// Number of levels entering p-variation gauges: min(L, floor(p)).
int variation_levels(double p, int level);

/// Longest-path DP over grid partitions of [t_start, t_end] with the end
/// point advanced one interval at a time.
///
/// For each level j the sweep maintains sup_D sum |X^j_{t_a,t_b}|^{p/j}
/// (or of X^j - Y^j when a second path is given) for every end point reached
/// so far. Increments X_{a,b} are formed by right-multiplying running
/// products, so no group inverses are involved. Cost O(m^2) tensor products
/// for m intervals.
class VariationSweep {
 public:
  VariationSweep(const GridRoughPath& x, double p, std::size_t start, int levels = 0,
                 const GridRoughPath* y = nullptr);

  /// Extends the end point by one grid interval. Returns false at the end.
  bool advance();
  std::size_t start() const { return start_; }
  std::size_t end() const { return start_ + best_.size() - 1; }
  int levels() const { return levels_; }
  /// sup over partitions of [t_start, t_end] of sum |X^j|^{p/j}.
  double sum(int j) const { return best_.back()[j - 1]; }
  /// Sum over levels of sum(j).
  double total() const;
  /// Same sums for an earlier end point (start <= b <= end()).
  double sum_at(std::size_t b, int j) const { return best_[b - start_][j - 1]; }

 private:
  const GridRoughPath* x_;
  const GridRoughPath* y_;
  double p_;
  std::size_t start_;
  int levels_;
  std::vector<TruncatedTensor> run_x_;
  std::vector<TruncatedTensor> run_y_;
  std::vector<std::vector<double>> best_;
  TruncatedTensor scratch_;
};

/// sup over grid partitions of the window of sum |X^j|^{p/j}.
double pvar_sum(const GridRoughPath& rp, int j, double p, std::size_t first, std::size_t last);
/// ||X^j||_{p/j} on the window: pvar_sum^{j/p}. Empty window gives 0.
double pvar_norm(const GridRoughPath& rp, int j, double p, std::size_t first, std::size_t last);
double pvar_norm(const GridRoughPath& rp, int j, double p);

/// xi(X) = sum_j ||X^j||_{p/j}^{1/j} over j <= min(L, floor p).
double xi_gauge(const GridRoughPath& rp, double p);
double xi_gauge(const GridRoughPath& rp, double p, std::size_t first, std::size_t last);

/// d(X, Y) = sum_j ||X^j - Y^j||_{p/j}; paths must share grid, dim and level.
double rough_distance(const GridRoughPath& x, const GridRoughPath& y, double p);

using VectorNorm = std::function<double(std::span<const double>)>;
double l1_norm(std::span<const double> v);

/// sup over grid partitions of sum |x_b - x_a|^q for a level-1 path.
double path_variation_sum(const GridPath& path, double q, std::size_t first, std::size_t last,
                          const VectorNorm& norm = l1_norm);
/// ||x||_{q} on the whole grid.
double qvar_norm(const GridPath& path, double q, const VectorNorm& norm = l1_norm);

/// Piecewise-linear interpolation through the sub-grid `keep` (grid indices,
/// must include the first and last point), re-sampled on the full grid.
GridPath project_piecewise_linear(const GridPath& path, std::span<const std::size_t> keep);

/// Superadditive two-parameter function on grid index pairs.
class Control {
 public:
  virtual ~Control() = default;
  virtual std::size_t points() const = 0;
  virtual double value(std::size_t a, std::size_t b) const = 0;
};

/// Checked evaluation: a <= b < points.
double control_eval(const Control& cv, std::size_t a, std::size_t b);

/// omega(s,t) = ||Lambda||_{q,[s,t]}^q + sum_j kappa^{-p} ||X^j||_{p/j,[s,t]}^{p/j}.
class CanonicalControl : public Control {
 public:
  /// kappa <= 0 selects kappa = xi(X) (or 1 when X is zero).
  CanonicalControl(GridRoughPath x, const GridPath* lambda, double p, double q,
                   double kappa = 0.0);

  std::size_t points() const override { return x_.points(); }
  double value(std::size_t a, std::size_t b) const override;
  /// omega(a, b) for all b >= a from a single sweep.
  std::vector<double> row(std::size_t a) const;
  double kappa() const { return kappa_; }

 private:
  GridRoughPath x_;
  std::unique_ptr<GridPath> lambda_;
  double p_;
  double q_;
  double kappa_;
};

/// Control given as a dense table over grid pairs (upper triangle used).
class TableControl : public Control {
 public:
  TableControl(std::size_t points, std::vector<double> table);
  std::size_t points() const override { return points_; }
  double value(std::size_t a, std::size_t b) const override { return table_[a * points_ + b]; }

 private:
  std::size_t points_;
  std::vector<double> table_;
};

}  // namespace roughpath
