#pragma once

#include <functional>
#include <span>
#include <vector>

#include "roughpath/path.hpp"
#include "roughpath/variation.hpp"

namespace roughpath {

/// Canonical lift of a piecewise-linear path: each segment with increment v
/// gets (1, v, v^2/2!, v^3/3!).
GridRoughPath lift_piecewise_linear(const GridPath& path, int level);

/// Level j transformed by alpha^{(x)j}; alpha is rows x cols row-major.
GridRoughPath pushforward(std::span<const double> alpha, int rows, int cols,
                          const GridRoughPath& rp);

/// Joins rough paths on adjacent windows into one path on the union grid.
GridRoughPath concat(std::span<const GridRoughPath> pieces);

/// Candidate increments on the finest grid plus the defect exponent theta.
struct AlmostRoughPath {
  std::vector<double> times;
  /// Candidate Y_{t_i, t_{i+1}}; scalar part must be 1.
  std::vector<TruncatedTensor> increments;
  double theta = 0.0;
  /// Optional candidate on arbitrary grid pairs, used only for the defect
  /// diagnostic |Y_{s,t} - Y_{s,u} (x) Y_{u,t}|.
  std::function<TruncatedTensor(std::size_t, std::size_t)> candidate;
};

struct Association {
  GridRoughPath path;
  /// Max defect per level (index j), sampled on dyadic triples of the grid.
  std::vector<double> defect;
  /// Max of defect / omega(s,t)^theta over the same triples (0 if no control).
  std::vector<double> defect_ratio;
};

/// Associates the rough path on the finest grid: the output on grid pairs is
/// the Chen product of the per-interval candidates.
Association associate(const AlmostRoughPath& arp, const Control* cv = nullptr);

/// Block-diagonal pushforward (a Id_V) + (b Id_W) + (c Id_W).
GridRoughPath gamma_scale(const GridRoughPath& rp, int dim_v, int dim_w, double a, double b,
                          double c);

/// Joint rough path of a rough path X and a piecewise-linear path Lambda on
/// the same grid: per interval exp(log x_i + lambda_i) on V + V-hat.
GridRoughPath join(const GridRoughPath& x, const GridPath& lambda);

/// Rough path of X + H for a piecewise-linear H on the same grid.
GridRoughPath translate(const GridRoughPath& x, const GridPath& h);

/// Coordinate sub-block [offset, offset + dim) of a rough path.
GridRoughPath project_block(const GridRoughPath& rp, int offset, int dim);

/// Same path with every increment truncated (or zero-extended) to `level`.
GridRoughPath retruncate(const GridRoughPath& rp, int level);

/// Time reversal t -> 1 - t (grid reflected, increments inverted).
GridRoughPath reverse(const GridRoughPath& rp);

}  // namespace roughpath
