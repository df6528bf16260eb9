#include "roughpath/lift.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "roughpath/error.hpp"

namespace roughpath {

GridRoughPath lift_piecewise_linear(const GridPath& path, int level) {
  if (path.points() < 2) throw Error(ErrorKind::kShape, "lift needs at least one interval");
  std::vector<TruncatedTensor> inc;
  inc.reserve(path.intervals());
  for (std::size_t i = 0; i < path.intervals(); ++i)
    inc.push_back(TruncatedTensor::segment(path.increment(i), level));
  return GridRoughPath(path.times(), std::move(inc));
}

GridRoughPath pushforward(std::span<const double> alpha, int rows, int cols,
                          const GridRoughPath& rp) {
  if (cols != rp.dim()) throw Error(ErrorKind::kShape, "pushforward: map does not fit the path");
  std::vector<TruncatedTensor> inc;
  inc.reserve(rp.intervals());
  for (const auto& x : rp.increments()) inc.push_back(apply_linear(alpha, rows, cols, x));
  return GridRoughPath(rp.times(), std::move(inc));
}

GridRoughPath concat(std::span<const GridRoughPath> pieces) {
  if (pieces.empty()) throw Error(ErrorKind::kShape, "concat needs at least one piece");
  std::vector<double> times = pieces.front().times();
  std::vector<TruncatedTensor> inc = pieces.front().increments();
  for (std::size_t k = 1; k < pieces.size(); ++k) {
    const auto& p = pieces[k];
    if (p.dim() != pieces.front().dim() || p.level() != pieces.front().level())
      throw Error(ErrorKind::kShape, "concat pieces must share dim and level");
    if (p.times().front() != times.back())
      throw Error(ErrorKind::kInvalidPartition, "concat pieces leave a gap or overlap");
    times.insert(times.end(), p.times().begin() + 1, p.times().end());
    inc.insert(inc.end(), p.increments().begin(), p.increments().end());
  }
  return GridRoughPath(std::move(times), std::move(inc));
}

Association associate(const AlmostRoughPath& arp, const Control* cv) {
  if (!(arp.theta > 1.0))
    throw Error(ErrorKind::kIllPosed, "association needs a defect exponent theta > 1");
  Association out{GridRoughPath(arp.times, arp.increments), {}, {}};
  const int level = out.path.level();
  out.defect.assign(level + 1, 0.0);
  out.defect_ratio.assign(level + 1, 0.0);
  if (!arp.candidate) return out;
  // dyadic triples (s, u, t) with u the midpoint index
  const std::size_t n = out.path.intervals();
  for (std::size_t width = 2; width <= n; width *= 2) {
    for (std::size_t s = 0; s + width <= n; s += width) {
      const std::size_t t = s + width;
      const std::size_t u = s + width / 2;
      TruncatedTensor whole = arp.candidate(s, t);
      TruncatedTensor split = arp.candidate(s, u) * arp.candidate(u, t);
      const double w = cv ? control_eval(*cv, s, t) : 0.0;
      for (int j = 1; j <= level; ++j) {
        double d = 0.0;
        auto a = whole[j];
        auto b = split[j];
        for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
        out.defect[j] = std::max(out.defect[j], d);
        if (w > 0.0) out.defect_ratio[j] = std::max(out.defect_ratio[j], d / std::pow(w, arp.theta));
      }
    }
  }
  return out;
}

GridRoughPath gamma_scale(const GridRoughPath& rp, int dim_v, int dim_w, double a, double b,
                          double c) {
  if (dim_v < 0 || dim_w < 0 || dim_v + 2 * dim_w != rp.dim())
    throw Error(ErrorKind::kShape, "gamma_scale: dimension does not split as V + W + W");
  const int d = rp.dim();
  std::vector<double> alpha(static_cast<std::size_t>(d) * d, 0.0);
  for (int i = 0; i < d; ++i) alpha[i * d + i] = i < dim_v ? a : (i < dim_v + dim_w ? b : c);
  return pushforward(alpha, d, d, rp);
}

GridRoughPath join(const GridRoughPath& x, const GridPath& lambda) {
  if (x.times() != lambda.times())
    throw Error(ErrorKind::kShape, "join: paths must share the time grid");
  const int dx = x.dim();
  const int dl = lambda.dim();
  std::vector<int> map_x(dx);
  std::iota(map_x.begin(), map_x.end(), 0);
  std::vector<TruncatedTensor> inc;
  inc.reserve(x.intervals());
  for (std::size_t i = 0; i < x.intervals(); ++i) {
    TruncatedTensor g = embed(tensor_log(x.increment(i)), dx + dl, map_x);
    auto h = lambda.increment(i);
    for (int c = 0; c < dl; ++c) g[1][dx + c] += h[c];
    inc.push_back(tensor_exp(g));
  }
  return GridRoughPath(x.times(), std::move(inc));
}

GridRoughPath translate(const GridRoughPath& x, const GridPath& h) {
  if (x.times() != h.times() || x.dim() != h.dim())
    throw Error(ErrorKind::kShape, "translate: path shapes differ");
  std::vector<TruncatedTensor> inc;
  inc.reserve(x.intervals());
  for (std::size_t i = 0; i < x.intervals(); ++i) {
    TruncatedTensor g = tensor_log(x.increment(i));
    auto d = h.increment(i);
    for (int c = 0; c < x.dim(); ++c) g[1][c] += d[c];
    inc.push_back(tensor_exp(g));
  }
  return GridRoughPath(x.times(), std::move(inc));
}

GridRoughPath project_block(const GridRoughPath& rp, int offset, int dim) {
  if (offset < 0 || dim < 1 || offset + dim > rp.dim())
    throw Error(ErrorKind::kShape, "project_block: block out of range");
  std::vector<double> alpha(static_cast<std::size_t>(dim) * rp.dim(), 0.0);
  for (int i = 0; i < dim; ++i) alpha[i * rp.dim() + offset + i] = 1.0;
  return pushforward(alpha, dim, rp.dim(), rp);
}

GridRoughPath retruncate(const GridRoughPath& rp, int level) {
  std::vector<TruncatedTensor> inc;
  inc.reserve(rp.intervals());
  const int keep = std::min(level, rp.level());
  for (const auto& x : rp.increments()) {
    TruncatedTensor t(rp.dim(), level);
    for (int j = 0; j <= keep; ++j) std::copy(x[j].begin(), x[j].end(), t[j].begin());
    inc.push_back(std::move(t));
  }
  return GridRoughPath(rp.times(), std::move(inc));
}

GridRoughPath reverse(const GridRoughPath& rp) {
  const auto& t = rp.times();
  const double t0 = t.front();
  const double t1 = t.back();
  std::vector<double> times(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) times[i] = t0 + t1 - t[t.size() - 1 - i];
  std::vector<TruncatedTensor> inc;
  inc.reserve(rp.intervals());
  for (std::size_t i = rp.intervals(); i-- > 0;) inc.push_back(group_inverse(rp.increment(i)));
  return GridRoughPath(std::move(times), std::move(inc));
}

}  // namespace roughpath
