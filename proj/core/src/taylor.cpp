#include "roughpath/taylor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "roughpath/error.hpp"
#include "roughpath/lift.hpp"
#include "roughpath/rough_integral.hpp"

namespace roughpath {

double expansion_nu(int index) {
  if (index == -2) return 1.0;
  if (index == -1) return 0.0;
  if (index < 0) throw Error(ErrorKind::kDomain, "expansion block index must be >= -2");
  return index;
}

double remainder_nu(int index) {
  if (index == -3) return 1.0;
  if (index == -2 || index == -1) return 0.0;
  if (index < 0) throw Error(ErrorKind::kDomain, "remainder block index must be >= -3");
  return index;
}

std::vector<double> block_tensor(const TruncatedTensor& x, std::span<const int> offsets,
                                 std::span<const int> dims) {
  const int j = static_cast<int>(offsets.size());
  if (dims.size() != offsets.size()) throw Error(ErrorKind::kShape, "block_tensor: sizes");
  if (j < 1 || j > x.level()) throw Error(ErrorKind::kDomain, "block_tensor: level out of range");
  const int d = x.dim();
  for (int s = 0; s < j; ++s)
    if (offsets[s] < 0 || offsets[s] + dims[s] > d)
      throw Error(ErrorKind::kShape, "block_tensor: block out of range");
  const auto level = x[j];
  std::size_t total = 1;
  for (int s = 0; s < j; ++s) total *= dims[s];
  std::vector<double> out(total);
  std::vector<int> c(j, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t g = 0;
    for (int s = 0; s < j; ++s) g = g * d + offsets[s] + c[s];
    out[flat] = level[g];
    for (int s = j - 1; s >= 0; --s) {
      if (++c[s] < dims[s]) break;
      c[s] = 0;
    }
  }
  return out;
}

namespace {

/// y -> d_y b(y) read as a W (x) W valued coefficient on V-hat.
class DerivativeOutput : public SmoothCoefficient {
 public:
  explicit DerivativeOutput(CoefficientPtr inner) : inner_(std::move(inner)) {
    if (inner_->out_dim() != inner_->point_dim())
      throw Error(ErrorKind::kShape, "b must map into the state space");
  }
  int point_dim() const override { return inner_->point_dim(); }
  int drive_dim() const override { return inner_->drive_dim(); }
  int out_dim() const override { return inner_->out_dim() * inner_->point_dim(); }
  int max_order() const override { return inner_->max_order() - 1; }
  void eval(int j, int k, double eps, std::span<const double> y,
            std::span<double> out) const override {
    check(j, k, y, out);
    inner_->eval(j, k + 1, eps, y, out);
  }

 private:
  CoefficientPtr inner_;
};

GridPath block_path(const GridPath& full, int offset, int dim) {
  std::vector<double> v(full.points() * dim);
  for (std::size_t i = 0; i < full.points(); ++i) {
    auto row = full.value(i);
    std::copy(row.begin() + offset, row.begin() + offset + dim, v.begin() + i * dim);
  }
  return GridPath(full.times(), dim, std::move(v));
}

/// Path that is zero outside [offset, offset + h.dim()) of a dim-wide space.
GridPath embed(const GridPath& h, int dim, int offset) {
  std::vector<double> v(h.points() * dim, 0.0);
  for (std::size_t i = 0; i < h.points(); ++i) {
    auto row = h.value(i);
    std::copy(row.begin(), row.end(), v.begin() + i * dim + offset);
  }
  return GridPath(h.times(), dim, std::move(v));
}

std::vector<double> iterated_at(const GridRoughPath& joint, std::size_t s, std::size_t t,
                                std::span<const int> indices,
                                const std::function<int(int)>& offset,
                                const std::function<int(int)>& dim) {
  if (indices.empty() || static_cast<int>(indices.size()) > joint.level())
    throw Error(ErrorKind::kDomain, "iterated: need 1 <= j <= level");
  std::vector<int> offs, dims;
  for (int i : indices) {
    offs.push_back(offset(i));
    dims.push_back(dim(i));
  }
  return block_tensor(joint.increment(s, t), offs, dims);
}

double gauge_of(const GridRoughPath& joint, std::span<const int> indices,
                const std::function<int(int)>& offset, const std::function<int(int)>& dim) {
  if (indices.empty() || static_cast<int>(indices.size()) > joint.level())
    throw Error(ErrorKind::kDomain, "gauge: need 1 <= j <= level");
  std::vector<int> offs, dims;
  for (int i : indices) {
    offs.push_back(offset(i));
    dims.push_back(dim(i));
  }
  double g = 0.0;
  for (std::size_t t = 1; t < joint.points(); ++t)
    g = std::max(g, l1_norm(block_tensor(joint.cumulative(t), offs, dims)));
  return g;
}

}  // namespace

int ExpansionBundle::offset(int index) const {
  if (index < -2 || index > n) throw Error(ErrorKind::kDomain, "expansion block index");
  if (index == -2) return 0;
  if (index == -1) return v;
  return v + vhat + index * w;
}

int ExpansionBundle::block_dim(int index) const {
  if (index < -2 || index > n) throw Error(ErrorKind::kDomain, "expansion block index");
  return index == -2 ? v : index == -1 ? vhat : w;
}

std::vector<double> ExpansionBundle::value(int k, std::size_t i) const {
  if (k < 0 || k > n) throw Error(ErrorKind::kDomain, "expansion term index");
  auto row = terms[k].value(i);
  std::vector<double> out(row.begin(), row.end());
  if (k == 0)
    for (int c = 0; c < w; ++c) out[c] += y0[c];
  return out;
}

std::vector<double> ExpansionBundle::iterated(std::size_t s, std::size_t t,
                                              std::span<const int> indices) const {
  return iterated_at(
      joint, s, t, indices, [this](int i) { return offset(i); },
      [this](int i) { return block_dim(i); });
}

double ExpansionBundle::gauge(std::span<const int> indices) const {
  return gauge_of(
      joint, indices, [this](int i) { return offset(i); },
      [this](int i) { return block_dim(i); });
}

ExpansionBundle expand(const CoefficientPtr& sigma, const CoefficientPtr& b,
                       const GridRoughPath& x, const GridPath& lambda,
                       std::span<const double> y0, int n, const SolverConfig& cfg) {
  if (n < 0) throw Error(ErrorKind::kDomain, "expansion order must be >= 0");
  const int w = sigma->point_dim();
  if (sigma->out_dim() != w || b->point_dim() != w || b->out_dim() != w ||
      static_cast<int>(y0.size()) != w)
    throw Error(ErrorKind::kShape, "expand: sigma, b and y0 must share the state space");
  if (sigma->drive_dim() != x.dim() || b->drive_dim() != lambda.dim())
    throw Error(ErrorKind::kShape, "expand: drive dimensions do not match X and Lambda");
  if (lambda.times() != x.times()) throw Error(ErrorKind::kShape, "expand: grids differ");
  if (n >= 1 && sigma->max_order() < n - 1 + x.level())
    throw Error(ErrorKind::kDerivativeOrder, "sigma lacks derivatives for this order");
  if (b->max_order() < std::max(n, 2) + x.level() - 1)
    throw Error(ErrorKind::kDerivativeOrder, "b lacks derivatives for this order");

  ExpansionBundle out;
  out.n = n;
  out.v = x.dim();
  out.vhat = lambda.dim();
  out.w = w;
  out.y0.assign(y0.begin(), y0.end());
  const int level = x.level();
  const auto b0 = b->eps_dependent() ? fix_epsilon(b, 0.0) : b;

  // Y^0 from the eps = 0 equation driven by Lambda.
  const auto lam = lift_piecewise_linear(lambda, level);
  const auto sol0 = solve(b0, lam, y0, cfg);
  const auto z0 = sol0.z.level1();
  out.terms.push_back(block_path(z0, out.vhat, w));
  out.forcing_i.emplace_back();
  out.forcing_j.emplace_back();

  GridRoughPath joint = join(join(x, lambda), out.terms[0]);
  std::vector<double> base(joint.dim(), 0.0);
  std::copy(y0.begin(), y0.end(), base.begin() + out.v + out.vhat);

  // Omega = int d_y b(0, Y^0) dLambda.
  {
    const int d = joint.dim();
    StackedCoefficient om(d, w * w, d,
                          {{std::make_shared<DerivativeOutput>(b0), 0, out.v + out.vhat, out.v}});
    out.omega = operator_path(integrate(om, joint, base).level1(), w);
    out.flow = linear_ode_series(out.omega, 1.0);
  }

  for (int k = 1; k <= n; ++k) {
    const int d = joint.dim();
    ExpansionLayout lay;
    lay.point_dim = d;
    for (int i = 0; i < k; ++i) lay.y_offsets.push_back(out.v + out.vhat + i * w);
    lay.drive_offset = 0;
    auto fk = build_fn(sigma, k, lay);
    lay.drive_offset = out.v;
    auto gk = build_gn(b, k, lay);
    StackedCoefficient s(d, d + 2 * w, d, {{fk, d, 0, 0}, {gk, d + w, 0, 0}}, {{0, 0, d}});
    const auto r = integrate(s, joint, base);
    const auto r1 = r.level1();
    auto fi = block_path(r1, d, w);
    auto fj = block_path(r1, d + w, w);
    std::vector<double> sum(fi.points() * w);
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = fi.values()[i] + fj.values()[i];
    const GridPath forcing(fi.times(), w, std::move(sum));
    const auto h = duhamel_shift(forcing, out.flow, out.omega);

    // (xi, I + J) then translate the new block by H.
    std::vector<double> a(static_cast<std::size_t>(d + w) * (d + 2 * w), 0.0);
    for (int c = 0; c < d; ++c) a[c * (d + 2 * w) + c] = 1.0;
    for (int c = 0; c < w; ++c) {
      a[(d + c) * (d + 2 * w) + d + c] = 1.0;
      a[(d + c) * (d + 2 * w) + d + w + c] = 1.0;
    }
    joint = translate(pushforward(a, d + w, d + 2 * w, r), embed(h, d + w, d));
    out.terms.push_back(block_path(joint.level1(), d, w));
    out.forcing_i.push_back(std::move(fi));
    out.forcing_j.push_back(std::move(fj));
    base.resize(d + w, 0.0);
    spdlog::debug("expand: term {} done, joint dim {}", k, joint.dim());
  }
  out.joint = std::move(joint);
  return out;
}

int RemainderBundle::offset(int index) const {
  if (index < -3 || index > n) throw Error(ErrorKind::kDomain, "remainder block index");
  if (index == -3) return 0;
  if (index == -2) return v;
  return v + vhat + (index + 1) * w;
}

int RemainderBundle::block_dim(int index) const {
  if (index < -3 || index > n) throw Error(ErrorKind::kDomain, "remainder block index");
  return index == -3 ? v : index == -2 ? vhat : w;
}

std::vector<double> RemainderBundle::iterated(std::size_t s, std::size_t t,
                                              std::span<const int> indices) const {
  return iterated_at(
      joint, s, t, indices, [this](int i) { return offset(i); },
      [this](int i) { return block_dim(i); });
}

double RemainderBundle::gauge(std::span<const int> indices) const {
  return gauge_of(
      joint, indices, [this](int i) { return offset(i); },
      [this](int i) { return block_dim(i); });
}

double RemainderBundle::q_sup() const {
  double m = 0.0;
  for (std::size_t i = 0; i < q_first_level.points(); ++i)
    m = std::max(m, l1_norm(q_first_level.value(i)));
  return m;
}

RemainderBundle remainder(const CoefficientPtr& sigma, const CoefficientPtr& b,
                          const ExpansionBundle& bundle, double epsilon,
                          const SolverConfig& cfg) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw Error(ErrorKind::kDomain, "remainder: epsilon must lie in [0, 1]");
  const int n = bundle.n, v = bundle.v, vhat = bundle.vhat, w = bundle.w;
  RemainderBundle out;
  out.n = n;
  out.epsilon = epsilon;
  out.v = v;
  out.vhat = vhat;
  out.w = w;

  // Driver (eps X, Lambda, Y^0, eps Y^1, ..., eps^{n-1} Y^{n-1}).
  const int dd = v + vhat + n * w;
  const int dj = bundle.joint.dim();
  std::vector<double> scale(dd, 1.0);
  for (int c = 0; c < v; ++c) scale[c] = epsilon;
  for (int i = 1; i < n; ++i)
    for (int c = 0; c < w; ++c) scale[v + vhat + i * w + c] = std::pow(epsilon, i);
  std::vector<double> a(static_cast<std::size_t>(dd) * dj, 0.0);
  for (int c = 0; c < dd; ++c) a[c * dj + c] = scale[c];
  const auto driver = pushforward(a, dd, dj, bundle.joint);

  const auto hp = std::make_shared<StackedCoefficient>(
      w, w, dd,
      std::vector<StackedCoefficient::Term>{{fix_epsilon(sigma, epsilon), 0, 0, 0},
                                            {fix_epsilon(b, epsilon), 0, 0, v}});
  out.rde = solve(hp, driver, bundle.y0, cfg);
  const auto& z = out.rde.z;

  const auto z1 = z.level1();
  out.solution = block_path(z1, dd, w);
  std::vector<double> q(out.solution.values().begin(), out.solution.values().end());
  for (int k = 0; k <= n; ++k) {
    const double e = std::pow(epsilon, k);
    const auto tv = bundle.terms[k].values();
    for (std::size_t i = 0; i < q.size(); ++i) q[i] -= e * tv[i];
  }
  out.q_first_level = GridPath(out.solution.times(), w, std::move(q));

  // Hat family read off Z = (driver, Y^eps).
  const int dz = dd + w;
  const int dh = v + vhat + (n + 2) * w;
  std::vector<double> m(static_cast<std::size_t>(dh) * dz, 0.0);
  for (int c = 0; c < v + vhat; ++c) m[c * dz + c] = 1.0;
  for (int c = 0; c < w; ++c) {
    const int ye = v + vhat + c;
    m[ye * dz + dd + c] = 1.0;
    for (int i = 0; i < n; ++i) m[(v + vhat + (i + 1) * w + c) * dz + v + vhat + i * w + c] = 1.0;
    const int qn = v + vhat + (n + 1) * w + c;
    m[qn * dz + dd + c] = 1.0;
    for (int i = 0; i < n; ++i) m[qn * dz + v + vhat + i * w + c] = -1.0;
  }
  out.joint = retruncate(pushforward(m, dh, dz, retruncate(z, std::min(z.level(), 2))),
                         std::min(z.level(), 2));
  return out;
}

OrderFit order_fit(std::span<const double> eps, std::span<const double> gauges, double zero) {
  if (eps.size() != gauges.size()) throw Error(ErrorKind::kShape, "order_fit: sizes differ");
  if (eps.size() < 4) throw Error(ErrorKind::kDomain, "order_fit needs at least 4 samples");
  const auto [lo, hi] = std::minmax_element(eps.begin(), eps.end());
  if (!(*lo > 0.0)) throw Error(ErrorKind::kDomain, "order_fit: epsilons must be positive");
  if (*hi / *lo < 50.0) throw Error(ErrorKind::kDomain, "order_fit: epsilon range too narrow");
  OrderFit fit;
  if (std::all_of(gauges.begin(), gauges.end(), [zero](double g) { return std::abs(g) <= zero; })) {
    fit.exact = true;
    return fit;
  }
  if (std::any_of(gauges.begin(), gauges.end(), [](double g) { return g == 0.0; }))
    throw Error(ErrorKind::kDomain, "order_fit: gauge vanishes at some epsilons");
  const std::size_t m = eps.size();
  std::vector<double> lx(m), ly(m);
  for (std::size_t i = 0; i < m; ++i) {
    lx[i] = std::log(eps[i]);
    ly[i] = std::log(std::abs(gauges[i]));
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / m;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = ly[i] - fit.intercept - fit.slope * lx[i];
    sse += r * r;
  }
  fit.stderr_slope = m > 2 ? std::sqrt(sse / (m - 2) / sxx) : 0.0;
  fit.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return fit;
}

}  // namespace roughpath
