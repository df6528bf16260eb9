#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace roughpath {

/// Coefficient sigma(eps, y) in L(V, W') with analytic derivatives.
///
/// eval(j, k, eps, y, out) writes d_eps^j d_y^k sigma(eps, y) as a dense array
/// indexed [o][a_1]...[a_k][b]: o over out_dim, a_r over point_dim, b over
/// drive_dim, row-major. The result has out_dim * point_dim^k * drive_dim
/// entries and is symmetric in the a-slots.
class SmoothCoefficient {
 public:
  virtual ~SmoothCoefficient() = default;

  virtual int point_dim() const = 0;
  virtual int drive_dim() const = 0;
  virtual int out_dim() const = 0;
  virtual bool eps_dependent() const { return false; }
  /// Largest supported j + k.
  virtual int max_order() const = 0;

  virtual void eval(int j, int k, double eps, std::span<const double> y,
                    std::span<double> out) const = 0;

  std::size_t size(int k) const;
  std::vector<double> eval(int j, int k, double eps, std::span<const double> y) const;
  /// Convenience for eps-free use: d_y^k sigma(0, y).
  std::vector<double> derivative(int k, std::span<const double> y) const {
    return eval(0, k, 0.0, y);
  }

 protected:
  /// Throws a derivative-order error when j + k exceeds max_order, and a
  /// shape error on bad buffer sizes.
  void check(int j, int k, std::span<const double> y, std::span<double> out) const;
};

using CoefficientPtr = std::shared_ptr<const SmoothCoefficient>;

/// Operator norm of a derivative array on l1 spaces: max over (a..., b) of
/// the l1 norm over o.
double operator_norm(std::span<const double> deriv, int out_dim);

struct SupNormReport {
  int k = 0;
  double radius = 0.0;
  double value = 0.0;
  std::size_t samples = 0;
};

/// M(f; k, R) = max_{j<=k} sup_{|y|_1 <= R} |d_y^j f(eps, y)|, estimated on a
/// deterministic Halton sample of the l1 ball (plus the origin). A lower
/// bound of the true supremum.
SupNormReport sup_norm(const SmoothCoefficient& f, int k, double radius,
                       std::size_t samples = 4096, double eps = 0.0);

// ---- families -------------------------------------------------------------

/// sigma(y) = A, A given as out x drive.
CoefficientPtr make_constant(int point_dim, int out_dim, int drive_dim, std::vector<double> a);
/// sigma(y)<v> = A v + B<y, v>, A out x drive, B [o][a][b].
CoefficientPtr make_linear(int point_dim, int out_dim, int drive_dim, std::vector<double> a,
                           std::vector<double> b);

struct Monomial {
  int out = 0;
  int drive = 0;
  double coef = 0.0;
  std::vector<int> powers;  // one exponent per point coordinate
};
/// Entry-wise polynomials of total degree <= 4.
CoefficientPtr make_polynomial(int point_dim, int out_dim, int drive_dim,
                               std::vector<Monomial> terms);

enum class RidgeShape { kSin, kCos, kSinSquared, kCosSquared, kIdentity };
struct RidgeEntry {
  int out = 0;
  int drive = 0;
  double alpha = 0.0;
  double beta = 1.0;
  RidgeShape shape = RidgeShape::kSin;
  std::vector<double> u;  // direction in point space
  double gamma = 0.0;
};
/// Entry-wise alpha + beta * phi(<u, y> + gamma).
CoefficientPtr make_ridge(int point_dim, int out_dim, int drive_dim,
                          std::vector<RidgeEntry> entries);

/// sigma(eps, y) = sum_m eps^m s_m(y); every s_m eps-free with equal shapes.
CoefficientPtr make_epsilon_expansion(std::vector<CoefficientPtr> terms);
/// y -> sigma(eps0, y) as an eps-free coefficient.
CoefficientPtr fix_epsilon(CoefficientPtr inner, double eps0);
CoefficientPtr make_sum(std::vector<CoefficientPtr> terms);
CoefficientPtr make_scaled(double scale, CoefficientPtr inner);
/// sigma(eps, chi(y)) with chi the identity on [-R, R] in every coordinate
/// and a smooth bounded cutoff of width w beyond.
CoefficientPtr make_clamped(CoefficientPtr inner, double radius, double width = 1.0);
/// y -> sigma(eps, y + shift).
CoefficientPtr make_shifted(CoefficientPtr inner, std::vector<double> shift);

/// Coordinate chi of the clamp and its derivatives (order <= 8).
double clamp_derivative(int order, double x, double radius, double width);

/// Builds a coefficient from {"family": name, ...}. Throws config errors.
CoefficientPtr coefficient_from_json(const nlohmann::json& spec);

// ---- derived coefficients -------------------------------------------------

/// Block sum of coefficients on a big space. Each term reads its point from
/// [point_offset, +inner point_dim), its drive from [drive_offset, ...) and
/// adds into outputs [out_offset, ...). Identity terms copy a drive block.
class StackedCoefficient : public SmoothCoefficient {
 public:
  struct Term {
    CoefficientPtr coef;
    int out_offset = 0;
    int point_offset = 0;
    int drive_offset = 0;
  };
  struct Identity {
    int out_offset = 0;
    int drive_offset = 0;
    int dim = 0;
  };

  StackedCoefficient(int point_dim, int out_dim, int drive_dim, std::vector<Term> terms,
                     std::vector<Identity> identities = {});

  int point_dim() const override { return point_dim_; }
  int drive_dim() const override { return drive_dim_; }
  int out_dim() const override { return out_dim_; }
  bool eps_dependent() const override;
  int max_order() const override;
  void eval(int j, int k, double eps, std::span<const double> y,
            std::span<double> out) const override;

 private:
  int point_dim_;
  int out_dim_;
  int drive_dim_;
  std::vector<Term> terms_;
  std::vector<Identity> identities_;
};

/// Psi_beta(y, k) = beta (f(y) - f(y - k / beta)) over W + W.
CoefficientPtr psi_beta(CoefficientPtr f, double beta);
/// Phi_beta(x, y, z)<xi> = (xi, f(y) xi, Psi_beta(y, z) xi) over V + W + W.
CoefficientPtr phi_beta(CoefficientPtr f, double beta);
/// F(x, y)<xi> = (xi, f(y) xi) over V + W.
CoefficientPtr lift_coefficient(CoefficientPtr f);

/// Position of the state blocks y^0, ..., y^{m-1} (each of dimension W)
/// inside a larger point space, and of the driving block.
struct ExpansionLayout {
  int point_dim = 0;
  std::vector<int> y_offsets;
  int drive_offset = 0;
};

/// [eps^order] d_y^r sigma(eps, y^0 + sum_{i>=1} eps^i y^i) as [o][a_1..a_r][b]
/// with a over W. `ys[i]` is y^i.
std::vector<double> taylor_coefficient(const SmoothCoefficient& sigma, int order, int r,
                                       std::span<const std::vector<double>> ys);

/// f_n = [eps^{n-1}] sigma(eps, y^0 + sum eps^i y^i) composed with the drive
/// block projection, as a coefficient on the layout's point space. The drive
/// dimension of the result is layout.point_dim; sigma's drive block sits at
/// layout.drive_offset. Requires layout.y_offsets.size() == n.
CoefficientPtr build_fn(CoefficientPtr sigma, int n, ExpansionLayout layout);
/// g_n = [eps^n] b(eps, y^0 + sum_{i<n} eps^i y^i) on the same conventions.
CoefficientPtr build_gn(CoefficientPtr b, int n, ExpansionLayout layout);

/// Ordered tuples (i_1..i_k), i_s >= 1, with sum m.
std::vector<std::vector<int>> compositions(int m, int k);

}  // namespace roughpath
