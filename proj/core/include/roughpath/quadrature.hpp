#pragma once

#include <vector>

namespace roughpath {

struct QuadratureRule {
  std::vector<double> nodes;    // on [0, 1]
  std::vector<double> weights;  // sum to 1
};

/// n-point Gauss-Legendre rule mapped to [0, 1]. Cached for n <= 64.
const QuadratureRule& gauss_legendre(int n);

/// Integral of fn over [a, b] with `panels` composite Gauss-Legendre panels.
template <class Fn>
double integrate_gl(Fn&& fn, double a, double b, int n = 16, int panels = 1) {
  const auto& rule = gauss_legendre(n);
  const double h = (b - a) / panels;
  double s = 0.0;
  for (int p = 0; p < panels; ++p)
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
      s += rule.weights[i] * fn(a + h * (p + rule.nodes[i]));
  return s * h;
}

}  // namespace roughpath
