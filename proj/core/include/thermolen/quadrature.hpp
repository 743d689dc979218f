#pragma once

#include <vector>

namespace thermolen {

struct GaussLegendreRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule, nodes ascending. Rules are computed once per n
/// and cached; the returned reference stays valid for the program lifetime.
const GaussLegendreRule& gauss_legendre(int n);

/// Composite rule: integral of f over [a, b] split into `panels` equal panels.
template <class F>
double integrate_composite(F&& f, double a, double b, int panels, int order = 8) {
  const GaussLegendreRule& rule = gauss_legendre(order);
  const double h = (b - a) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      sum += rule.weights[k] * f(mid + 0.5 * h * rule.nodes[k]);
    }
  }
  return 0.5 * h * sum;
}

}  // namespace thermolen
