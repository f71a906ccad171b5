#ifndef SPHERE_PINCH_QUADRATURE_HPP
#define SPHERE_PINCH_QUADRATURE_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>

namespace sphere_pinch::quadrature {

/// Gauss-Legendre rule with P nodes on [-1, 1], built by Newton iteration on P_P.
template <std::size_t P>
struct GaussLegendre {
  std::array<double, P> nodes{};
  std::array<double, P> weights{};

  GaussLegendre() {
    for (std::size_t i = 0; i < P; ++i) {
      double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                          (static_cast<double>(P) + 0.5));
      double dp = 1.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0, p1 = x;
        for (std::size_t k = 2; k <= P; ++k) {
          const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
          p0 = p1;
          p1 = pk;
        }
        dp = static_cast<double>(P) * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      nodes[i] = x;
      weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }
};

inline const GaussLegendre<5>& gauss5() {
  static const GaussLegendre<5> rule;
  return rule;
}

/// Composite 5-point Gauss-Legendre over [lo, hi] with `panels` equal panels.
template <class F>
double integrate(F&& f, double lo, double hi, std::size_t panels) {
  const auto& rule = gauss5();
  const double width = (hi - lo) / static_cast<double>(panels);
  double total = 0.0;
  for (std::size_t p = 0; p < panels; ++p) {
    const double mid = lo + (static_cast<double>(p) + 0.5) * width;
    double acc = 0.0;
    for (std::size_t q = 0; q < 5; ++q) acc += rule.weights[q] * f(mid + 0.5 * width * rule.nodes[q]);
    total += 0.5 * width * acc;
  }
  return total;
}

} // namespace sphere_pinch::quadrature

#endif // SPHERE_PINCH_QUADRATURE_HPP
