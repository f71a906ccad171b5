#ifndef SPHERE_PINCH_HARMONICS_HPP
#define SPHERE_PINCH_HARMONICS_HPP

#include <cmath>
#include <cstdint>
#include <numbers>

#include "errors.hpp"

namespace sphere_pinch {

/// Volume of the unit d-sphere, 2 pi^{(d+1)/2} / Gamma((d+1)/2).
inline double sphere_volume(int d) {
  const double h = 0.5 * (d + 1);
  return 2.0 * std::pow(std::numbers::pi, h) / std::tgamma(h);
}

inline std::int64_t binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || n < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  std::int64_t out = 1;
  for (std::int64_t i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return out;
}

/// Dimension of degree-l spherical harmonics on the unit d-sphere.
inline std::int64_t harmonic_dimension(int d, int l) {
  if (d < 1 || l < 0) throw DomainError("harmonic_dimension needs d >= 1, l >= 0");
  if (l == 0) return 1;
  if (d == 1) return 2;
  if (l == 1) return d + 1;
  return binomial(l + d, d) - binomial(l + d - 2, d);
}

} // namespace sphere_pinch

#endif // SPHERE_PINCH_HARMONICS_HPP
