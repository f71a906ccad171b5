#ifndef SPHERE_PINCH_TRIDIAGONAL_HPP
#define SPHERE_PINCH_TRIDIAGONAL_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace sphere_pinch {

/// Symmetric tridiagonal matrix: diag has size N, off has size N-1
/// (off[i] couples rows i and i+1).
struct SymTridiagonal {
  std::vector<double> diag;
  std::vector<double> off;

  [[nodiscard]] std::size_t size() const { return diag.size(); }

  /// Gershgorin interval containing the spectrum.
  [[nodiscard]] std::pair<double, double> gershgorin() const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) {
      const double rad = (i > 0 ? std::abs(off[i - 1]) : 0.0) + (i + 1 < n ? std::abs(off[i]) : 0.0);
      lo = std::min(lo, diag[i] - rad);
      hi = std::max(hi, diag[i] + rad);
    }
    return {lo, hi};
  }

  /// Number of eigenvalues strictly below x (Sturm sequence via LDL^T pivots).
  [[nodiscard]] std::size_t count_below(double x) const {
    const double tiny = std::numeric_limits<double>::min();
    std::size_t count = 0;
    double q = diag[0] - x;
    if (q < 0) ++count;
    for (std::size_t i = 1; i < size(); ++i) {
      if (std::abs(q) < tiny) q = -tiny;
      q = diag[i] - x - off[i - 1] * off[i - 1] / q;
      if (q < 0) ++count;
    }
    return count;
  }
};

/// index-th smallest eigenvalue (0-based) by bisection on the Sturm count.
inline double bisect_eigenvalue(const SymTridiagonal& t, std::size_t index, double tol = 1e-10,
                                int max_iter = 200) {
  auto [lo, hi] = t.gershgorin();
  const double pad = 1e-12 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
  lo -= pad;
  hi += pad;
  int it = 0;
  while (hi - lo > tol) {
    // stop once the interval cannot shrink further in double precision
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (t.count_below(mid) > index) hi = mid;
    else lo = mid;
    if (++it > max_iter) {
      std::ostringstream os;
      os << "bisection did not converge for eigenvalue #" << index << " after " << max_iter
         << " iterations (bracket [" << lo << ", " << hi << "], N=" << t.size() << ")";
      throw NumericalError(os.str());
    }
  }
  return 0.5 * (lo + hi);
}

/// Eigenvector for an isolated eigenvalue by inverse iteration, using
/// Gaussian elimination with partial pivoting on T - lambda I. The result is
/// orthogonalized against `previous` and has unit Euclidean norm.
inline std::vector<double> inverse_iteration(const SymTridiagonal& t, double lambda,
                                             std::span<const std::vector<double>> previous = {},
                                             int iterations = 4) {
  const std::size_t n = t.size();
  // Perturb the shift so the factorization stays nonsingular.
  const double scale = std::max(1.0, std::abs(lambda));
  const double shift = lambda + 1e-13 * scale;

  // LU with partial pivoting: row i holds (u0, u1, u2) on columns i, i+1, i+2.
  std::vector<double> u0(n), u1(n), u2(n), mult(n);
  std::vector<char> swapped(n, 0);
  {
    std::vector<double> d(n), up(n), lo(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = t.diag[i] - shift;
    for (std::size_t i = 0; i + 1 < n; ++i) up[i] = lo[i] = t.off[i];
    double cur0 = d[0], cur1 = n > 1 ? up[0] : 0.0, cur2 = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double below0 = lo[i], below1 = d[i + 1], below2 = i + 2 < n ? up[i + 1] : 0.0;
      if (std::abs(below0) > std::abs(cur0)) {
        swapped[i] = 1;
        u0[i] = below0; u1[i] = below1; u2[i] = below2;
        const double m = cur0 / below0;
        mult[i] = m;
        cur0 = cur1 - m * below1;
        cur1 = cur2 - m * below2;
      } else {
        u0[i] = cur0; u1[i] = cur1; u2[i] = cur2;
        const double m = cur0 != 0.0 ? below0 / cur0 : 0.0;
        mult[i] = m;
        cur0 = below1 - m * cur1;
        cur1 = below2 - m * cur2;
      }
      cur2 = 0.0;
    }
    u0[n - 1] = cur0;
    u1[n - 1] = 0.0;
    u2[n - 1] = 0.0;
  }
  const double floor = std::numeric_limits<double>::epsilon() * scale;
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(u0[i]) < floor) u0[i] = u0[i] < 0 ? -floor : floor;

  auto solve = [&](std::vector<double>& x) {
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (swapped[i]) std::swap(x[i], x[i + 1]);
      x[i + 1] -= mult[i] * x[i];
    }
    for (std::size_t ii = n; ii-- > 0;) {
      double s = x[ii];
      if (ii + 1 < n) s -= u1[ii] * x[ii + 1];
      if (ii + 2 < n) s -= u2[ii] * x[ii + 2];
      x[ii] = s / u0[ii];
    }
  };
  auto normalize = [](std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    s = std::sqrt(s);
    if (!(s > 0.0) || !std::isfinite(s)) throw NumericalError("inverse iteration produced a null vector");
    for (double& v : x) v /= s;
  };
  auto orthogonalize = [&](std::vector<double>& x) {
    for (const auto& p : previous) {
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += p[i] * x[i];
      for (std::size_t i = 0; i < n; ++i) x[i] -= dot * p[i];
    }
  };

  // Deterministic, non-degenerate starting vector.
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 + 0.5 * std::sin(0.37 * static_cast<double>(i) + 0.1);
  orthogonalize(x);
  normalize(x);
  for (int it = 0; it < iterations; ++it) {
    solve(x);
    orthogonalize(x);
    normalize(x);
  }
  return x;
}

} // namespace sphere_pinch

#endif // SPHERE_PINCH_TRIDIAGONAL_HPP
