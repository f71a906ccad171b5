#ifndef SPHERE_PINCH_CURVATURE_HPP
#define SPHERE_PINCH_CURVATURE_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "errors.hpp"
#include "warped_metric.hpp"

namespace sphere_pinch {

/// Ricci curvature of a doubly warped metric in the adapted orthonormal
/// frame. The mixed components Ric(dr,u), Ric(dr,v), Ric(u,v) vanish
/// identically and are not stored.
struct RicciFrame {
  double ric_r = 0.0;  ///< Ric(d/dr, d/dr)
  double ric_u = 0.0;  ///< Ric(u,u)/g(u,u), u tangent to S^1
  double ric_v = 0.0;  ///< Ric(v,v)/g(v,v), v tangent to S^{n-2}
  double r = 0.0;
};

enum class RicciDirection { Radial, Circle, Sphere };

inline char direction_code(RicciDirection d) {
  switch (d) {
    case RicciDirection::Radial: return 'r';
    case RicciDirection::Circle: return 'u';
    case RicciDirection::Sphere: return 'v';
  }
  return '?';
}

/// Distance from an interior breakpoint below which `ricci_frame` refuses to
/// evaluate (a'' and b'' jump there).
inline constexpr double kSeamExclusion = 1e-13;

/// Offset used to take one-sided limits at a breakpoint.
inline constexpr double kOneSidedOffset = 1e-9;

inline RicciFrame ricci_frame(const WarpedSphereMetric& m, double r) {
  const long double rl = r;
  if (!(r > 0.0) || !(rl < m.R_ld())) {
    std::ostringstream os;
    os << "ricci_frame needs 0 < r < R, got r=" << r;
    throw DomainError(os.str());
  }
  if (m.a.near_interior_breakpoint(r, kSeamExclusion) ||
      m.b.near_interior_breakpoint(r, kSeamExclusion)) {
    std::ostringstream os;
    os << "one-sided evaluation required at breakpoint r=" << r;
    throw DomainError(os.str());
  }
  const long double a = m.a.eval_ld(rl, 0), a1 = m.a.eval_ld(rl, 1), a2 = m.a.eval_ld(rl, 2);
  const long double b = m.b.eval_ld(rl, 0), b1 = m.b.eval_ld(rl, 1), b2 = m.b.eval_ld(rl, 2);
  const long double nm2 = m.n - 2;
  const long double nm3 = m.n - 3;
  RicciFrame f;
  f.r = r;
  f.ric_r = static_cast<double>(-a2 / a - nm2 * b2 / b);
  f.ric_u = static_cast<double>(-a2 / a - nm2 * (a1 / a) * (b1 / b));
  long double ric_v = -b2 / b - (a1 / a) * (b1 / b);
  if (m.n > 3) ric_v += nm3 * m.b.one_minus_d1_squared(rl) / (b * b);
  f.ric_v = static_cast<double>(ric_v);
  return f;
}

/// Smallest Ricci value over radial directions, circle and sphere factor.
struct RicciMin {
  double value = std::numeric_limits<double>::infinity();
  double r = 0.0;
  RicciDirection direction = RicciDirection::Radial;
};

inline constexpr double kEndpointMargin = 1e-6;

/// Scan radii on [1e-6, R - 1e-6], clustered geometrically towards 0, R
/// and both sides of every seam. Seams are approached to within 1e-9.
inline std::vector<double> ricci_scan_grid(const WarpedSphereMetric& m, int grid_points) {
  if (grid_points < 64) throw DomainError("ricci scan needs grid_points >= 64");
  std::vector<double> cuts{0.0};
  for (double s : m.seams()) cuts.push_back(s);
  cuts.push_back(m.R());
  const std::size_t pieces = cuts.size() - 1;
  const int per_end = std::max(8, grid_points / static_cast<int>(2 * pieces));
  std::vector<double> out;
  out.reserve(2 * pieces * per_end);
  for (std::size_t p = 0; p < pieces; ++p) {
    const double lo = cuts[p], hi = cuts[p + 1];
    const double half = 0.5 * (hi - lo);
    const double d_lo = p == 0 ? kEndpointMargin : kOneSidedOffset;
    const double d_hi = p + 1 == pieces ? kEndpointMargin : kOneSidedOffset;
    for (int j = 0; j < per_end; ++j) {
      const double t = static_cast<double>(j) / (per_end - 1);
      out.push_back(lo + d_lo * std::pow(half / d_lo, t));
    }
    for (int j = per_end - 2; j >= 0; --j) {
      const double t = static_cast<double>(j) / (per_end - 1);
      out.push_back(hi - d_hi * std::pow(half / d_hi, t));
    }
  }
  return out;
}

inline RicciMin ricci_min(const WarpedSphereMetric& m, int grid_points) {
  RicciMin best;
  for (double r : ricci_scan_grid(m, grid_points)) {
    const RicciFrame f = ricci_frame(m, r);
    const std::pair<double, RicciDirection> vals[] = {
        {f.ric_r, RicciDirection::Radial},
        {f.ric_u, RicciDirection::Circle},
        {f.ric_v, RicciDirection::Sphere}};
    for (const auto& [v, d] : vals) {
      if (v < best.value) best = RicciMin{v, r, d};
    }
  }
  return best;
}

struct LowerBoundReport {
  bool passed = false;
  double bound = 0.0;
  RicciMin worst;
};

inline LowerBoundReport check_lower_bound(const WarpedSphereMetric& m, double bound,
                                          int grid_points) {
  LowerBoundReport rep;
  rep.bound = bound;
  rep.worst = ricci_min(m, grid_points);
  rep.passed = rep.worst.value >= bound - 1e-9;
  return rep;
}

} // namespace sphere_pinch

#endif // SPHERE_PINCH_CURVATURE_HPP
