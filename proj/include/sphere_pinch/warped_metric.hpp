#ifndef SPHERE_PINCH_WARPED_METRIC_HPP
#define SPHERE_PINCH_WARPED_METRIC_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "harmonics.hpp"
#include "piecewise.hpp"
#include "quadrature.hpp"

namespace sphere_pinch {

/// Constants of the pinch family g_k, in extended precision.
struct PinchConstants {
  long long k = 0;
  long double eta = 0.0L;
  long double eps = 0.0L;
  long double theta = 0.0L;
  long double R = 0.0L;

  /// arctan(1 / (k tan(1/sqrt k))), which eps + theta must reproduce.
  [[nodiscard]] long double blend_angle() const {
    const long double kk = static_cast<long double>(k);
    return std::atan(1.0L / (kk * std::tan(1.0L / std::sqrt(kk))));
  }

  [[nodiscard]] long double eta_squared_reference() const {
    const long double kk = static_cast<long double>(k);
    const long double s = 1.0L / std::sqrt(kk);
    const long double c = std::cos(s);
    return std::sin(s) * std::sin(s) + c * c / (kk * kk);
  }
};

inline PinchConstants pinch_constants(long long k) {
  if (k < 2) throw DomainError("pinch family needs k >= 2");
  constexpr long double half_pi = std::numbers::pi_v<long double> / 2.0L;
  const long double kk = static_cast<long double>(k);
  const long double s = 1.0L / std::sqrt(kk);
  PinchConstants c;
  c.k = k;
  c.eta = std::sqrt(std::sin(s) * std::sin(s) + std::cos(s) * std::cos(s) / (kk * kk));
  c.eps = (half_pi - s) / kk;
  c.theta = std::atan(1.0L / (kk * std::tan(s))) - half_pi / kk + s / kk;
  c.R = half_pi - c.theta;
  return c;
}

/// g = dr^2 + a(r)^2 g_{S^1} + b(r)^2 g_{S^{n-2}} on [0, R]. The circle
/// collapses at r = 0 and the S^{n-2} factor at r = R.
struct WarpedSphereMetric {
  int n = 3;
  PiecewiseSmoothFunction a;
  PiecewiseSmoothFunction b;
  std::string label;
  std::optional<PinchConstants> pinch;

  [[nodiscard]] long double R_ld() const { return a.length(); }
  [[nodiscard]] double R() const { return static_cast<double>(a.length()); }

  /// Interior breakpoints of either warping function.
  [[nodiscard]] std::vector<double> seams() const {
    std::vector<double> out;
    for (const auto* f : {&a, &b}) {
      const auto& bp = f->breakpoints();
      for (std::size_t i = 1; i + 1 < bp.size(); ++i) {
        const double r = static_cast<double>(bp[i]);
        bool seen = false;
        for (double s : out) seen = seen || s == r;
        if (!seen) out.push_back(r);
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Volume density along r divided by the angular volumes: a b^{n-2}.
  [[nodiscard]] double weight(double r) const {
    return a(r) * std::pow(b(r), n - 2);
  }
};

inline void check_dimension(int n) {
  if (n < 3) throw UnsupportedError("unsupported dimension n=" + std::to_string(n) + " (need n >= 3)");
}

/// Round unit n-sphere as a join of S^1 and S^{n-2}: a = sin r, b = cos r on [0, pi/2].
inline WarpedSphereMetric make_round_sphere(int n) {
  check_dimension(n);
  constexpr long double half_pi = std::numbers::pi_v<long double> / 2.0L;
  WarpedSphereMetric m;
  m.n = n;
  m.a = PiecewiseSmoothFunction({0.0L, half_pi}, {Segment{SegmentKind::ScaledSine, 1.0L, 1.0L, 0.0L}});
  m.b = PiecewiseSmoothFunction({0.0L, half_pi},
                                {Segment{SegmentKind::ScaledCosineShifted, 1.0L, 1.0L, 0.0L}});
  m.label = "round n=" + std::to_string(n);
  return m;
}

inline WarpedSphereMetric make_pinch_family(int n, long long k) {
  check_dimension(n);
  const PinchConstants c = pinch_constants(k);
  const long double kk = static_cast<long double>(k);
  const long double blend = c.eps + c.theta;
  WarpedSphereMetric m;
  m.n = n;
  m.a = PiecewiseSmoothFunction(
      {0.0L, c.eps, c.R},
      {Segment{SegmentKind::ScaledSine, 1.0L / kk, kk, 0.0L},
       Segment{SegmentKind::ScaledSine, c.eta, 1.0L, c.theta}});
  m.b = PiecewiseSmoothFunction(
      {0.0L, c.eps, c.R},
      {Segment{SegmentKind::AffineCosineBlend, c.eps / blend, blend / c.eps,
               c.theta / blend * std::cos(blend)},
       Segment{SegmentKind::ScaledCosineShifted, 1.0L, 1.0L, c.theta}});
  m.label = "pinch n=" + std::to_string(n) + " k=" + std::to_string(k);
  m.pinch = c;
  return m;
}

/// Residuals of eps + theta = arctan(1 / (k tan(1/sqrt k))) and of the
/// closed form of eta^2, plus the C1 mismatch of a and b at eps.
struct ConstantIdentities {
  double blend_residual = 0.0;
  double eta_residual = 0.0;
  double c1_residual = 0.0;
};

inline ConstantIdentities constant_identities(long long k) {
  const PinchConstants c = pinch_constants(k);
  const WarpedSphereMetric m = make_pinch_family(3, k);
  ConstantIdentities out;
  out.blend_residual = static_cast<double>(std::abs(c.eps + c.theta - c.blend_angle()));
  out.eta_residual = static_cast<double>(std::abs(c.eta * c.eta - c.eta_squared_reference()));
  out.c1_residual = static_cast<double>(std::max(m.a.max_c1_jump(), m.b.max_c1_jump()));
  return out;
}

struct ClosureCondition {
  std::string name;
  double expected = 0.0;
  double actual = 0.0;
  double residual = 0.0;
  bool passed = false;
};

struct ClosureReport {
  std::array<ClosureCondition, 8> conditions;
  bool passed = false;
  double max_c1_jump = 0.0;
};

/// Endpoint conditions that close the warped product into a C1 sphere.
/// The positivity conditions b(0) > 0 and a(R) > 0 report the value itself
/// as `actual` and a zero residual when satisfied.
inline ClosureReport validate_closure(const WarpedSphereMetric& m, double tol = 1e-10) {
  const long double R = m.R_ld();
  ClosureReport rep;
  auto exact = [&](const char* name, double expected, long double actual) {
    const double act = static_cast<double>(actual);
    const double res = std::abs(act - expected);
    return ClosureCondition{name, expected, act, res, res < tol};
  };
  auto positive = [&](const char* name, long double actual) {
    const double act = static_cast<double>(actual);
    const double res = act > 0.0 ? 0.0 : std::abs(act) + tol;
    return ClosureCondition{name, 0.0, act, res, act > 0.0};
  };
  rep.conditions = {
      exact("a(0)=0", 0.0, m.a.eval_ld(0.0L, 0)),
      exact("a'(0)=1", 1.0, m.a.eval_ld(0.0L, 1)),
      positive("b(0)>0", m.b.eval_ld(0.0L, 0)),
      exact("b'(0)=0", 0.0, m.b.eval_ld(0.0L, 1)),
      exact("b(R)=0", 0.0, m.b.eval_ld(R, 0)),
      exact("b'(R)=-1", -1.0, m.b.eval_ld(R, 1)),
      positive("a(R)>0", m.a.eval_ld(R, 0)),
      exact("a'(R)=0", 0.0, m.a.eval_ld(R, 1)),
  };
  rep.passed = true;
  for (const auto& c : rep.conditions) rep.passed = rep.passed && c.passed;
  rep.max_c1_jump = static_cast<double>(std::max(m.a.max_c1_jump(), m.b.max_c1_jump()));
  return rep;
}

/// Riemannian volume 2 pi Vol(S^{n-2}) int_0^R a b^{n-2} dr. Every segment
/// of a and b is integrated separately with composite 5-point Gauss-Legendre.
inline double volume(const WarpedSphereMetric& m, int quad_points) {
  if (quad_points < 16) throw DomainError("volume needs quad_points >= 16");
  std::vector<double> cuts{0.0};
  for (double s : m.seams()) cuts.push_back(s);
  cuts.push_back(m.R());
  const std::size_t pieces = cuts.size() - 1;
  const std::size_t panels =
      std::max<std::size_t>(1, static_cast<std::size_t>(quad_points) / (5 * pieces));
  double integral = 0.0;
  for (std::size_t i = 0; i < pieces; ++i) {
    // Evaluate strictly inside the piece so the active segment is the right one.
    integral += quadrature::integrate([&](double r) { return m.weight(r); }, cuts[i], cuts[i + 1],
                                      panels);
  }
  return 2.0 * std::numbers::pi * sphere_volume(m.n - 2) * integral;
}

// --- plain-text profile format -------------------------------------------

namespace detail {
inline std::string fmt17(long double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", static_cast<double>(v));
  return buf;
}
} // namespace detail

/// Writes `warped n=<n> R=<R>` followed by one line per segment of a, then b.
inline void write_profile(std::ostream& os, const WarpedSphereMetric& m) {
  os << "warped n=" << m.n << " R=" << detail::fmt17(m.R_ld()) << "\n";
  auto emit = [&](char name, const PiecewiseSmoothFunction& f) {
    const auto& bp = f.breakpoints();
    for (std::size_t i = 0; i < f.segments().size(); ++i) {
      const Segment& s = f.segments()[i];
      os << name << ' ' << detail::fmt17(bp[i]) << ' ' << detail::fmt17(bp[i + 1]) << ' '
         << segment_kind_id(s.kind) << ' ' << detail::fmt17(s.amplitude) << ' '
         << detail::fmt17(s.frequency) << ' ' << detail::fmt17(s.third) << "\n";
    }
  };
  emit('a', m.a);
  emit('b', m.b);
}

inline WarpedSphereMetric read_profile(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw FormatError("empty profile");
  WarpedSphereMetric m;
  double R = 0.0;
  if (std::sscanf(line.c_str(), "warped n=%d R=%lf", &m.n, &R) != 2)
    throw FormatError("bad profile header: '" + line + "'");
  check_dimension(m.n);
  std::vector<long double> bp_a{0.0L}, bp_b{0.0L};
  std::vector<Segment> seg_a, seg_b;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string which, id;
    double lo = 0, hi = 0, p1 = 0, p2 = 0, p3 = 0;
    if (!(ls >> which >> lo >> hi >> id >> p1 >> p2 >> p3) || (which != "a" && which != "b"))
      throw FormatError("bad profile line " + std::to_string(lineno) + ": '" + line + "'");
    auto& bp = which == "a" ? bp_a : bp_b;
    auto& seg = which == "a" ? seg_a : seg_b;
    if (static_cast<long double>(lo) != bp.back())
      throw FormatError("profile segments not contiguous at line " + std::to_string(lineno));
    bp.push_back(hi);
    seg.push_back(Segment{parse_segment_kind(id), p1, p2, p3});
  }
  if (seg_a.empty() || seg_b.empty()) throw FormatError("profile needs segments for a and b");
  if (static_cast<double>(bp_a.back()) != R || static_cast<double>(bp_b.back()) != R)
    throw FormatError("profile segments must end at R");
  m.a = PiecewiseSmoothFunction(std::move(bp_a), std::move(seg_a));
  m.b = PiecewiseSmoothFunction(std::move(bp_b), std::move(seg_b));
  m.label = "profile n=" + std::to_string(m.n);
  return m;
}

} // namespace sphere_pinch

#endif // SPHERE_PINCH_WARPED_METRIC_HPP
