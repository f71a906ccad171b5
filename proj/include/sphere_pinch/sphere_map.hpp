#ifndef SPHERE_PINCH_SPHERE_MAP_HPP
#define SPHERE_PINCH_SPHERE_MAP_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "quadrature.hpp"
#include "spectrum.hpp"
#include "warped_metric.hpp"

namespace sphere_pinch {

/// Angular factor C(theta) Y(v) of an eigenfunction phi(r) C(theta) Y(v).
/// C is 1 for m = 0 and cos(m theta) or sin(m theta) otherwise. Y is 1 for
/// l = 0, the coordinate v_j for l = 1, and Re or Im of (v_0 + i v_1)^l for
/// l >= 2 (sphere_index 0 or 1).
struct AngularFactor {
  int m = 0;
  int l = 0;
  bool circle_sine = false;
  int sphere_index = 0;

  [[nodiscard]] double circle(double theta) const {
    if (m == 0) return 1.0;
    return circle_sine ? std::sin(m * theta) : std::cos(m * theta);
  }

  [[nodiscard]] double sphere(const std::vector<double>& v) const {
    if (l == 0) return 1.0;
    if (l == 1) return v[static_cast<std::size_t>(sphere_index)];
    const std::complex<double> z = std::pow(std::complex<double>(v[0], v[1]), l);
    return sphere_index == 0 ? z.real() : z.imag();
  }

  /// Mean of C^2 over the circle.
  [[nodiscard]] double circle_mean_square() const { return m == 0 ? 1.0 : 0.5; }

  /// Mean of Y^2 over S^{n-2}. With X = v_0^2 + v_1^2, E[X^l] is the
  /// l-th moment of a Beta(1, (n-3)/2) variable.
  [[nodiscard]] double sphere_mean_square(int n) const {
    if (l == 0) return 1.0;
    const double half_dim = 0.5 * (n - 1);
    double moment = 1.0;
    for (int i = 0; i < l; ++i) moment *= (1.0 + i) / (half_dim + i);
    return moment / 2.0;
  }
};

/// One coordinate function f = s phi(r) C(theta) Y(v) of the map. When
/// `fine` is set the profile is the Richardson combination of the two
/// resolutions.
struct MapComponent {
  Eigenpair pair;
  std::optional<Eigenpair> fine;
  AngularFactor angular;
  double scale = 1.0;

  [[nodiscard]] double lambda() const {
    return fine ? (4.0 * fine->lambda - pair.lambda) / 3.0 : pair.lambda;
  }
  [[nodiscard]] double profile(double r) const {
    if (fine) return (4.0 * fine->profile_at(r) - pair.profile_at(r)) / 3.0;
    return pair.profile_at(r);
  }
  [[nodiscard]] double operator()(const ManifoldPoint& x) const {
    return scale * profile(x.r) * angular.circle(x.theta) * angular.sphere(x.v);
  }
};

/// Angular factors spanning the eigenspace of mode (m, l), in a fixed order.
/// Only the two factors Re/Im (v_0 + i v_1)^l are available for l >= 2,
/// which spans the whole space when n = 3.
inline std::vector<AngularFactor> angular_basis(int n, RadialMode mode, bool allow_partial) {
  std::vector<AngularFactor> out;
  int sphere_count = 1;
  if (mode.l == 1) sphere_count = n - 1;
  else if (mode.l >= 2) {
    sphere_count = 2;
    if (harmonic_dimension(n - 2, mode.l) > 2 && !allow_partial) {
      std::ostringstream os;
      os << "angular factors for mode (" << mode.m << "," << mode.l << ") are not available for n=" << n;
      throw UnsupportedError(os.str());
    }
  }
  for (int s = 0; s < sphere_count; ++s)
    for (int c = 0; c < (mode.m == 0 ? 1 : 2); ++c)
      out.push_back(AngularFactor{mode.m, mode.l, c == 1, s});
  return out;
}

/// Sets `scale` so that (n + 1) times the mean of f^2 over M equals 1.
inline void normalize_component(MapComponent& c, int n, double vol) {
  const double mean_sq = c.angular.circle_mean_square() * c.angular.sphere_mean_square(n) / vol;
  c.scale = std::sqrt(1.0 / ((n + 1) * mean_sq));
}

/// The n + 1 lowest nonzero eigenfunctions, counted with multiplicity and
/// ordered by (eigenvalue, mode, radial index, angular factor).
inline std::vector<MapComponent> lowest_map_components(const WarpedSphereMetric& metric, int N,
                                                       bool richardson = true) {
  const int n = metric.n;
  double lambda_max = 4.0 * n;
  SpectrumResult spec;
  for (;;) {
    spec = merged_spectrum(metric, SpectrumOptions{lambda_max, N, richardson});
    std::int64_t nonzero = 0;
    for (const auto& e : spec.entries)
      if (!(e.mode == RadialMode{0, 0} && e.index == 0)) nonzero += e.multiplicity;
    if (nonzero >= n + 1) break;
    lambda_max *= 2.0;
    if (lambda_max > 1e4) throw NumericalError("fewer than n+1 nonzero eigenvalues below 1e4");
  }
  const double vol = volume(metric, 4000);
  std::vector<MapComponent> out;
  for (const auto& e : spec.entries) {
    if (e.mode == RadialMode{0, 0} && e.index == 0) continue;
    const int needed = n + 1 - static_cast<int>(out.size());
    if (needed <= 0) break;
    const auto factors = angular_basis(n, e.mode, needed <= 2);
    const auto coarse = solve_radial(radial_problem(metric, e.mode, N), e.index + 1);
    std::optional<Eigenpair> fine;
    if (richardson) fine = solve_radial(radial_problem(metric, e.mode, 2 * N), e.index + 1)[static_cast<std::size_t>(e.index)];
    for (const auto& f : factors) {
      if (static_cast<int>(out.size()) == n + 1) break;
      MapComponent c{coarse[static_cast<std::size_t>(e.index)], fine, f, 1.0};
      normalize_component(c, n, vol);
      out.push_back(std::move(c));
    }
  }
  return out;
}

struct SphereMapSample {
  std::vector<ManifoldPoint> points;
  std::vector<std::vector<double>> f_values;  ///< per point, n + 1 values
  std::vector<std::vector<double>> phi;       ///< per point, unit vector
  std::vector<double> h;                      ///< per point, sum of f_i^2

  [[nodiscard]] std::size_t size() const { return points.size(); }
};

inline constexpr double kMinimumH = 1e-8;

/// Phi from raw coordinate values at the sample points.
inline SphereMapSample build_phi_from_values(std::vector<ManifoldPoint> points,
                                             std::vector<std::vector<double>> f_values) {
  if (points.size() != f_values.size()) throw DomainError("one value tuple per sample point required");
  SphereMapSample s;
  s.points = std::move(points);
  s.f_values = std::move(f_values);
  s.phi.resize(s.size());
  s.h.resize(s.size());
  for (std::size_t p = 0; p < s.size(); ++p) {
    const auto& f = s.f_values[p];
    double h = 0.0;
    for (double v : f) h += v * v;
    if (!(h > kMinimumH)) {
      std::ostringstream os;
      os << "map undefined at sample point " << p << " (r=" << s.points[p].r << ", h=" << h << ")";
      throw NumericalError(os.str());
    }
    s.h[p] = h;
    const double norm = std::sqrt(h);
    s.phi[p].resize(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) s.phi[p][i] = f[i] / norm;
  }
  return s;
}

inline SphereMapSample build_phi(const WarpedSphereMetric& metric,
                                 const std::vector<MapComponent>& components,
                                 std::vector<ManifoldPoint> points) {
  if (static_cast<int>(components.size()) != metric.n + 1)
    throw DomainError("build_phi needs exactly n+1 components");
  for (const auto& c : components) {
    double peak = 0.0;
    for (double v : c.pair.phi) peak = std::max(peak, std::abs(v));
    if (!(peak > 0.0) || c.scale == 0.0) throw DomainError("map component vanishes identically");
  }
  std::vector<std::vector<double>> values(points.size());
  for (std::size_t p = 0; p < points.size(); ++p) {
    values[p].reserve(components.size());
    for (const auto& c : components) values[p].push_back(c(points[p]));
  }
  return build_phi_from_values(std::move(points), std::move(values));
}

/// Applies an orthogonal matrix (row-major, (n+1) x (n+1)) to the value tuples.
inline SphereMapSample rotate_map(const SphereMapSample& s, const std::vector<double>& A) {
  std::vector<std::vector<double>> values(s.size());
  for (std::size_t p = 0; p < s.size(); ++p) {
    const auto& f = s.f_values[p];
    const std::size_t d = f.size();
    if (A.size() != d * d) throw DomainError("rotation matrix has the wrong size");
    values[p].assign(d, 0.0);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) values[p][i] += A[i * d + j] * f[j];
  }
  return build_phi_from_values(s.points, std::move(values));
}

inline double h_deviation(const SphereMapSample& s) {
  double out = 0.0;
  for (double h : s.h) out = std::max(out, std::abs(h - 1.0));
  return out;
}

inline double sphere_distance(const std::vector<double>& x, const std::vector<double>& y) {
  double dot = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
  return std::acos(std::clamp(dot, -1.0, 1.0));
}

inline void check_same_sample(const SphereMapSample& s, const SampledMetricSpace& d) {
  if (s.size() != d.size()) throw DomainError("map sample and distance matrix differ in size");
}

/// max over pairs of |d_sphere(Phi x, Phi y) - d_M(x, y)|.
inline double map_distortion(const SphereMapSample& s, const SampledMetricSpace& d) {
  check_same_sample(s, d);
  double out = 0.0;
  for (std::size_t p = 0; p < s.size(); ++p)
    for (std::size_t q = p + 1; q < s.size(); ++q)
      out = std::max(out, std::abs(sphere_distance(s.phi[p], s.phi[q]) - d(p, q)));
  return out;
}

inline constexpr double kLipschitzMinDistance = 0.05;

/// max over pairs with d_M >= 0.05 of d_sphere(Phi x, Phi y) / d_M(x, y);
/// 0 when no pair qualifies.
inline double empirical_lipschitz(const SphereMapSample& s, const SampledMetricSpace& d) {
  check_same_sample(s, d);
  double out = 0.0;
  for (std::size_t p = 0; p < s.size(); ++p)
    for (std::size_t q = p + 1; q < s.size(); ++q) {
      const double dm = d(p, q);
      if (dm < kLipschitzMinDistance) continue;
      out = std::max(out, sphere_distance(s.phi[p], s.phi[q]) / dm);
    }
  return out;
}

// --- pointwise lower bound from mean, sup and Lipschitz data ----------------

struct Lemma14Report {
  bool passed = false;
  double bound = 0.0;       ///< sup - 2 (diam lip)^{n/(n+1)} (sup - mean)^{1/(n+1)}
  double min_value = 0.0;   ///< smallest |h| over the sample
  std::size_t violations = 0;
};

inline Lemma14Report lemma14_check(const std::vector<double>& values, double mean, double sup,
                                   double diam, double lip, int n) {
  Lemma14Report rep;
  const double e = 1.0 / (n + 1);
  rep.bound = sup - 2.0 * std::pow(diam * lip, n * e) * std::pow(std::max(sup - mean, 0.0), e);
  rep.min_value = std::numeric_limits<double>::infinity();
  for (double v : values) {
    rep.min_value = std::min(rep.min_value, std::abs(v));
    if (std::abs(v) < rep.bound - 1e-12) ++rep.violations;
  }
  rep.passed = rep.violations == 0;
  return rep;
}

struct Lemma14Inputs {
  std::vector<double> values;  ///< |h| at the sample points
  double mean = 0.0;           ///< mean of |h| over M by quadrature
  double sup = 0.0;            ///< max of |h| over sample and quadrature nodes
  double diam = 0.0;           ///< sampled diameter
  double lip = 0.0;            ///< max difference quotient over pairs with d >= 0.05
};

/// Mean of |h| over M by tensor Gauss quadrature in (r, theta, psi). The
/// sphere direction runs along a great circle (psi in [0, 2 pi) for n = 3,
/// psi in [0, pi] with weight sin^{n-3} psi otherwise), which is exact for
/// n = 3 and for functions depending on v only through its first coordinate.
inline Lemma14Inputs lemma14_inputs(const WarpedSphereMetric& m,
                                    const std::function<double(const ManifoldPoint&)>& h,
                                    const SampledMetricSpace& space, int panels = 24) {
  Lemma14Inputs in;
  for (const auto& x : space.points) in.values.push_back(std::abs(h(x)));
  in.sup = 0.0;
  for (double v : in.values) in.sup = std::max(in.sup, v);
  const auto& rule = quadrature::gauss5();
  const double R = m.R();
  const double psi_span = m.n == 3 ? 2.0 * std::numbers::pi : std::numbers::pi;
  double num = 0.0, den = 0.0;
  auto nodes = [&](double lo, double hi, auto&& body) {
    const double w = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p)
      for (std::size_t q = 0; q < 5; ++q)
        body(lo + w * (p + 0.5 * (1.0 + rule.nodes[q])), 0.5 * w * rule.weights[q]);
  };
  nodes(0.0, R, [&](double r, double wr) {
    const double wgt = m.weight(r);
    nodes(0.0, 2.0 * std::numbers::pi, [&](double theta, double wt) {
      nodes(0.0, psi_span, [&](double psi, double wp) {
        const double ws = m.n == 3 ? 1.0 : std::pow(std::sin(psi), m.n - 3);
        const double w = wr * wt * wp * wgt * ws;
        const double v = std::abs(h(ManifoldPoint{r, theta, great_circle_direction(m.n, psi)}));
        num += w * v;
        den += w;
        in.sup = std::max(in.sup, v);
      });
    });
  });
  in.mean = num / den;
  in.diam = diameter_radius(space).diameter;
  for (std::size_t p = 0; p < space.size(); ++p)
    for (std::size_t q = p + 1; q < space.size(); ++q) {
      const double d = space(p, q);
      if (d < kLipschitzMinDistance) continue;
      in.lip = std::max(in.lip, std::abs(in.values[p] - in.values[q]) / d);
    }
  return in;
}

// --- degree by signed preimage counting ----------------------------------

/// Values of a map into S^n on the closed grid r_i = i R / nr,
/// theta_j = 2 pi j / ntheta, psi_k = 2 pi k / npsi (n = 3 only; theta and
/// psi are periodic).
struct DegreeGrid {
  int nr = 0, ntheta = 0, npsi = 0;
  std::vector<std::vector<double>> values;  ///< unit vectors, index (i, j, k)

  [[nodiscard]] std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * ntheta + j) * npsi + k;
  }
  [[nodiscard]] std::vector<ManifoldPoint> points(const WarpedSphereMetric& m) const {
    std::vector<ManifoldPoint> out;
    out.reserve(static_cast<std::size_t>(nr + 1) * ntheta * npsi);
    for (int i = 0; i <= nr; ++i)
      for (int j = 0; j < ntheta; ++j)
        for (int k = 0; k < npsi; ++k)
          out.push_back(ManifoldPoint{i == nr ? m.R() : m.R() * i / nr,
                                      2.0 * std::numbers::pi * j / ntheta,
                                      great_circle_direction(m.n, 2.0 * std::numbers::pi * k / npsi)});
    return out;
  }
};

inline DegreeGrid degree_grid(const WarpedSphereMetric& m, const std::vector<MapComponent>& comps,
                              int nr = 24, int ntheta = 48, int npsi = 48) {
  if (m.n != 3) throw UnsupportedError("degree estimate is implemented for n=3 only");
  DegreeGrid g{nr, ntheta, npsi, {}};
  const auto sample = build_phi(m, comps, g.points(m));
  g.values = sample.phi;
  return g;
}

struct DegreeReport {
  int degree = 0;
  std::vector<int> counts;     ///< signed preimage count per kept target
  int discarded = 0;
  int agreeing = 0;            ///< kept targets whose count equals the majority
  bool disagreement = false;
};

inline constexpr double kDegreeDetFloor = 1e-4;

/// Signed preimage counts of 16 fixed-seed targets on S^3 under the
/// piecewise-linear map on the Kuhn triangulation of the grid. For target y
/// the images are projected stereographically from -y, so y sits at the
/// origin, and only simplices with every vertex in the hemisphere around y
/// are tested.
inline DegreeReport degree_estimate(const DegreeGrid& g, std::uint64_t seed = 12345,
                                    int targets = 16) {
  constexpr int dim = 4;
  for (const auto& v : g.values)
    if (v.size() != dim) throw UnsupportedError("degree estimate needs maps into S^3");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  static constexpr std::array<std::array<int, 3>, 6> perms{
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  auto det3 = [](const std::array<double, 3>& a, const std::array<double, 3>& b,
                 const std::array<double, 3>& c) {
    return a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) +
           a[2] * (b[0] * c[1] - b[1] * c[0]);
  };
  DegreeReport rep;
  for (int t = 0; t < targets; ++t) {
    std::array<double, dim> y{};
    double norm = 0.0;
    for (auto& c : y) {
      c = gauss(rng);
      norm += c * c;
    }
    norm = std::sqrt(norm);
    for (auto& c : y) c /= norm;
    // Orthonormal basis of the tangent space at y by Gram-Schmidt.
    std::array<std::array<double, dim>, 3> basis{};
    int got = 0;
    for (int e = 0; e < dim && got < 3; ++e) {
      std::array<double, dim> v{};
      v[static_cast<std::size_t>(e)] = 1.0;
      auto project = [&](const std::array<double, dim>& u) {
        double d = 0.0;
        for (int c = 0; c < dim; ++c) d += u[c] * v[c];
        for (int c = 0; c < dim; ++c) v[c] -= d * u[c];
      };
      project(y);
      for (int b = 0; b < got; ++b) project(basis[static_cast<std::size_t>(b)]);
      double nv = 0.0;
      for (double c : v) nv += c * c;
      nv = std::sqrt(nv);
      if (nv < 0.5) continue;
      for (double& c : v) c /= nv;
      basis[static_cast<std::size_t>(got++)] = v;
    }
    // Orient (y, b0, b1, b2) positively so every target uses the same convention.
    {
      std::array<std::array<double, dim>, dim> mat{y, basis[0], basis[1], basis[2]};
      double det = 1.0;
      for (int c = 0; c < dim; ++c) {
        int piv = c;
        for (int r = c + 1; r < dim; ++r)
          if (std::abs(mat[r][c]) > std::abs(mat[piv][c])) piv = r;
        if (piv != c) {
          std::swap(mat[piv], mat[c]);
          det = -det;
        }
        det *= mat[c][c];
        for (int r = c + 1; r < dim; ++r) {
          const double f = mat[r][c] / mat[c][c];
          for (int q = c; q < dim; ++q) mat[r][q] -= f * mat[c][q];
        }
      }
      if (det < 0)
        for (double& c : basis[2]) c = -c;
    }
    // Stereographic coordinates of every node, or nothing outside the hemisphere.
    std::vector<std::array<double, 3>> proj(g.values.size());
    std::vector<char> near(g.values.size(), 0);
    for (std::size_t p = 0; p < g.values.size(); ++p) {
      const auto& z = g.values[p];
      double zy = 0.0;
      for (int c = 0; c < dim; ++c) zy += z[c] * y[c];
      if (zy <= 0.0) continue;
      near[p] = 1;
      for (int b = 0; b < 3; ++b) {
        double s = 0.0;
        for (int c = 0; c < dim; ++c) s += z[c] * basis[b][c];
        proj[p][b] = s / (1.0 + zy);
      }
    }
    int count = 0;
    bool discard = false;
    for (int i = 0; i < g.nr && !discard; ++i)
      for (int j = 0; j < g.ntheta && !discard; ++j)
        for (int k = 0; k < g.npsi && !discard; ++k) {
          for (std::size_t pi = 0; pi < perms.size(); ++pi) {
            std::array<int, 3> cur{i, j, k};
            std::array<std::size_t, 4> vert{};
            auto node = [&](const std::array<int, 3>& c) {
              return g.index(c[0], c[1] % g.ntheta, c[2] % g.npsi);
            };
            vert[0] = node(cur);
            for (int s = 0; s < 3; ++s) {
              ++cur[static_cast<std::size_t>(perms[pi][s])];
              vert[static_cast<std::size_t>(s + 1)] = node(cur);
            }
            if (!near[vert[0]] || !near[vert[1]] || !near[vert[2]] || !near[vert[3]]) continue;
            const auto& p0 = proj[vert[0]];
            std::array<std::array<double, 3>, 3> e{};
            for (int s = 0; s < 3; ++s)
              for (int c = 0; c < 3; ++c) e[s][c] = proj[vert[s + 1]][c] - p0[c];
            const double det = det3(e[0], e[1], e[2]);
            if (det == 0.0) continue;
            // Barycentric coordinates of the origin by Cramer's rule.
            const std::array<double, 3> rhs{-p0[0], -p0[1], -p0[2]};
            const double l1 = det3(rhs, e[1], e[2]) / det;
            const double l2 = det3(e[0], rhs, e[2]) / det;
            const double l3 = det3(e[0], e[1], rhs) / det;
            if (l1 < 0 || l2 < 0 || l3 < 0 || l1 + l2 + l3 > 1) continue;
            double scale = 1.0;
            for (const auto& row : e) scale *= std::sqrt(row[0] * row[0] + row[1] * row[1] + row[2] * row[2]);
            if (std::abs(det) / scale < kDegreeDetFloor) {
              discard = true;
              break;
            }
            // Kuhn simplices of odd permutations have reversed orientation.
            const int parity = (pi == 1 || pi == 2 || pi == 5) ? -1 : 1;
            count += (det > 0 ? 1 : -1) * parity;
          }
        }
    if (discard) {
      ++rep.discarded;
      continue;
    }
    rep.counts.push_back(count);
  }
  if (rep.counts.empty()) throw NumericalError("degree indeterminate: all targets discarded");
  // Majority vote; ties go to the smaller absolute value, then the smaller value.
  std::vector<int> sorted = rep.counts;
  std::sort(sorted.begin(), sorted.end(), [](int a, int b) {
    return std::abs(a) != std::abs(b) ? std::abs(a) < std::abs(b) : a < b;
  });
  int best = sorted.front(), best_votes = 0;
  for (int c : sorted) {
    const int votes = static_cast<int>(std::count(rep.counts.begin(), rep.counts.end(), c));
    if (votes > best_votes) {
      best = c;
      best_votes = votes;
    }
  }
  rep.degree = best;
  rep.agreeing = best_votes;
  rep.disagreement = best_votes != static_cast<int>(rep.counts.size());
  return rep;
}

/// Same grid with every value negated (composition with the antipodal map).
inline DegreeGrid antipodal(DegreeGrid g) {
  for (auto& v : g.values)
    for (double& c : v) c = -c;
  return g;
}

} // namespace sphere_pinch

#endif // SPHERE_PINCH_SPHERE_MAP_HPP
