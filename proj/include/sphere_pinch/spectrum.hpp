#ifndef SPHERE_PINCH_SPECTRUM_HPP
#define SPHERE_PINCH_SPECTRUM_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <vector>

#include "curvature.hpp"
#include "errors.hpp"
#include "harmonics.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "tridiagonal.hpp"
#include "warped_metric.hpp"

namespace sphere_pinch {

/// Angular mode: circle frequency m and S^{n-2} harmonic degree l.
struct RadialMode {
  int m = 0;
  int l = 0;

  friend bool operator==(const RadialMode&, const RadialMode&) = default;
  friend auto operator<=>(const RadialMode&, const RadialMode&) = default;
};

/// Eigenvalue of the S^{n-2} Laplacian on degree-l harmonics.
inline double sphere_harmonic_eigenvalue(int n, int l) {
  return static_cast<double>(l) * (l + n - 3);
}

/// Number of independent eigenfunctions of the full Laplacian carried by
/// one radial eigenvalue of this mode.
inline std::int64_t mode_multiplicity(int n, RadialMode mode) {
  check_dimension(n);
  if (mode.m < 0 || mode.l < 0) throw DomainError("mode indices must be nonnegative");
  return (mode.m == 0 ? 1 : 2) * harmonic_dimension(n - 2, mode.l);
}

/// Angular volume factor Vol(S^1) Vol(S^{n-2}).
inline double angular_volume(int n) { return 2.0 * std::numbers::pi * sphere_volume(n - 2); }

/// Finite-volume discretization of -(w phi')'/w + V phi = lambda phi on the
/// staggered grid r_i = (i + 1/2) h. Face weights vanish at r = 0 and r = R,
/// which imposes the natural (flux) boundary condition.
struct RadialProblem {
  int n = 3;
  RadialMode mode;
  int N = 0;
  double h = 0.0;
  std::vector<double> r;          ///< cell centers
  std::vector<double> weight;     ///< a b^{n-2} at centers
  std::vector<double> potential;  ///< m^2/a^2 + l(l+n-3)/b^2 at centers
  std::vector<double> face_weight;  ///< a b^{n-2} at faces r = i h, size N+1

  /// Weighted inner product sum w_i h f_i g_i.
  [[nodiscard]] double inner(std::span<const double> f, std::span<const double> g) const {
    double s = 0.0;
    for (int i = 0; i < N; ++i) s += weight[i] * h * f[i] * g[i];
    return s;
  }

  /// Discrete Dirichlet energy sum_faces w (dphi/dr)^2 h + sum_i V w h phi^2.
  [[nodiscard]] double energy(std::span<const double> phi) const {
    double e = 0.0;
    for (int i = 1; i < N; ++i) {
      const double d = (phi[i] - phi[i - 1]) / h;
      e += face_weight[i] * d * d * h;
    }
    for (int i = 0; i < N; ++i) e += potential[i] * weight[i] * h * phi[i] * phi[i];
    return e;
  }

  /// Symmetric form after the substitution phi~_i = sqrt(w_i h) phi_i.
  [[nodiscard]] SymTridiagonal symmetric_matrix() const {
    SymTridiagonal t;
    t.diag.resize(N);
    t.off.resize(N > 0 ? N - 1 : 0);
    for (int i = 0; i < N; ++i) {
      const double mass = weight[i] * h;
      t.diag[i] = ((face_weight[i] + face_weight[i + 1]) / h + potential[i] * mass) / mass;
    }
    for (int i = 0; i + 1 < N; ++i) {
      const double mass_i = weight[i] * h, mass_j = weight[i + 1] * h;
      t.off[i] = -face_weight[i + 1] / h / std::sqrt(mass_i * mass_j);
    }
    return t;
  }
};

inline RadialProblem radial_problem(const WarpedSphereMetric& metric, RadialMode mode, int N) {
  if (N < 64) throw DomainError("radial grid needs N >= 64");
  if (mode.m < 0 || mode.l < 0) throw DomainError("mode indices must be nonnegative");
  RadialProblem p;
  p.n = metric.n;
  p.mode = mode;
  p.N = N;
  const double R = metric.R();
  p.h = R / N;
  p.r.resize(N);
  p.weight.resize(N);
  p.potential.resize(N);
  p.face_weight.resize(N + 1);
  const double mu = sphere_harmonic_eigenvalue(metric.n, mode.l);
  const double m2 = static_cast<double>(mode.m) * mode.m;
  for (int i = 0; i < N; ++i) {
    const double ri = (i + 0.5) * p.h;
    const double a = metric.a(ri), b = metric.b(ri);
    p.r[i] = ri;
    p.weight[i] = a * std::pow(b, metric.n - 2);
    p.potential[i] = (m2 > 0 ? m2 / (a * a) : 0.0) + (mu > 0 ? mu / (b * b) : 0.0);
  }
  for (int i = 0; i <= N; ++i) {
    const double rf = i == N ? R : i * p.h;
    p.face_weight[i] = std::max(0.0, metric.weight(rf));
  }
  // The closure conditions make these exact zeros; round-off must not leak flux.
  p.face_weight[0] = 0.0;
  p.face_weight[N] = 0.0;
  return p;
}

/// Radial eigenvalue with its profile on the staggered grid.
///
/// The profile is normalized so that sum w_i h phi_i^2 = 1 / (Vol(S^1) Vol(S^{n-2})),
/// i.e. phi times a unit-mean-square angular factor has unit L2 norm on M.
/// The sign is fixed so that the entry of largest magnitude is positive.
struct Eigenpair {
  RadialMode mode;
  double lambda = 0.0;
  int index = 0;  ///< position within the mode (0 = lowest)
  int n = 3;
  double h = 0.0;
  std::vector<double> r;
  std::vector<double> phi;

  /// Cubic Lagrange interpolation of the profile (extrapolated near the ends).
  [[nodiscard]] double profile_at(double x) const {
    const int N = static_cast<int>(phi.size());
    const double s = x / h - 0.5;
    int i0 = static_cast<int>(std::floor(s)) - 1;
    i0 = std::clamp(i0, 0, N - 4);
    double out = 0.0;
    for (int j = 0; j < 4; ++j) {
      double basis = 1.0;
      for (int k = 0; k < 4; ++k)
        if (k != j) basis *= (s - (i0 + k)) / static_cast<double>(j - k);
      out += basis * phi[i0 + j];
    }
    return out;
  }
};

inline std::vector<Eigenpair> solve_radial(const RadialProblem& p, int count) {
  if (count < 0 || count > p.N / 4) {
    std::ostringstream os;
    os << "solve_radial count " << count << " exceeds N/4 = " << p.N / 4;
    throw DomainError(os.str());
  }
  const SymTridiagonal t = p.symmetric_matrix();
  std::vector<Eigenpair> out;
  std::vector<std::vector<double>> found;
  const double target_norm = 1.0 / angular_volume(p.n);
  for (int k = 0; k < count; ++k) {
    const double lambda = bisect_eigenvalue(t, static_cast<std::size_t>(k));
    std::vector<double> v = inverse_iteration(t, lambda, found);
    found.push_back(v);
    Eigenpair e;
    e.mode = p.mode;
    e.lambda = lambda;
    e.index = k;
    e.n = p.n;
    e.h = p.h;
    e.r = p.r;
    e.phi.resize(p.N);
    for (int i = 0; i < p.N; ++i) e.phi[i] = v[i] / std::sqrt(p.weight[i] * p.h);
    const double norm2 = p.inner(e.phi, e.phi);
    const double scale = std::sqrt(target_norm / norm2);
    std::size_t imax = 0;
    for (std::size_t i = 1; i < e.phi.size(); ++i)
      if (std::abs(e.phi[i]) > std::abs(e.phi[imax])) imax = i;
    const double sign = e.phi[imax] < 0 ? -1.0 : 1.0;
    for (double& x : e.phi) x *= sign * scale;
    out.push_back(std::move(e));
  }
  return out;
}

/// Number of radial eigenvalues of this mode not exceeding `cutoff`.
inline int count_eigenvalues_below(const RadialProblem& p, double cutoff) {
  return static_cast<int>(p.symmetric_matrix().count_below(std::nextafter(cutoff, INFINITY)));
}

// --- merged spectrum -------------------------------------------------------

struct SpectrumEntry {
  double lambda = 0.0;        ///< raw eigenvalue at resolution N
  double extrapolated = 0.0;  ///< Richardson value from (N, 2N); equals lambda when disabled
  std::int64_t multiplicity = 0;
  RadialMode mode;
  int index = 0;

  [[nodiscard]] double best() const { return extrapolated; }
};

struct SpectrumOptions {
  double lambda_max = 20.0;
  int N = 2000;
  bool richardson = true;
  std::size_t max_modes = 100000;
};

struct SpectrumResult {
  int n = 3;
  SpectrumOptions options;
  std::vector<SpectrumEntry> entries;  ///< nondecreasing in best()

  struct Cluster {
    double lambda = 0.0;  ///< mean of best() over the cluster
    std::int64_t multiplicity = 0;
  };

  /// Groups entries whose best() values differ by at most rel_tol * max(1, |lambda|).
  [[nodiscard]] std::vector<Cluster> clusters(double rel_tol) const {
    std::vector<Cluster> out;
    double sum = 0.0;
    std::size_t cnt = 0;
    double anchor = 0.0;
    for (const auto& e : entries) {
      const double v = e.best();
      if (cnt > 0 && std::abs(v - anchor) <= rel_tol * std::max(1.0, std::abs(anchor))) {
        sum += v;
        ++cnt;
        out.back().multiplicity += e.multiplicity;
        out.back().lambda = sum / static_cast<double>(cnt);
        continue;
      }
      anchor = v;
      sum = v;
      cnt = 1;
      out.push_back(Cluster{v, e.multiplicity});
    }
    return out;
  }

  /// Eigenvalues listed with multiplicity, ascending (lambda_0 = 0 first).
  [[nodiscard]] std::vector<double> expanded() const {
    std::vector<double> out;
    for (const auto& e : entries)
      for (std::int64_t k = 0; k < e.multiplicity; ++k) out.push_back(e.best());
    return out;
  }
};

/// Modes whose potential minimum on the grid does not exceed the cutoff.
/// Since the kinetic term is nonnegative, every other mode has all of its
/// eigenvalues above the cutoff.
inline std::vector<RadialMode> admissible_modes(const WarpedSphereMetric& metric, double lambda_max,
                                                int N, std::size_t max_modes = 100000) {
  const RadialProblem base = radial_problem(metric, RadialMode{0, 0}, N);
  double max_a = 0.0, max_b = 0.0;
  std::vector<double> a2(N), b2(N);
  for (int i = 0; i < N; ++i) {
    const double a = metric.a(base.r[i]), b = metric.b(base.r[i]);
    a2[i] = a * a;
    b2[i] = b * b;
    max_a = std::max(max_a, a);
    max_b = std::max(max_b, b);
  }
  std::vector<RadialMode> modes;
  for (int m = 0; static_cast<double>(m) * m <= lambda_max * max_a * max_a; ++m) {
    for (int l = 0; sphere_harmonic_eigenvalue(metric.n, l) <= lambda_max * max_b * max_b; ++l) {
      const double mu = sphere_harmonic_eigenvalue(metric.n, l);
      const double m2 = static_cast<double>(m) * m;
      double vmin = std::numeric_limits<double>::infinity();
      for (int i = 0; i < N; ++i) {
        const double v = (m2 > 0 ? m2 / a2[i] : 0.0) + (mu > 0 ? mu / b2[i] : 0.0);
        vmin = std::min(vmin, v);
      }
      if (vmin <= lambda_max) {
        modes.push_back(RadialMode{m, l});
        if (modes.size() > max_modes) {
          std::ostringstream os;
          os << "mode enumeration exceeds " << max_modes << " modes; use a smaller lambda_max";
          throw NumericalError(os.str());
        }
      }
    }
  }
  return modes;
}

inline SpectrumResult merged_spectrum(const WarpedSphereMetric& metric, const SpectrumOptions& opt) {
  if (!(opt.lambda_max > 0.0)) throw DomainError("lambda_max must be positive");
  const std::vector<RadialMode> modes =
      admissible_modes(metric, opt.lambda_max, opt.N, opt.max_modes);
  std::vector<std::vector<SpectrumEntry>> per_mode(modes.size());
  parallel_for(modes.size(), [&](std::size_t k) {
    const RadialMode mode = modes[k];
    const RadialProblem coarse = radial_problem(metric, mode, opt.N);
    const int count = count_eigenvalues_below(coarse, opt.lambda_max);
    if (count == 0) return;
    const auto pairs = solve_radial(coarse, count);
    std::vector<Eigenpair> fine;
    if (opt.richardson) fine = solve_radial(radial_problem(metric, mode, 2 * opt.N), count);
    const std::int64_t mult = mode_multiplicity(metric.n, mode);
    for (int i = 0; i < count; ++i) {
      SpectrumEntry e;
      e.lambda = pairs[i].lambda;
      e.extrapolated = opt.richardson ? (4.0 * fine[i].lambda - pairs[i].lambda) / 3.0 : e.lambda;
      e.multiplicity = mult;
      e.mode = mode;
      e.index = i;
      per_mode[k].push_back(e);
    }
  });
  SpectrumResult res;
  res.n = metric.n;
  res.options = opt;
  for (auto& v : per_mode)
    for (auto& e : v) res.entries.push_back(e);
  std::stable_sort(res.entries.begin(), res.entries.end(),
                   [](const SpectrumEntry& x, const SpectrumEntry& y) {
                     if (x.best() != y.best()) return x.best() < y.best();
                     if (x.mode != y.mode) return x.mode < y.mode;
                     return x.index < y.index;
                   });
  return res;
}

/// Lowest `count` eigenpairs (by raw eigenvalue) over the given modes.
inline std::vector<Eigenpair> lowest_eigenpairs(const WarpedSphereMetric& metric,
                                                const std::vector<RadialMode>& modes, int count,
                                                int N) {
  std::vector<std::vector<Eigenpair>> per_mode(modes.size());
  parallel_for(modes.size(), [&](std::size_t k) {
    per_mode[k] = solve_radial(radial_problem(metric, modes[k], N), std::min(count, N / 4));
  });
  std::vector<Eigenpair> all;
  for (auto& v : per_mode)
    for (auto& e : v) all.push_back(std::move(e));
  std::stable_sort(all.begin(), all.end(), [](const Eigenpair& x, const Eigenpair& y) {
    if (x.lambda != y.lambda) return x.lambda < y.lambda;
    if (x.mode != y.mode) return x.mode < y.mode;
    return x.index < y.index;
  });
  if (static_cast<int>(all.size()) > count) all.resize(count);
  return all;
}

// --- Rayleigh quotients ----------------------------------------------------

/// Discrete Rayleigh quotient of an eigenpair, recomputed from its profile.
inline double rayleigh_quotient(const WarpedSphereMetric& metric, const Eigenpair& pair) {
  const RadialProblem p = radial_problem(metric, pair.mode, static_cast<int>(pair.phi.size()));
  std::vector<double> f = pair.phi;
  if (pair.mode.m == 0 && pair.mode.l == 0) {
    std::vector<double> one(f.size(), 1.0);
    const double mean = p.inner(f, one) / p.inner(one, one);
    for (double& x : f) x -= mean;
  }
  const double var = p.inner(f, f);
  const double scale = p.inner(pair.phi, pair.phi);
  if (!(var > 1e-14 * scale)) throw DomainError("degenerate test function (zero variance)");
  return p.energy(f) / var;
}

/// Test function phi(r) times a normalized angular factor of the given mode.
struct ModeTestFunction {
  RadialMode mode;
  std::function<double(double)> profile;
  std::function<double(double)> derivative;
};

/// int |df|^2 / int (f - mean f)^2 by Gauss-Legendre quadrature on every
/// smooth piece of the metric.
inline double rayleigh_quotient(const WarpedSphereMetric& metric, const ModeTestFunction& test,
                                int panels = 400) {
  std::vector<double> cuts{0.0};
  for (double s : metric.seams()) cuts.push_back(s);
  cuts.push_back(metric.R());
  const double mu = sphere_harmonic_eigenvalue(metric.n, test.mode.l);
  const double m2 = static_cast<double>(test.mode.m) * test.mode.m;
  double energy = 0.0, mass = 0.0, mean_num = 0.0, total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i], hi = cuts[i + 1];
    energy += quadrature::integrate(
        [&](double r) {
          const double a = metric.a(r), b = metric.b(r);
          const double phi = test.profile(r), dphi = test.derivative(r);
          double v = dphi * dphi;
          if (m2 > 0) v += m2 * phi * phi / (a * a);
          if (mu > 0) v += mu * phi * phi / (b * b);
          return v * metric.weight(r);
        },
        lo, hi, static_cast<std::size_t>(panels));
    mass += quadrature::integrate(
        [&](double r) { const double f = test.profile(r); return f * f * metric.weight(r); }, lo, hi,
        static_cast<std::size_t>(panels));
    mean_num += quadrature::integrate(
        [&](double r) { return test.profile(r) * metric.weight(r); }, lo, hi,
        static_cast<std::size_t>(panels));
    total += quadrature::integrate([&](double r) { return metric.weight(r); }, lo, hi,
                                   static_cast<std::size_t>(panels));
  }
  double var = mass;
  if (test.mode.m == 0 && test.mode.l == 0) var -= mean_num * mean_num / total;
  if (!(var > 1e-14 * std::max(mass, 1e-300))) throw DomainError("degenerate test function (zero variance)");
  return energy / var;
}

// --- Bochner defect ----------------------------------------------------------

/// Integrated Bochner defect of an eigenfunction f = phi(r) Theta(theta) Y(v).
///
/// defect = lambda^2 - 2 lambda + n - int Ric(grad f, grad f) / |f|^2
/// rhs    = (lambda - n)(lambda - 1) - int (Ric - (n-1))(grad f, grad f) / |f|^2
///
/// Both use the same discrete quadrature of the Ricci term, but rhs uses an
/// independently assembled Dirichlet energy, so defect == rhs tests that the
/// pair is a genuine eigenpair of the discrete operator.
struct BochnerDefect {
  double defect = 0.0;
  double rhs = 0.0;
  double lambda = 0.0;
  double ricci_term = 0.0;   ///< int Ric(grad f, grad f) / |f|^2
  double energy_ratio = 0.0; ///< int |grad f|^2 / |f|^2
  int n = 3;

  /// (lambda - n)(lambda - 1), an upper bound for the defect when Ric >= n-1.
  [[nodiscard]] double ricci_free_bound() const { return (lambda - n) * (lambda - 1.0); }
};

namespace detail {
/// Ricci frame at r, nudged off any seam to the right-hand side.
inline RicciFrame ricci_off_seam(const WarpedSphereMetric& m, double r) {
  if (m.a.near_interior_breakpoint(r, kSeamExclusion) || m.b.near_interior_breakpoint(r, kSeamExclusion))
    r += kOneSidedOffset;
  return ricci_frame(m, r);
}
} // namespace detail

inline BochnerDefect bochner_defect(const WarpedSphereMetric& metric, const Eigenpair& pair) {
  const int N = static_cast<int>(pair.phi.size());
  const RadialProblem p = radial_problem(metric, pair.mode, N);
  const auto& phi = pair.phi;
  const double mu = sphere_harmonic_eigenvalue(metric.n, pair.mode.l);
  const double m2 = static_cast<double>(pair.mode.m) * pair.mode.m;
  double ricci = 0.0;
  for (int i = 1; i < N; ++i) {
    const double rf = i * p.h;
    const double d = (phi[i] - phi[i - 1]) / p.h;
    ricci += detail::ricci_off_seam(metric, rf).ric_r * p.face_weight[i] * d * d * p.h;
  }
  if (m2 > 0 || mu > 0) {
    for (int i = 0; i < N; ++i) {
      const RicciFrame f = detail::ricci_off_seam(metric, p.r[i]);
      const double a = metric.a(p.r[i]), b = metric.b(p.r[i]);
      const double ang = (m2 > 0 ? f.ric_u * m2 / (a * a) : 0.0) + (mu > 0 ? f.ric_v * mu / (b * b) : 0.0);
      ricci += ang * p.weight[i] * p.h * phi[i] * phi[i];
    }
  }
  const double norm2 = p.inner(phi, phi);
  const double energy = p.energy(phi);
  const double lam = pair.lambda;
  const double n = metric.n;
  BochnerDefect out;
  out.lambda = lam;
  out.n = metric.n;
  out.ricci_term = ricci / norm2;
  out.energy_ratio = energy / norm2;
  out.defect = lam * lam - 2.0 * lam + n - out.ricci_term;
  out.rhs = (lam - n) * (lam - 1.0) - (ricci - (n - 1.0) * energy) / norm2;
  return out;
}

/// int |Hess f + f g|^2 / |f|^2 evaluated directly from finite-difference
/// derivatives of the profile and the closed-form angular integrals of the
/// harmonics. Independent of the Ricci formulas; accurate to O(h^2).
inline double hessian_defect(const WarpedSphereMetric& metric, const Eigenpair& pair) {
  const int N = static_cast<int>(pair.phi.size());
  const double h = pair.h;
  const auto& phi = pair.phi;
  const int d = metric.n - 2;
  const double m2 = static_cast<double>(pair.mode.m) * pair.mode.m;
  const double mu = sphere_harmonic_eigenvalue(metric.n, pair.mode.l);
  const double hess_sq = mu * mu - (d - 1) * mu;  // int |Hess Y|^2 / int Y^2 on S^d
  double num = 0.0, den = 0.0;
  for (int i = 0; i < N; ++i) {
    const double r = pair.r[i];
    const double w = metric.weight(r);
    den += phi[i] * phi[i] * w * h;
    if (i == 0 || i == N - 1) continue;
    const double f = phi[i];
    const double f1 = (phi[i + 1] - phi[i - 1]) / (2.0 * h);
    const double f2 = (phi[i + 1] - 2.0 * phi[i] + phi[i - 1]) / (h * h);
    const double a = metric.a(r), a1 = metric.a.eval(r, 1);
    const double b = metric.b(r), b1 = metric.b.eval(r, 1);
    // radial-radial and circle-circle diagonal entries (+ f)
    double s = (f2 + f) * (f2 + f);
    const double hth = -m2 * f / (a * a) + a1 * f1 / a + f;
    s += hth * hth;
    // mixed r-theta: (1/a)(phi' - a'/a phi) Theta'
    const double rth = (f1 - a1 / a * f) / a;
    s += 2.0 * rth * rth * m2;
    // sphere block: (phi/b^2) Hess Y + (b'/b phi' + phi) Y I_d
    const double c = b1 / b * f1 + f;
    const double q = f / (b * b);
    s += q * q * hess_sq - 2.0 * q * c * mu + d * c * c;
    // mixed r-sphere: (1/b)(phi' - b'/b phi) grad Y
    const double rv = (f1 - b1 / b * f) / b;
    s += 2.0 * rv * rv * mu;
    // mixed circle-sphere: phi Theta' grad Y / (a b)
    const double tv = f / (a * b);
    s += 2.0 * tv * tv * m2 * mu;
    num += s * w * h;
  }
  return num / den;
}

} // namespace sphere_pinch

#endif // SPHERE_PINCH_SPECTRUM_HPP
