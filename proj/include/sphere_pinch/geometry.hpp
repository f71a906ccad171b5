#ifndef SPHERE_PINCH_GEOMETRY_HPP
#define SPHERE_PINCH_GEOMETRY_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <queue>
#include <sstream>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "warped_metric.hpp"

namespace sphere_pinch {

/// Point of the reduced slice [0,R] x [0,pi] x [0,pi]: radius, circle angle
/// and angular position along a great circle of S^{n-2}.
struct ReducedPoint {
  double r = 0.0;
  double dtheta = 0.0;
  double psi = 0.0;
};

/// Point of the manifold: radius, circle angle in [0, 2 pi) and a unit
/// vector of R^{n-1} on S^{n-2}.
struct ManifoldPoint {
  double r = 0.0;
  double theta = 0.0;
  std::vector<double> v;
};

inline double fold_angle(double t) {
  t = std::fmod(std::abs(t), 2.0 * std::numbers::pi);
  return t > std::numbers::pi ? 2.0 * std::numbers::pi - t : t;
}

inline double sphere_angle(const std::vector<double>& x, const std::vector<double>& y) {
  double dot = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
  return std::acos(std::clamp(dot, -1.0, 1.0));
}

/// Shortest-path distances on a structured grid over the reduced slice with
/// ds^2 = dr^2 + a(r)^2 dtheta^2 + b(r)^2 dpsi^2.
///
/// A minimizing geodesic between two points can be taken inside the totally
/// geodesic slice spanned by the radial direction, the circle, and the great
/// circle of S^{n-2} through both angular positions, and folding the circle
/// and the great circle onto [0, pi] does not increase lengths. Every grid
/// edge is a real curve whose length is integrated exactly up to quadrature,
/// so grid distances bound true distances from above.
///
/// The radial axis has resolution / 2 intervals, which keeps cells roughly
/// cubic since R <= pi / 2. The base stencil is every primitive offset in
/// [-3, 3]^3 (290 neighbors), a superset of the 16-neighborhood of every
/// coordinate plane. Its worst-case angular error is about 1.5%. Rows where a or b is small also get copies of
/// the base offsets stretched along the collapsing angle, so that the
/// polar-like geometry near r = 0 and r = R can be followed.
class GeodesicGrid {
public:
  static constexpr int kStencilReach = 3;

  GeodesicGrid(const WarpedSphereMetric& metric, int resolution)
      : metric_(&metric), resolution_(resolution) {
    if (resolution < 32 || resolution % 2 != 0)
      throw DomainError("geodesic grid resolution must be even and >= 32");
    nr_ = resolution / 2;
    npsi_ = resolution;
    ntheta_ = theta_intervals(metric, resolution);
    hr_ = metric.R() / nr_;
    htheta_ = std::numbers::pi / ntheta_;
    hpsi_ = std::numbers::pi / npsi_;
    build_stencil();
  }

  /// Circle-axis intervals: resolution / 2^j with 2^j <= 1 / max a, at least 8.
  /// Halving commutes with doubling the resolution, so grids nest.
  static int theta_intervals(const WarpedSphereMetric& metric, int resolution) {
    double max_a = 0.0;
    for (int i = 0; i <= 256; ++i) max_a = std::max(max_a, metric.a(metric.R() * i / 256.0));
    int count = resolution;
    while (count % 2 == 0 && count / 2 >= 8 && 2.0 * max_a * (resolution / count) <= 1.0) count /= 2;
    return count;
  }

  [[nodiscard]] int resolution() const { return resolution_; }
  [[nodiscard]] int nr() const { return nr_; }
  [[nodiscard]] int ntheta() const { return ntheta_; }
  [[nodiscard]] int npsi() const { return npsi_; }
  [[nodiscard]] double hr() const { return hr_; }
  [[nodiscard]] double htheta() const { return htheta_; }
  [[nodiscard]] double hpsi() const { return hpsi_; }
  [[nodiscard]] std::size_t node_count() const {
    return static_cast<std::size_t>(nr_ + 1) * (ntheta_ + 1) * (npsi_ + 1);
  }
  [[nodiscard]] std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * (ntheta_ + 1) + j) * (npsi_ + 1) + k;
  }

  /// Nearest radial node index for r.
  [[nodiscard]] int radial_node(double r) const {
    if (!(r >= -1e-12) || r > metric_->R() + 1e-12) {
      std::ostringstream os;
      os << "radius " << r << " outside [0, " << metric_->R() << "]";
      throw DomainError(os.str());
    }
    return std::clamp(static_cast<int>(std::lround(r / hr_)), 0, nr_);
  }

  /// Distances from the node (i_src, 0, 0) to every node. Ties in the
  /// priority queue are broken by node index.
  [[nodiscard]] std::vector<double> distances_from(int i_src) const {
    const std::size_t total = node_count();
    std::vector<double> dist(total, std::numeric_limits<double>::infinity());
    std::vector<char> done(total, 0);
    using Item = std::pair<double, std::uint32_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    const std::size_t src = index(i_src, 0, 0);
    dist[src] = 0.0;
    heap.emplace(0.0, static_cast<std::uint32_t>(src));
    const int nt1 = ntheta_ + 1, np1 = npsi_ + 1;
    while (!heap.empty()) {
      const auto [d, node] = heap.top();
      heap.pop();
      if (done[node]) continue;
      done[node] = 1;
      const int k = static_cast<int>(node % np1);
      const int j = static_cast<int>((node / np1) % nt1);
      const int i = static_cast<int>(node / (static_cast<std::size_t>(np1) * nt1));
      for (const Edge& e : edges_[static_cast<std::size_t>(i)]) {
        const int ii = i + e.di, jj = j + e.dj, kk = k + e.dk;
        if (ii < 0 || ii > nr_ || jj < 0 || jj > ntheta_ || kk < 0 || kk > npsi_) continue;
        const std::size_t nb = (static_cast<std::size_t>(ii) * nt1 + jj) * np1 + kk;
        if (done[nb]) continue;
        const double nd = d + e.length;
        if (nd < dist[nb]) {
          dist[nb] = nd;
          heap.emplace(nd, static_cast<std::uint32_t>(nb));
        }
      }
    }
    return dist;
  }

  /// Trilinear interpolation of a distance field at a reduced point.
  [[nodiscard]] double interpolate(const std::vector<double>& field, const ReducedPoint& p) const {
    const double x = std::clamp(p.r / hr_, 0.0, static_cast<double>(nr_));
    const double y = std::clamp(p.dtheta / htheta_, 0.0, static_cast<double>(ntheta_));
    const double z = std::clamp(p.psi / hpsi_, 0.0, static_cast<double>(npsi_));
    const int i = std::min(static_cast<int>(x), nr_ - 1);
    const int j = std::min(static_cast<int>(y), ntheta_ - 1);
    const int k = std::min(static_cast<int>(z), npsi_ - 1);
    const double fx = x - i, fy = y - j, fz = z - k;
    double out = 0.0;
    for (int di = 0; di <= 1; ++di)
      for (int dj = 0; dj <= 1; ++dj)
        for (int dk = 0; dk <= 1; ++dk) {
          const double wgt = (di ? fx : 1 - fx) * (dj ? fy : 1 - fy) * (dk ? fz : 1 - fz);
          if (wgt == 0.0) continue;
          out += wgt * field[index(i + di, j + dj, k + dk)];
        }
    return out;
  }

private:
  struct Edge {
    int di, dj, dk;
    double length;
  };

  /// Length of the straight coordinate segment from row i by (di, dj, dk).
  [[nodiscard]] double segment_length(int i, int di, int dj, int dk) const {
    const auto& rule = quadrature::gauss5();
    const double R = metric_->R();
    const double r0 = i * hr_;
    const double r1 = i + di == nr_ ? R : (i + di) * hr_;
    const double dr = r1 - r0, dt = dj * htheta_, dp = dk * hpsi_;
    double len = 0.0;
    for (std::size_t q = 0; q < 5; ++q) {
      const double t = 0.5 * (1.0 + rule.nodes[q]);
      const double r = std::clamp(r0 + t * dr, 0.0, R);
      const double a = metric_->a(r), b = metric_->b(r);
      len += 0.5 * rule.weights[q] * std::sqrt(dr * dr + a * a * dt * dt + b * b * dp * dp);
    }
    return len;
  }

  void build_stencil() {
    std::vector<std::array<int, 3>> base;
    for (int di = -kStencilReach; di <= kStencilReach; ++di)
      for (int dj = -kStencilReach; dj <= kStencilReach; ++dj)
        for (int dk = -kStencilReach; dk <= kStencilReach; ++dk) {
          if (di == 0 && dj == 0 && dk == 0) continue;
          if (std::gcd(std::gcd(std::abs(di), std::abs(dj)), std::abs(dk)) != 1) continue;
          base.push_back({di, dj, dk});
        }
    const double R = metric_->R();
    std::vector<double> a_row(nr_ + 1), b_row(nr_ + 1);
    for (int i = 0; i <= nr_; ++i) {
      const double r = i == nr_ ? R : i * hr_;
      a_row[i] = metric_->a(r);
      b_row[i] = metric_->b(r);
    }
    auto stretch = [&](double warp, double h) {
      const double ratio = hr_ / (std::max(warp, 1e-300) * h);
      return ratio >= 2.0 ? static_cast<int>(std::min(ratio, 1e6)) : 1;
    };
    edges_.assign(static_cast<std::size_t>(nr_ + 1), {});
    for (int i = 0; i <= nr_; ++i) {
      std::vector<std::array<int, 3>> offs;
      for (const auto& o : base) {
        const int ie = i + o[0];
        if (ie < 0 || ie > nr_) continue;
        offs.push_back(o);
        // The stretch factor depends on both rows so that reversed edges match.
        const int st = std::min(stretch(std::max(a_row[i], a_row[ie]), htheta_), ntheta_);
        const int sp = std::min(stretch(std::max(b_row[i], b_row[ie]), hpsi_), npsi_);
        if (st == 1 && sp == 1) continue;
        const std::array<int, 3> wide{o[0], o[1] * st, o[2] * sp};
        if (std::abs(wide[1]) > ntheta_ || std::abs(wide[2]) > npsi_) continue;
        offs.push_back(wide);
      }
      std::sort(offs.begin(), offs.end());
      offs.erase(std::unique(offs.begin(), offs.end()), offs.end());
      auto& row = edges_[static_cast<std::size_t>(i)];
      row.reserve(offs.size());
      for (const auto& o : offs) row.push_back(Edge{o[0], o[1], o[2], segment_length(i, o[0], o[1], o[2])});
    }
  }

  const WarpedSphereMetric* metric_;
  int resolution_ = 0;
  int nr_ = 0, ntheta_ = 0, npsi_ = 0;
  double hr_ = 0.0, htheta_ = 0.0, hpsi_ = 0.0;
  std::vector<std::vector<Edge>> edges_;
};

struct DistanceReport {
  double distance = 0.0;       ///< at the requested resolution
  double coarse_distance = 0.0;///< at half the resolution (or equal when that is below 32)
  [[nodiscard]] double metrication_estimate() const { return std::abs(coarse_distance - distance); }
};

namespace detail {
inline double grid_distance(const WarpedSphereMetric& m, const ReducedPoint& x,
                            const ReducedPoint& y, int resolution) {
  const GeodesicGrid grid(m, resolution);
  for (const auto* p : {&x, &y}) {
    if (p->dtheta < 0 || p->dtheta > std::numbers::pi + 1e-12 || p->psi < 0 ||
        p->psi > std::numbers::pi + 1e-12)
      throw DomainError("reduced point angles must lie in [0, pi]");
    (void)grid.radial_node(p->r);  // range check
  }
  if (x.r == y.r && x.dtheta == y.dtheta && x.psi == y.psi) return 0.0;
  const auto field = grid.distances_from(grid.radial_node(x.r));
  ReducedPoint rel{y.r, std::abs(y.dtheta - x.dtheta), std::abs(y.psi - x.psi)};
  return grid.interpolate(field, rel);
}
} // namespace detail

/// Geodesic distance between two points of the reduced slice. The source
/// radius is snapped to the nearest grid node.
inline DistanceReport distance(const WarpedSphereMetric& m, const ReducedPoint& x,
                               const ReducedPoint& y, int resolution) {
  DistanceReport rep;
  rep.distance = detail::grid_distance(m, x, y, resolution);
  rep.coarse_distance =
      resolution / 2 >= 32 && resolution % 4 == 0 ? detail::grid_distance(m, x, y, resolution / 2) : rep.distance;
  return rep;
}

/// Finite metric space with a symmetric distance matrix (row-major).
struct SampledMetricSpace {
  std::vector<ManifoldPoint> points;
  std::vector<double> dist;

  [[nodiscard]] std::size_t size() const { return points.size(); }
  [[nodiscard]] double operator()(std::size_t i, std::size_t j) const { return dist[i * size() + j]; }
};

struct SampleCounts {
  int radial = 6;
  int circle = 6;
  int sphere = 6;
};

/// Unit vector at angle alpha along the great circle spanned by the first
/// two axes of R^{n-1}.
inline std::vector<double> great_circle_direction(int n, double alpha) {
  std::vector<double> v(static_cast<std::size_t>(n - 1), 0.0);
  v[0] = std::cos(alpha);
  v[1] = std::sin(alpha);
  return v;
}

/// Structured sample: radii at grid nodes spread over [0, R], circle angles
/// 2 pi j / circle, sphere directions 2 pi k / sphere along a great circle.
/// Radii are snapped to the radial nodes of a grid at `resolution`. With
/// `include_ends` false the radii are the nodes nearest to the midpoints of
/// `radial` equal pieces of [0, R], so r = 0 and r = R are avoided.
inline std::vector<ManifoldPoint> structured_sample(const WarpedSphereMetric& m, SampleCounts c,
                                                    int resolution, bool include_ends = true) {
  if (c.radial < 1 || c.circle < 1 || c.sphere < 1) throw DomainError("sample counts must be positive");
  const int nr = resolution / 2;
  const double hr = m.R() / nr;
  std::vector<ManifoldPoint> pts;
  for (int i = 0; i < c.radial; ++i) {
    int node = 0;
    if (!include_ends) node = static_cast<int>(std::lround((i + 0.5) * nr / c.radial));
    else if (c.radial > 1) node = static_cast<int>(std::lround(static_cast<double>(i) * nr / (c.radial - 1)));
    const double r = node == nr ? m.R() : node * hr;
    for (int j = 0; j < c.circle; ++j)
      for (int k = 0; k < c.sphere; ++k)
        pts.push_back(ManifoldPoint{r, 2.0 * std::numbers::pi * j / c.circle,
                                    great_circle_direction(m.n, 2.0 * std::numbers::pi * k / c.sphere)});
  }
  return pts;
}

/// Pairwise grid distances between manifold points. One shortest-path run
/// per distinct source radius; entries are symmetrized by taking the smaller
/// of the two interpolated values.
inline SampledMetricSpace pairwise_distances(const WarpedSphereMetric& m,
                                             std::vector<ManifoldPoint> points, int resolution) {
  const std::size_t np = points.size();
  if (static_cast<double>(np) * static_cast<double>(np) > 1e7)
    throw DomainError("sample too large: points^2 exceeds 1e7");
  SampledMetricSpace space;
  space.points = std::move(points);
  space.dist.assign(np * np, 0.0);
  if (np <= 1) return space;
  const GeodesicGrid grid(m, resolution);
  std::vector<int> node_of(np);
  std::vector<int> sources;
  for (std::size_t p = 0; p < np; ++p) {
    node_of[p] = grid.radial_node(space.points[p].r);
    if (std::find(sources.begin(), sources.end(), node_of[p]) == sources.end())
      sources.push_back(node_of[p]);
  }
  std::sort(sources.begin(), sources.end());
  std::vector<double> raw(np * np, 0.0);
  // Shortest-path runs are independent per source radius; a single field is
  // alive per worker, which bounds memory on large grids.
  parallel_for(sources.size(), [&](std::size_t s) {
    const auto field = grid.distances_from(sources[s]);
    for (std::size_t p = 0; p < np; ++p) {
      if (node_of[p] != sources[s]) continue;
      const auto& x = space.points[p];
      for (std::size_t q = 0; q < np; ++q) {
        if (q == p) continue;
        const auto& y = space.points[q];
        const ReducedPoint rel{y.r, fold_angle(y.theta - x.theta), sphere_angle(x.v, y.v)};
        raw[p * np + q] = grid.interpolate(field, rel);
      }
    }
  });
  for (std::size_t p = 0; p < np; ++p)
    for (std::size_t q = p + 1; q < np; ++q) {
      const double d = std::min(raw[p * np + q], raw[q * np + p]);
      space.dist[p * np + q] = space.dist[q * np + p] = d;
    }
  return space;
}

inline SampledMetricSpace sample_space(const WarpedSphereMetric& m, SampleCounts counts,
                                       int resolution) {
  return pairwise_distances(m, structured_sample(m, counts, resolution), resolution);
}

struct DiameterRadius {
  double diameter = 0.0;
  double radius = 0.0;
};

/// Sampled diameter (max pairwise) and radius (min over x of max over y).
inline DiameterRadius diameter_radius(const SampledMetricSpace& s) {
  if (s.size() < 2) throw DomainError("diameter_radius needs at least 2 points");
  DiameterRadius out;
  out.radius = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s.size(); ++i) {
    double ecc = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) ecc = std::max(ecc, s(i, j));
    out.diameter = std::max(out.diameter, ecc);
    out.radius = std::min(out.radius, ecc);
  }
  return out;
}

/// Distance on the unit sphere between points at distances s1, s2 from a
/// common center whose directions make angle psi.
inline double half_sphere_distance(double s1, double psi, double s2) {
  const double c = std::cos(s1) * std::cos(s2) + std::sin(s1) * std::sin(s2) * std::cos(psi);
  return std::acos(std::clamp(c, -1.0, 1.0));
}

struct GhReport {
  long long k = 0;
  int resolution = 0;
  double max_distortion = 0.0;
  double covering_defect = 0.0;
  double circle_fiber_max = 0.0;
};

struct GhOptions {
  int resolution = 128;
  SampleCounts counts{9, 4, 8};
  int model_radial = 33;  ///< model sample rings between center and boundary
};

/// Distortion of the correspondence (r, u, v) -> point of the unit
/// hemisphere of S^{n-1} at distance R - r from the center in direction v.
inline GhReport gh_distortion(const WarpedSphereMetric& m, const GhOptions& opt = {}) {
  if (!m.pinch) throw UnsupportedError("gh_distortion needs a metric from make_pinch_family");
  GhReport rep;
  rep.k = m.pinch->k;
  rep.resolution = opt.resolution;
  const double R = m.R();
  const auto space = sample_space(m, opt.counts, opt.resolution);
  const std::size_t np = space.size();
  for (std::size_t p = 0; p < np; ++p)
    for (std::size_t q = p + 1; q < np; ++q) {
      const auto& x = space.points[p];
      const auto& y = space.points[q];
      const double model = half_sphere_distance(R - x.r, sphere_angle(x.v, y.v), R - y.r);
      rep.max_distortion = std::max(rep.max_distortion, std::abs(space(p, q) - model));
      if (x.r == y.r && sphere_angle(x.v, y.v) == 0.0)
        rep.circle_fiber_max = std::max(rep.circle_fiber_max, space(p, q));
    }
  // Covering: model points against the image of the whole correspondence,
  // which is every point at distance at most R from the center.
  for (int i = 0; i < opt.model_radial; ++i) {
    const double s = 0.5 * std::numbers::pi * i / (opt.model_radial - 1);
    rep.covering_defect = std::max(rep.covering_defect, s - R);
  }
  return rep;
}

/// Grid distance across the circle fiber: (r, 0, 0) to (r, pi, 0).
inline double circle_fiber_distance(const WarpedSphereMetric& m, double r, int resolution) {
  return detail::grid_distance(m, ReducedPoint{r, 0.0, 0.0}, ReducedPoint{r, std::numbers::pi, 0.0},
                               resolution);
}

/// Test function x -> cos(d(c, x)) for the marked point c = (r, 0, 0).
struct DistanceTestFunction {
  double center_r = 0.0;
};

/// Rayleigh quotient int |df|^2 / int (f - mean f)^2 of cos(d(c, .)), with
/// the distance field from the geodesic grid. Gradients are cell averages of
/// edge differences and both integrals use cell midpoints on the reduced
/// slice, weighted by a b^{n-2} sin^{n-3}(psi).
inline double rayleigh_quotient(const WarpedSphereMetric& m, const DistanceTestFunction& test,
                                int resolution) {
  const GeodesicGrid grid(m, resolution);
  const auto field = grid.distances_from(grid.radial_node(test.center_r));
  const int nr = grid.nr(), nt = grid.ntheta(), np = grid.npsi();
  const double hr = grid.hr(), ht = grid.htheta(), hp = grid.hpsi();
  std::vector<double> f(field.size());
  for (std::size_t q = 0; q < field.size(); ++q) f[q] = std::cos(field[q]);
  double energy = 0.0, mass = 0.0, first = 0.0, second = 0.0;
  for (int i = 0; i < nr; ++i) {
    const double rc = (i + 0.5) * hr;
    const double a = m.a(rc), b = m.b(rc);
    const double wr = a * std::pow(b, m.n - 2);
    for (int j = 0; j < nt; ++j)
      for (int k = 0; k < np; ++k) {
        const double w = wr * (m.n == 3 ? 1.0 : std::pow(std::sin((k + 0.5) * hp), m.n - 3));
        double c[2][2][2];
        for (int di = 0; di < 2; ++di)
          for (int dj = 0; dj < 2; ++dj)
            for (int dk = 0; dk < 2; ++dk) c[di][dj][dk] = f[grid.index(i + di, j + dj, k + dk)];
        double fr = 0.0, ft = 0.0, fp = 0.0, mean = 0.0;
        for (int x = 0; x < 2; ++x)
          for (int y = 0; y < 2; ++y) {
            fr += c[1][x][y] - c[0][x][y];
            ft += c[x][1][y] - c[x][0][y];
            fp += c[x][y][1] - c[x][y][0];
            mean += c[x][y][0] + c[x][y][1];
          }
        fr /= 4.0 * hr;
        ft /= 4.0 * ht;
        fp /= 4.0 * hp;
        mean /= 8.0;
        energy += w * (fr * fr + ft * ft / (a * a) + fp * fp / (b * b));
        mass += w;
        first += w * mean;
        second += w * mean * mean;
      }
  }
  const double variance = second - first * first / mass;
  if (!(variance > 1e-14 * mass)) throw DomainError("degenerate test function: zero variance");
  return energy / variance;
}

} // namespace sphere_pinch

#endif // SPHERE_PINCH_GEOMETRY_HPP
