#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include <sphere_pinch/geometry.hpp>

using namespace sphere_pinch;

namespace {

constexpr double kPi = std::numbers::pi;

// Round S^3 with a = sin r, b = cos r embeds as (sin r e^{i theta}, cos r e^{i psi}).
double round_distance(const ReducedPoint& x, const ReducedPoint& y) {
  const double c = std::sin(x.r) * std::sin(y.r) * std::cos(x.dtheta - y.dtheta) +
                   std::cos(x.r) * std::cos(y.r) * std::cos(x.psi - y.psi);
  return std::acos(std::clamp(c, -1.0, 1.0));
}

} // namespace

TEST(GeodesicGrid, RejectsBadResolution) {
  const auto m = make_round_sphere(3);
  EXPECT_THROW(GeodesicGrid(m, 16), DomainError);
  EXPECT_THROW(GeodesicGrid(m, 33), DomainError);
  const GeodesicGrid g(m, 64);
  EXPECT_EQ(g.nr(), 32);
  EXPECT_EQ(g.npsi(), 64);
  EXPECT_EQ(g.ntheta(), 64);
}

TEST(GeodesicGrid, CircleAxisCoarsensForThinFibers) {
  const auto m = make_pinch_family(3, 1000);
  const GeodesicGrid g(m, 128);
  EXPECT_LT(g.ntheta(), 128);
  EXPECT_GE(g.ntheta(), 8);
}

TEST(Distance, DiagonalIsZeroAndSymmetric) {
  const auto m = make_round_sphere(3);
  const ReducedPoint x{0.4, 0.3, 1.0}, y{1.1, 2.0, 0.2};
  EXPECT_NEAR(distance(m, x, x, 64).distance, 0.0, 1e-12);
  const double dxy = distance(m, x, y, 64).distance;
  const double dyx = distance(m, y, x, 64).distance;
  // The source snaps to a radial node, so symmetry holds to interpolation accuracy.
  EXPECT_NEAR(dxy, dyx, 0.02 * dxy);
}

TEST(Distance, RoundSphereAgainstClosedForm) {
  const auto m = make_round_sphere(3);
  const GeodesicGrid g(m, 64);
  const double hr = g.hr();
  double worst = 0.0;
  for (int i : {0, 8, 16, 24, 32})
    for (double t : {0.0, 1.0, kPi})
      for (double p : {0.5, 2.0, kPi}) {
        const ReducedPoint x{i * hr, 0.0, 0.0}, y{1.0, t, p};
        const double exact = round_distance(x, y);
        const double d = distance(m, x, y, 64).distance;
        EXPECT_GE(d, exact - 1e-6) << i << " " << t << " " << p;
        worst = std::max(worst, (d - exact) / exact);
      }
  EXPECT_LT(worst, 0.05);
}

TEST(Distance, RoundSphereSampleRelativeError) {
  const auto m = make_round_sphere(3);
  const auto pts = structured_sample(m, SampleCounts{6, 6, 6}, 128);
  const auto s = pairwise_distances(m, pts, 128);
  double worst = 0.0, mean = 0.0;
  int count = 0;
  for (std::size_t p = 0; p < s.size(); ++p)
    for (std::size_t q = p + 1; q < s.size(); ++q) {
      const auto& x = pts[p];
      const auto& y = pts[q];
      const double c = std::sin(x.r) * std::sin(y.r) * std::cos(x.theta - y.theta) +
                       std::cos(x.r) * std::cos(y.r) * (x.v[0] * y.v[0] + x.v[1] * y.v[1]);
      const double exact = std::acos(std::clamp(c, -1.0, 1.0));
      if (exact < 1e-9) continue;
      const double rel = std::abs(s(p, q) - exact) / exact;
      worst = std::max(worst, rel);
      mean += rel;
      ++count;
    }
  EXPECT_LT(worst, 0.02);
  EXPECT_LT(mean / count, 0.005);
}

TEST(Distance, EquatorAndPoleToPole) {
  const auto m = make_round_sphere(3);
  // Along r = 0 the S^{n-2} factor has full radius b = 1.
  const auto eq = distance(m, {0.0, 0.0, 0.0}, {0.0, 0.0, 2.0}, 128);
  EXPECT_NEAR(eq.distance, 2.0, 0.02 * 2.0);
  const auto across = distance(m, {0.0, 0.0, 0.0}, {m.R(), 0.0, 0.0}, 64);
  EXPECT_NEAR(across.distance, kPi / 2, 1e-9);
}

TEST(Distance, RefinementDoesNotIncreaseDistance) {
  const auto m = make_round_sphere(3);
  const ReducedPoint x{0.0, 0.0, 0.0};
  for (const ReducedPoint& y : {ReducedPoint{0.8, 1.2, 2.2}, ReducedPoint{1.4, kPi, 0.7}}) {
    const double d64 = distance(m, x, y, 64).distance;
    const double d128 = distance(m, x, y, 128).distance;
    EXPECT_LE(d128, d64 + 1e-3 * d64);
    const auto rep = distance(m, x, y, 128);
    EXPECT_NEAR(rep.coarse_distance, d64, 1e-12);
    EXPECT_GE(rep.metrication_estimate(), 0.0);
  }
}

TEST(Distance, RejectsOutOfSlicePoints) {
  const auto m = make_round_sphere(3);
  EXPECT_THROW(distance(m, {0.0, 0.0, 0.0}, {2.0, 0.0, 0.0}, 64), DomainError);
  EXPECT_THROW(distance(m, {0.0, -0.1, 0.0}, {1.0, 0.0, 0.0}, 64), DomainError);
  EXPECT_THROW(distance(m, {0.0, 0.0, 0.0}, {1.0, 0.0, 3.5}, 64), DomainError);
}

TEST(Distance, CircleFiberOfPinchSphere) {
  for (long long k : {100LL, 1000LL}) {
    const auto m = make_pinch_family(3, k);
    const double bound = kPi * static_cast<double>(m.pinch->eta);
    for (int i = 0; i < 10; ++i) {
      const double r = m.R() * i / 9.0;
      EXPECT_LE(circle_fiber_distance(m, r, 128), bound * 1.02) << k << " r=" << r;
    }
  }
}

TEST(SampledSpace, TriangleInequalityAndSymmetry) {
  const auto m = make_pinch_family(3, 100);
  const auto s = sample_space(m, SampleCounts{4, 3, 4}, 64);
  ASSERT_EQ(s.size(), 48u);
  double worst = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(s(i, i), 0.0);
    for (std::size_t j = 0; j < s.size(); ++j) {
      EXPECT_EQ(s(i, j), s(j, i));
      for (std::size_t k = 0; k < s.size(); ++k)
        worst = std::max(worst, s(i, k) - s(i, j) - s(j, k));
    }
  }
  // Interpolated entries satisfy the triangle inequality up to grid error.
  EXPECT_LT(worst, 0.03);
}

TEST(SampledSpace, DiameterAndRadiusOfRoundSphere) {
  const auto s = sample_space(make_round_sphere(3), SampleCounts{5, 4, 4}, 64);
  const auto dr = diameter_radius(s);
  EXPECT_NEAR(dr.diameter, kPi, 0.03 * kPi);
  EXPECT_NEAR(dr.radius, kPi, 0.03 * kPi);
}

TEST(SampledSpace, GuardsSampleSize) {
  const auto m = make_round_sphere(3);
  auto one = structured_sample(m, SampleCounts{1, 1, 1}, 64);
  const auto s = pairwise_distances(m, one, 64);
  EXPECT_EQ(s.size(), 1u);
  EXPECT_THROW(diameter_radius(s), DomainError);
  EXPECT_THROW(structured_sample(m, SampleCounts{0, 1, 1}, 64), DomainError);
  std::vector<ManifoldPoint> many(3163, ManifoldPoint{0.0, 0.0, {1.0, 0.0}});
  EXPECT_THROW(pairwise_distances(m, many, 64), DomainError);
}

TEST(SampledSpace, InteriorSampleAvoidsEnds) {
  const auto m = make_pinch_family(3, 1000);
  for (const auto& p : structured_sample(m, SampleCounts{6, 1, 1}, 128, false)) {
    EXPECT_GT(p.r, 0.0);
    EXPECT_LT(p.r, m.R());
  }
}

TEST(HalfSphere, ClosedFormDistances) {
  EXPECT_NEAR(half_sphere_distance(0.0, 1.0, 0.7), 0.7, 1e-15);
  EXPECT_NEAR(half_sphere_distance(kPi / 2, kPi, kPi / 2), kPi, 1e-15);
  EXPECT_NEAR(half_sphere_distance(kPi / 2, kPi / 2, kPi / 2), kPi / 2, 1e-15);
  EXPECT_NEAR(half_sphere_distance(0.3, 0.0, 0.9), 0.6, 1e-15);
}

TEST(Gh, RejectsNonPinchMetrics) {
  EXPECT_THROW(gh_distortion(make_round_sphere(3)), UnsupportedError);
}

TEST(Gh, DistortionShrinksWithK) {
  GhOptions opt;
  opt.resolution = 64;
  opt.counts = SampleCounts{5, 3, 4};
  const auto r100 = gh_distortion(make_pinch_family(3, 100), opt);
  const auto r1000 = gh_distortion(make_pinch_family(3, 1000), opt);
  EXPECT_LT(r1000.max_distortion, r100.max_distortion);
  EXPECT_NEAR(r100.covering_defect, std::numbers::pi / 2 - make_pinch_family(3, 100).R(), 1e-12);
  EXPECT_LE(r1000.circle_fiber_max, std::numbers::pi * 0.0317 * 1.02);
}

TEST(DistanceTest, RoundSphereQuotient) {
  // cos(d(c, .)) is a first eigenfunction on the round sphere.
  const auto m = make_round_sphere(3);
  EXPECT_NEAR(rayleigh_quotient(m, DistanceTestFunction{0.0}, 64), 3.0, 0.1);
}

TEST(DistanceTest, PinchSphereQuotient) {
  const auto m = make_pinch_family(3, 1000);
  // A point where the circle factor collapses lies on the boundary of the
  // limiting hemisphere, so cos(d(c, .)) is close to a first eigenfunction.
  EXPECT_NEAR(rayleigh_quotient(m, DistanceTestFunction{0.0}, 64), 3.0, 0.5);
}
