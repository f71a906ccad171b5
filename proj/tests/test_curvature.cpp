#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include <sphere_pinch/curvature.hpp>

using namespace sphere_pinch;

TEST(RicciFrame, RoundSphereIsEinstein) {
  for (int n : {3, 4, 6}) {
    const auto m = make_round_sphere(n);
    for (int i = 1; i < 1000; ++i) {
      const double r = m.R() * i / 1000.0;
      const RicciFrame f = ricci_frame(m, r);
      EXPECT_NEAR(f.ric_r, n - 1.0, 1e-12) << n << " r=" << r;
      EXPECT_NEAR(f.ric_u, n - 1.0, 1e-12) << n << " r=" << r;
      EXPECT_NEAR(f.ric_v, n - 1.0, 1e-12) << n << " r=" << r;
    }
  }
}

TEST(RicciFrame, MatchesFiniteDifferenceFormula) {
  // Independent evaluation from finite differences of a and b.
  const auto m = make_pinch_family(4, 100);
  const double eps = static_cast<double>(m.pinch->eps);
  for (double r : {0.5 * eps, 0.3, 0.9, 1.3}) {
    const double h = 1e-3 * std::min(r, 1.0);
    auto d1 = [&](const PiecewiseSmoothFunction& f) { return (f(r + h) - f(r - h)) / (2 * h); };
    auto d2 = [&](const PiecewiseSmoothFunction& f) { return (f(r + h) - 2 * f(r) + f(r - h)) / (h * h); };
    const double a = m.a(r), b = m.b(r);
    const double ric_r = -d2(m.a) / a - 2 * d2(m.b) / b;
    const double ric_u = -d2(m.a) / a - 2 * d1(m.a) * d1(m.b) / (a * b);
    const double ric_v = -d2(m.b) / b - d1(m.a) * d1(m.b) / (a * b) + (1 - d1(m.b) * d1(m.b)) / (b * b);
    const RicciFrame f = ricci_frame(m, r);
    EXPECT_NEAR(f.ric_r, ric_r, 1e-4 * std::abs(ric_r) + 1e-4) << r;
    EXPECT_NEAR(f.ric_u, ric_u, 1e-4 * std::abs(ric_u) + 1e-4) << r;
    EXPECT_NEAR(f.ric_v, ric_v, 1e-4 * std::abs(ric_v) + 1e-4) << r;
  }
}

TEST(RicciFrame, RejectsEndpointsAndSeams) {
  const auto m = make_pinch_family(3, 1000);
  EXPECT_THROW(ricci_frame(m, 0.0), DomainError);
  EXPECT_THROW(ricci_frame(m, m.R()), DomainError);
  EXPECT_THROW(ricci_frame(m, -1.0), DomainError);
  EXPECT_THROW(ricci_frame(m, static_cast<double>(m.pinch->eps)), DomainError);
  const double eps = static_cast<double>(m.pinch->eps);
  EXPECT_NO_THROW(ricci_frame(m, eps - kOneSidedOffset));
  EXPECT_NO_THROW(ricci_frame(m, eps + kOneSidedOffset));
}

TEST(RicciFrame, PinchFamilyLowerBound) {
  for (long long k : {1000LL, 10000LL}) {
    const auto m = make_pinch_family(3, k);
    const auto rep = check_lower_bound(m, 2.0, 4000);
    EXPECT_TRUE(rep.passed) << k << " worst " << rep.worst.value << " at r=" << rep.worst.r;
  }
}

TEST(RicciFrame, PinchCoreCurvatureIsLarge) {
  for (long long k : {1000LL, 10000LL}) {
    const auto m = make_pinch_family(3, k);
    const double eps = static_cast<double>(m.pinch->eps);
    const double k2 = static_cast<double>(k) * static_cast<double>(k);
    for (int i = 1; i <= 200; ++i) {
      const double r = std::min(eps * i / 200.0, eps - kOneSidedOffset);
      const RicciFrame f = ricci_frame(m, r);
      EXPECT_GE(f.ric_r, k2 * (1 - 1e-12)) << k << " r=" << r;
      EXPECT_GE(f.ric_u, k2 * (1 - 1e-12)) << k << " r=" << r;
    }
  }
}

TEST(RicciFrame, SphereFactorInPinchCore) {
  double prev_ratio = 0.0;
  for (long long k : {100LL, 1000LL, 10000LL, 100000LL}) {
    const auto m = make_pinch_family(3, k);
    const double eps = static_cast<double>(m.pinch->eps);
    const double floor = static_cast<double>((m.pinch->eps + m.pinch->theta) / m.pinch->eps);
    for (int i = 1; i <= 200; ++i) {
      const double r = std::min(eps * i / 200.0, eps - kOneSidedOffset);
      EXPECT_GE(ricci_frame(m, r).ric_v, floor * (1 - 1e-6)) << k << " r=" << r;
    }
    // floor grows like (2 / pi) sqrt(k).
    const double ratio = floor / (2.0 / std::numbers::pi * std::sqrt(static_cast<double>(k)));
    if (prev_ratio > 0.0) EXPECT_LT(std::abs(ratio - 1.0), std::abs(prev_ratio - 1.0)) << k;
    prev_ratio = ratio;
  }
  EXPECT_NEAR(prev_ratio, 1.0, 0.01);
}

TEST(RicciFrame, OneSidedLimitsDifferAtSeam) {
  const auto m = make_pinch_family(3, 1000);
  const double eps = static_cast<double>(m.pinch->eps);
  const RicciFrame left = ricci_frame(m, eps - kOneSidedOffset);
  const RicciFrame right = ricci_frame(m, eps + kOneSidedOffset);
  EXPECT_GT(std::abs(left.ric_r - right.ric_r), 1.0);
}

TEST(RicciScan, GridAvoidsSeamsAndEnds) {
  const auto m = make_pinch_family(3, 100);
  const auto grid = ricci_scan_grid(m, 512);
  EXPECT_GE(grid.size(), 256u);
  for (double r : grid) {
    EXPECT_GT(r, 0.0);
    EXPECT_LT(r, m.R());
    EXPECT_FALSE(m.a.near_interior_breakpoint(r, kSeamExclusion));
  }
  EXPECT_THROW(ricci_scan_grid(m, 10), DomainError);
}

TEST(RicciScan, RoundSphereMinimum) {
  const auto rep = check_lower_bound(make_round_sphere(5), 4.0, 256);
  EXPECT_TRUE(rep.passed);
  EXPECT_NEAR(rep.worst.value, 4.0, 1e-10);
  EXPECT_FALSE(check_lower_bound(make_round_sphere(3), 2.5, 256).passed);
}
