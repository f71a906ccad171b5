#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include <sphere_pinch/warped_metric.hpp>

using namespace sphere_pinch;

namespace {

constexpr double kPi = std::numbers::pi;

// Reference constants evaluated independently with 40-digit arithmetic.
struct ConstantsOracle {
  long long k;
  double eta, eps, theta, R;
};
constexpr ConstantsOracle kOracles[] = {
    {100, 0.10032803400979831081, 0.014707963267948966192, 0.084630425093083661202,
     1.486165901701812958},
    {1000, 0.031633300672570125291, 0.0015391735501932128259, 0.030062537345259308172,
     1.5407337894496373111},
    {10000, 0.010000333280003428293, 0.00015607963267948966192, 0.0098432537517592834687,
     1.5609530730431373358},
};

} // namespace

TEST(PinchConstants, MatchHighPrecisionReference) {
  for (const auto& o : kOracles) {
    const PinchConstants c = pinch_constants(o.k);
    EXPECT_NEAR(static_cast<double>(c.eta), o.eta, 1e-15) << o.k;
    EXPECT_NEAR(static_cast<double>(c.eps), o.eps, 1e-16) << o.k;
    EXPECT_NEAR(static_cast<double>(c.theta), o.theta, 1e-15) << o.k;
    EXPECT_NEAR(static_cast<double>(c.R), o.R, 1e-15) << o.k;
  }
}

TEST(PinchConstants, RoundedValuesForKHundred) {
  const PinchConstants c = pinch_constants(100);
  EXPECT_NEAR(static_cast<double>(c.eta), 0.1003280, 5e-8);
  EXPECT_NEAR(static_cast<double>(c.eps), 0.0147080, 5e-8);
  EXPECT_NEAR(static_cast<double>(c.theta), 0.0846304, 5e-8);
  EXPECT_NEAR(static_cast<double>(c.R), 1.4861659, 5e-8);
}

TEST(PinchConstants, AlgebraicIdentitiesAcrossK) {
  for (long long k = 2; k <= 100000; k = k < 50 ? k + 1 : k * 11 / 10) {
    const auto id = constant_identities(k);
    EXPECT_LT(id.blend_residual, 1e-12) << k;
    EXPECT_LT(id.eta_residual, 1e-14) << k;
  }
}

TEST(PinchConstants, RejectsSmallK) {
  EXPECT_THROW(pinch_constants(1), DomainError);
  EXPECT_THROW(make_pinch_family(3, 0), DomainError);
}

TEST(PiecewiseFunction, EvaluatesFirstBranch) {
  const auto m = make_pinch_family(3, 100);
  EXPECT_NEAR(m.a.eval(0.005, 0), std::sin(0.5) / 100.0, 1e-15);
  EXPECT_NEAR(m.a.eval(0.0, 1), 1.0, 1e-15);
  EXPECT_NEAR(m.b.eval(0.0, 1), 0.0, 1e-15);
}

TEST(PiecewiseFunction, BreakpointBelongsToRightSegment) {
  const auto m = make_pinch_family(3, 100);
  const long double eps = m.pinch->eps;
  // Right segment of a at eps is eta sin(r + theta).
  const long double expected = m.pinch->eta * std::sin(eps + m.pinch->theta);
  EXPECT_NEAR(static_cast<double>(m.a.eval_ld(eps, 0)), static_cast<double>(expected), 1e-18);
}

TEST(PiecewiseFunction, C1MatchingAtSeam) {
  for (long long k : {10LL, 100LL, 1000LL, 10000LL, 100000LL}) {
    const auto m = make_pinch_family(3, k);
    EXPECT_LT(static_cast<double>(m.a.max_c1_jump()), 1e-12) << k;
    EXPECT_LT(static_cast<double>(m.b.max_c1_jump()), 1e-12) << k;
  }
}

TEST(PiecewiseFunction, BothBranchesOfBPrimeAgreeAtEps) {
  const auto m = make_pinch_family(3, 100);
  const auto& c = *m.pinch;
  const long double blend = c.eps + c.theta;
  // Left branch derivative: -sin(blend r / eps) at r = eps; right: -sin(r + theta).
  const long double left = -std::sin(blend);
  const long double right = -std::sin(c.eps + c.theta);
  EXPECT_NEAR(static_cast<double>(m.b.eval_ld(c.eps, 1)), static_cast<double>(right), 1e-15);
  EXPECT_NEAR(static_cast<double>(left), static_cast<double>(right), 1e-15);
}

TEST(PiecewiseFunction, OutOfRangeThrows) {
  const auto m = make_round_sphere(3);
  EXPECT_THROW((void)m.a.eval(-0.1, 0), DomainError);
  EXPECT_THROW((void)m.a.eval(2.0, 0), DomainError);
}

TEST(RoundSphere, ConstructionAndClosure) {
  const auto m = make_round_sphere(3);
  EXPECT_NEAR(m.R(), kPi / 2, 1e-15);
  EXPECT_NEAR(m.a(kPi / 4), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(m.b(kPi / 4), std::sqrt(0.5), 1e-15);
  const auto rep = validate_closure(m);
  EXPECT_TRUE(rep.passed);
  for (const auto& c : rep.conditions) EXPECT_LT(c.residual, 1e-15) << c.name;
}

TEST(RoundSphere, RejectsLowDimension) {
  EXPECT_THROW(make_round_sphere(2), UnsupportedError);
  EXPECT_THROW(make_pinch_family(2, 100), UnsupportedError);
}

TEST(PinchFamily, ClosureHolds) {
  for (long long k : {100LL, 1000LL, 10000LL}) {
    const auto rep = validate_closure(make_pinch_family(3, k));
    EXPECT_TRUE(rep.passed) << k;
    for (const auto& c : rep.conditions) EXPECT_LT(c.residual, 1e-10) << c.name;
  }
}

TEST(PinchFamily, WarpingPositiveInside) {
  const auto m = make_pinch_family(4, 1000);
  for (int i = 1; i < 500; ++i) {
    const double r = m.R() * i / 500.0;
    EXPECT_GT(m.a(r), 0.0);
    EXPECT_GT(m.b(r), 0.0);
  }
}

TEST(Closure, FlagsBrokenEndSlope) {
  // b = 0.9 cos r has b'(R) = -0.9.
  WarpedSphereMetric m = make_round_sphere(3);
  m.b = PiecewiseSmoothFunction({0.0L, std::numbers::pi_v<long double> / 2},
                                {Segment{SegmentKind::ScaledCosineShifted, 0.9L, 1.0L, 0.0L}});
  const auto rep = validate_closure(m);
  EXPECT_FALSE(rep.passed);
  for (const auto& c : rep.conditions) {
    if (c.name == "b'(R)=-1") {
      EXPECT_FALSE(c.passed);
      EXPECT_NEAR(c.actual, -0.9, 1e-15);
    } else if (c.name != "b(0)>0") {
      EXPECT_TRUE(c.passed) << c.name;
    }
  }
}

TEST(Volume, RoundSpheresMatchClosedForm) {
  for (int n : {3, 4, 5}) {
    const double exact = 2.0 * std::pow(kPi, (n + 1) / 2.0) / std::tgamma((n + 1) / 2.0);
    EXPECT_NEAR(volume(make_round_sphere(n), 2048), exact, 1e-7 * exact) << n;
  }
  EXPECT_NEAR(volume(make_round_sphere(3), 2048), 2 * kPi * kPi, 1e-8);
}

TEST(Volume, PinchHundredMatchesReference) {
  EXPECT_NEAR(volume(make_pinch_family(3, 100), 2048), 1.9644550105913080626, 1e-10);
}

TEST(Volume, PinchVolumesCollapse) {
  const double round = volume(make_round_sphere(3), 2048);
  double prev = round;
  for (long long k : {100LL, 1000LL, 10000LL}) {
    const auto m = make_pinch_family(3, k);
    const double v = volume(m, 2048);
    EXPECT_LT(v, prev) << k;
    EXPECT_NEAR(v, volume(m, 4096), 1e-10 * v);
    const double ratio = v / round / static_cast<double>(m.pinch->eta);
    EXPECT_GT(ratio, 0.5) << k;
    EXPECT_LT(ratio, 2.0) << k;
    prev = v;
  }
}

TEST(Volume, LinearAndMonotoneInA) {
  const auto m = make_pinch_family(3, 100);
  WarpedSphereMetric half = m, big = m;
  half.a = m.a.scaled(0.5L);
  big.a = m.a.scaled(1.1L);
  const double v = volume(m, 2048);
  EXPECT_NEAR(volume(half, 2048), 0.5 * v, 1e-12 * v);
  EXPECT_GT(volume(big, 2048), v);
}

TEST(Volume, RejectsTooFewPoints) {
  EXPECT_THROW(volume(make_round_sphere(3), 8), DomainError);
}

TEST(Profile, RoundTripPreservesMetric) {
  const auto m = make_pinch_family(4, 1000);
  std::stringstream ss;
  write_profile(ss, m);
  const auto back = read_profile(ss);
  EXPECT_EQ(back.n, 4);
  EXPECT_NEAR(back.R(), m.R(), 1e-15);
  for (int i = 0; i <= 100; ++i) {
    const double r = m.R() * i / 100.0;
    EXPECT_NEAR(back.a(r), m.a(r), 1e-14);
    EXPECT_NEAR(back.b(r), m.b(r), 1e-14);
  }
  EXPECT_NEAR(volume(back, 2048), volume(m, 2048), 1e-12);
}

TEST(Profile, HeaderAndIds) {
  std::stringstream ss;
  write_profile(ss, make_round_sphere(3));
  std::string header;
  std::getline(ss, header);
  EXPECT_EQ(header.rfind("warped n=3 R=1.5707963267948966", 0), 0u);
  std::string line;
  std::getline(ss, line);
  EXPECT_NE(line.find("scaled-sine"), std::string::npos);
}

TEST(Profile, MalformedInputIsRejected) {
  std::stringstream bad_header("warp n=3\n");
  EXPECT_THROW(read_profile(bad_header), FormatError);
  std::stringstream bad_id("warped n=3 R=1.5707963267948966\na 0 1.5707963267948966 spline 1 1 0\n");
  EXPECT_THROW(read_profile(bad_id), FormatError);
  std::stringstream gap(
      "warped n=3 R=1.5707963267948966\n"
      "a 0 1 scaled-sine 1 1 0\n"
      "a 1.1 1.5707963267948966 scaled-sine 1 1 0\n"
      "b 0 1.5707963267948966 scaled-cosine-shifted 1 1 0\n");
  EXPECT_THROW(read_profile(gap), FormatError);
}
