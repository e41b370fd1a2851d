#include "grushin/metric.hpp"
#include "grushin/registry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>

using namespace grushin;

namespace {

DistanceField from(const NumericSystem& ns, std::size_t n, std::vector<double> src, double eps) {
  return distance_field(ns, GridSpec::over(ns, n), std::span<const double>(src), eps, 2);
}

// Grushin(1) distance from the origin to (0, y): the geodesic x = sin(lt)/l
// returns to the axis at time pi/l having climbed pi/(2 l^2).
double grushin_axis_distance(double y) { return std::sqrt(2 * std::numbers::pi * std::abs(y)); }

}  // namespace

TEST(Relaxation, GramPlusEpsilonSquared) {
  NumericSystem ns(builtin("grushin"));
  std::vector<double> x{0.5, 0.0};
  auto m = relaxed_metric(ns, x, 0.1);
  // A A^T + eps^2 I = diag(1 + eps^2, x1^2 + eps^2)
  EXPECT_NEAR(m(0, 0), 1.01, 1e-12);
  EXPECT_NEAR(m(1, 1), 0.26, 1e-12);
  EXPECT_NEAR(m(0, 1), 0.0, 1e-12);
  EXPECT_THROW(relaxed_metric(ns, x, 0.0), std::invalid_argument);
}

TEST(Stencil, OffsetsArePrimitiveDirections) {
  auto o1 = stencil_offsets(2, 1);
  EXPECT_EQ(o1.size(), 8u);
  auto o2 = stencil_offsets(2, 2);
  // radius 2 adds (+-1, +-2) and (+-2, +-1); (2, 0), (2, 2) are multiples
  EXPECT_EQ(o2.size(), 16u);
  for (const auto& v : o2) EXPECT_EQ(std::gcd(std::abs(v[0]), std::abs(v[1])), 1);
  EXPECT_THROW(stencil_offsets(2, 4), std::invalid_argument);
}

TEST(Distance, EuclideanDiagonalWithinTwoPercent) {
  NumericSystem ns(builtin("euclidean"));
  auto df = from(ns, 257, {-1.5, -2}, 0.05);
  double d = distance_to(df, ns, std::vector<double>{1.5, 2});
  EXPECT_NEAR(d, 5.0, 0.1);
  EXPECT_GE(d, 5.0 * 0.999);  // graph paths bound from above up to relaxation
}

TEST(Distance, SourceIsZeroAndFieldIsSymmetric) {
  NumericSystem ns(builtin("grushin"));
  auto df = from(ns, 129, {0, 0}, 0.05);
  EXPECT_EQ(df.at(df.source), 0.0);
  std::vector<double> p{1, 1}, q{-1, -1}, r{1, -1};
  double a = distance_to(df, ns, p), b = distance_to(df, ns, q), c = distance_to(df, ns, r);
  EXPECT_NEAR(a, b, 1e-9);
  EXPECT_NEAR(a, c, 1e-9);
}

TEST(Distance, GrushinAxisMatchesGeodesic) {
  NumericSystem ns(builtin("grushin"));
  auto df = from(ns, 513, {0, 0}, 0.01);
  for (double y : {0.5, 1.0, 2.0}) {
    double d = distance_to(df, ns, std::vector<double>{0, y});
    EXPECT_NEAR(d / grushin_axis_distance(y), 1.0, 0.05) << y;
  }
}

TEST(Distance, GrushinDilationRatio) {
  NumericSystem ns(builtin("grushin"));
  auto df = from(ns, 513, {0, 0}, 0.01);
  double a = distance_to(df, ns, std::vector<double>{0, 0.5}), b = distance_to(df, ns, std::vector<double>{0, 2});
  EXPECT_NEAR(b / a, 2.0, 0.1);
}

TEST(Volume, EuclideanDiscArea) {
  NumericSystem ns(builtin("euclidean"));
  auto df = from(ns, 257, {0, 0}, 0.05);
  auto b = ball_volume(df, 1.0);
  EXPECT_FALSE(b.touches_boundary);
  EXPECT_NEAR(b.volume / std::numbers::pi, 1.0, 0.03);
  EXPECT_THROW(ball_volume(df, -1), std::invalid_argument);
  EXPECT_TRUE(ball_volume(df, 10).touches_boundary);
}

TEST(Volume, SlopeOfExactPowerLaw) {
  std::vector<double> r, v;
  for (double x = 0.3; x < 3; x *= 1.3) {
    r.push_back(x);
    v.push_back(7 * std::pow(x, 3.5));
  }
  EXPECT_NEAR(loglog_slope(r, v), 3.5, 1e-12);
}

TEST(Volume, TableMarksBoundaryRows) {
  NumericSystem ns(builtin("euclidean"));
  auto t = volume_table(ns, GridSpec::over(ns, 65), {{0, 0}}, {0.5, 5.0}, 0.2);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_TRUE(t.rows[0].interior);
  EXPECT_FALSE(t.rows[1].interior);
}

TEST(Doubling, EuclideanRatioIsFour) {
  NumericSystem ns(builtin("euclidean"));
  std::vector<LadderLevel> ladder{{{65, 65}, 0.2}, {{129, 129}, 0.1}, {{257, 257}, 0.05}};
  auto rep = doubling_report(ns, {{0, 0}, {1, 1}}, {0.5, 1.0}, ladder);
  EXPECT_TRUE(rep.all_stable);
  EXPECT_EQ(rep.excluded, 0u);
  for (const auto& c : rep.cells) EXPECT_NEAR(c.ratios.back(), 4.0, 0.2);
  EXPECT_NEAR(rep.exponent, 2.0, 0.05);
}

TEST(Doubling, WindowedGridKeepsBallsInside) {
  NumericSystem ns(builtin("circle3d"));
  std::vector<LadderLevel> ladder{{{17, 17, 17}, 0.2}, {{33, 33, 33}, 0.1}};
  auto rep = doubling_report(ns, {{1, 0, 0}}, {0.3, 2.0}, ladder, 2, 0.05, Box{{0, -1, -0.5}, {2, 1, 0.5}});
  ASSERT_EQ(rep.cells.size(), 2u);
  EXPECT_TRUE(std::isfinite(rep.cells[0].ratios.back()));
  EXPECT_TRUE(std::isnan(rep.cells[1].ratios.back()));
  EXPECT_EQ(rep.excluded, 1u);
}

TEST(Doubling, NeedsTwoLevels) {
  NumericSystem ns(builtin("euclidean"));
  EXPECT_THROW(doubling_report(ns, {{0, 0}}, {1}, {{{65, 65}, 0.2}}), std::invalid_argument);
}
