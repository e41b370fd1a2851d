#include "grushin/bounds.hpp"
#include "grushin/registry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace grushin;

namespace {

constexpr double kPi = std::numbers::pi;

// Periodized Poisson kernel of the plane, images on the 8-lattice.
double poisson_closed(double t, double x, double y) {
  double s = 0;
  for (int i = -40; i <= 40; ++i)
    for (int j = -40; j <= 40; ++j) {
      double a = x + 8 * i, b = y + 8 * j;
      s += t / (2 * kPi * std::pow(t * t + a * a + b * b, 1.5));
    }
  return s;
}

// First nonzero Neumann eigenvalue of the unit disc is j'_{1,1}^2.
constexpr double kDiscNeumann = 1.8411837813406593 * 1.8411837813406593;

std::vector<std::vector<double>> plane_sources() { return {{0, 0}, {1, 0}, {0, 1}, {-0.5, -0.5}}; }

const HeatLadder& plane_ladder() {
  static const HeatLadder h(builtin("euclidean"), {{64, HeatMethod::Krylov}, {128, HeatMethod::Krylov}});
  return h;
}

}  // namespace

TEST(Finalize, DriftCeilingAndSamples) {
  BoundReport r{"x"};
  r.samples = 3;
  BoundConstant a{"a", true}, b{"b", false};
  a.levels = {{10, 2.0, {}}, {20, 2.1, {}}};
  a.ceiling = 5;
  b.levels = {{10, 1.0, {}}, {20, 0.5, {}}};
  b.ceiling = 0.1;
  r.constants = {a, b};
  finalize(r);
  EXPECT_NEAR(r.constants[0].drift, 0.1 / 2.1, 1e-15);
  EXPECT_TRUE(r.constants[0].stable);
  EXPECT_FALSE(r.constants[1].stable);  // drift 1
  EXPECT_TRUE(r.constants[1].within);
  EXPECT_FALSE(r.passed);

  r.constants[1].levels[0].value = 0.52;
  finalize(r);
  EXPECT_TRUE(r.passed);
  r.constants[0].ceiling = 2;
  finalize(r);
  EXPECT_FALSE(r.passed);
  r.constants[0].ceiling = 5;
  r.samples = 0;
  finalize(r);
  EXPECT_FALSE(r.passed);
}

TEST(Harnack, FitIsTheSupportingLineAtTheMean) {
  auto f = harnack_fit({{0, 0}, {1, 1}, {2, 1.5}});
  EXPECT_NEAR(f.c, 0.5, 1e-15);
  EXPECT_NEAR(f.C, std::exp(0.5), 1e-15);
  auto g = harnack_fit({{1, 0.2}, {1, 0.7}});
  EXPECT_NEAR(g.C, std::exp(0.7), 1e-15);
  EXPECT_EQ(g.c, 0);
  EXPECT_THROW(harnack_fit({}), std::invalid_argument);
}

TEST(Harnack, ProbeLayout) {
  auto p = harnack_probes({0, 0}, {0.25, 0.5});
  EXPECT_EQ(p.size(), 17u);
  EXPECT_EQ(harnack_probes({0, 0, 0}, {0.5}).size(), 1u + 6u + 12u);
}

TEST(Harnack, EuclideanAgreesWithClosedForm) {
  HarnackSpec spec;
  spec.sources = plane_sources();
  spec.times = {1, 2};
  auto rep = harnack_report(plane_ladder(), spec);
  ASSERT_TRUE(rep.passed);
  std::vector<std::pair<double, double>> pts;
  for (const auto& y : spec.sources) {
    auto pr = harnack_probes(y, spec.offsets);
    for (double t : spec.times) {
      std::vector<double> pv;
      for (const auto& q : pr) pv.push_back(poisson_closed(t, q[0] - y[0], q[1] - y[1]));
      auto add = harnack_points(pv, t, [&](std::size_t i, std::size_t j) {
        return std::hypot(pr[i][0] - pr[j][0], pr[i][1] - pr[j][1]);
      });
      pts.insert(pts.end(), add.begin(), add.end());
    }
  }
  auto exact = harnack_fit(pts);
  EXPECT_NEAR(rep.constant("C").value() / exact.C, 1.0, 0.10);
  EXPECT_NEAR(rep.constant("c").value() / exact.c, 1.0, 0.10);
}

TEST(Gaussian, EuclideanRatiosAreAQuarter) {
  // h_t V(sqrt t) = exp(-d^2 / 4t) / 4, so both extremes sit at d = 0
  GaussianSpec spec;
  spec.sources = plane_sources();
  spec.diagonal_times = {0.1, 0.2, 0.5, 1.0, 2.0};
  spec.target_stride = 2;
  auto rs = gaussian_reports(plane_ladder(), spec);
  ASSERT_EQ(rs.size(), 3u);
  for (const auto& r : rs) EXPECT_TRUE(r.passed) << r.claim;
  EXPECT_NEAR(rs[0].constant("C").value(), 0.25, 0.25 * 0.05);
  EXPECT_NEAR(rs[1].constant("c").value(), 0.25, 0.25 * 0.05);
  EXPECT_LE(rs[2].constant("ratio").value(), 1.1);
}

TEST(Poisson, EuclideanGradientAndTimeDoubling) {
  // t |d_i p_t| / p_t = 3 t |x_i| / (t^2 + r^2) <= 3/2; p_2t / p_t >= 1/4 at d = 0
  PoissonSpec spec;
  spec.sources = {{0, 0}, {1, 0}};
  spec.times = {0.25, 0.5};
  auto rs = poisson_reports(plane_ladder(), spec);
  ASSERT_EQ(rs.size(), 2u);
  EXPECT_TRUE(rs[0].passed);
  EXPECT_TRUE(rs[1].passed);
  EXPECT_NEAR(rs[0].constant("inf").value(), 0.25, 0.25 * 0.03);
  double g = rs[1].constant("sup").value();
  EXPECT_LE(g, 1.5 * 1.05);
  EXPECT_GE(g, 1.5 * 0.9);
}

TEST(Poincare, DiscWithCoordinateIsAQuarter) {
  const auto& gen = plane_ladder().level(1);
  const auto& g = gen.grid();
  auto df = distance_field(plane_ladder().system(), g, std::vector<double>{0, 0}, 0.025, 2);
  auto ball = ball_nodes(df, 1.0);
  Vec f = sample_on(g, [](std::span<const double> x) { return x[0]; });
  double ratio = poincare_ratio(ball, f, grad_sq(gen, f), 1.0);
  EXPECT_NEAR(ratio, 0.25, 0.25 * 0.05);
}

TEST(Poincare, EuclideanSupBelowNeumannBound) {
  PoincareSpec spec;
  for (double a : {-1.0, 0.0, 1.0})
    for (double b : {-1.0, 0.0, 1.0}) spec.centers.push_back({a, b});
  spec.radii = {0.5, 1.0};
  spec.epsilons = {0.05, 0.025};
  auto rep = poincare_report(plane_ladder(), spec);
  EXPECT_TRUE(rep.passed);
  EXPECT_GE(rep.samples, 18u * 10u);
  double c = rep.constant("C").value();
  EXPECT_LE(c, 1.05 / kDiscNeumann);
  EXPECT_GE(c, 0.95 * 0.25);
}

TEST(Riesz, SquareFunctionIdentityIsExact) {
  for (const char* name : {"euclidean", "grushin", "torus_sin"}) {
    HeatLadder h(builtin(name), {{32, HeatMethod::Eigen}});
    RieszSpec spec;
    spec.functions = 10;
    spec.p_list.clear();
    auto rs = riesz_reports(h, spec);
    ASSERT_EQ(rs.size(), 1u);
    EXPECT_TRUE(rs[0].passed) << name;
    EXPECT_LE(rs[0].constants[0].value(), 1e-10) << name;
  }
}

TEST(TestFamily, CoordinatesProductsAndBandLimited) {
  NumericSystem ns(builtin("grushin"));
  auto fam = test_family(ns, 4, 7);
  ASSERT_EQ(fam.size(), 2u + 3u + 4u);
  std::vector<double> x{0.5, -2};
  EXPECT_EQ(fam[1](x), -2);
  EXPECT_EQ(fam[3](x), -1);
  auto b = band_limited(ns, 3);
  std::vector<double> y{x[0] + 8, x[1] - 8};
  EXPECT_NEAR(b(x), b(y), 1e-12);  // periodic on the window
}

TEST(Norms, LpOfAConstant) {
  NumericSystem ns(builtin("euclidean"));
  auto g = GridSpec(std::vector<std::size_t>{8, 8}, {0, 0}, {2, 2}, {true, true});
  Vec one = Vec::Constant(64, 3.0);
  EXPECT_NEAR(lp_norm(g, one, 2), 3.0 * 2.0, 1e-12);
  EXPECT_NEAR(lp_norm(g, one, 4), 3.0 * std::pow(4.0, 0.25), 1e-12);
}
