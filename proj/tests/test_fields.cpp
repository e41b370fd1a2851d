#include "grushin/fields.hpp"
#include "grushin/registry.hpp"
#include "grushin/system_io.hpp"
#include "random_expr.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace grushin;

namespace {

VectorField F(const char* s, std::size_t dim) { return parse_field(s, dim); }

}  // namespace

TEST(Bracket, ProductRuleTerm) { EXPECT_EQ(bracket(F("d1", 2), F("x1 d2", 2)), F("d2", 2)); }

TEST(Bracket, MotionGroupRelations) {
  EXPECT_EQ(bracket(F("d1", 2), F("sin(x1) d2", 2)), F("cos(x1) d2", 2));
  EXPECT_TRUE(bracket(F("sin(x1) d2", 2), F("cos(x1) d2", 2)).is_zero());
  EXPECT_EQ(bracket(F("d1", 2), F("cos(x1) d2", 2)), F("-sin(x1) d2", 2));
}

TEST(Bracket, DimensionMismatchThrows) { EXPECT_THROW(bracket(F("d1", 2), F("d1", 3)), std::invalid_argument); }

TEST(Divergence, Examples) {
  EXPECT_TRUE(divergence(F("x1^2 + x2^2 - 1 d3", 3)).is_zero());
  EXPECT_EQ(divergence(F("x1 d1", 2)), Expr::constant(2, 1));
  EXPECT_TRUE(divergence(F("sin(x1) d2", 2)).is_zero());
}

TEST(FieldSystem, RejectsNonSkewAdjointField) {
  Box b{{-1, -1}, {1, 1}};
  EXPECT_THROW(FieldSystem(2, {F("x1 d1", 2)}, b), SystemError);
}

TEST(FieldSystem, RejectsNonPeriodicFieldOnTorus) {
  Torus t{{Rational(2), Rational(2)}};
  EXPECT_THROW(FieldSystem(2, {F("d1", 2), F("x1 d2", 2)}, t), SystemError);
  EXPECT_THROW(FieldSystem(2, {F("d1", 2), F("sin(1/2*x1) d2", 2)}, t), SystemError);
  EXPECT_NO_THROW(FieldSystem(2, {F("d1", 2), F("sin(3*x1) d2", 2)}, t));
}

TEST(FieldParse, TermsAndWholeExpressionSegments) {
  VectorField v = F("x1^2 + x2^2 - 1 d3", 3);
  EXPECT_EQ(v[2], parse_expr("x1^2 + x2^2 - 1", 3));
  VectorField w = F("x2 d1 + -x1 d2", 2);
  EXPECT_EQ(w[0], parse_expr("x2", 2));
  EXPECT_EQ(w[1], parse_expr("-x1", 2));
  EXPECT_THROW(F("x1", 2), SystemError);
  EXPECT_THROW(F("x1 d3", 2), SystemError);
}

TEST(SystemFile, ParsesBoxAndTorus) {
  auto s = parse_system(R"(# grushin
dim = 2
domain = box [-4..4; -2.5..2.5]
fields = [ "d1",
           "x1 d2" ]
)");
  EXPECT_EQ(s.dim(), 2u);
  EXPECT_EQ(s.size(), 2u);
  EXPECT_DOUBLE_EQ(std::get<Box>(s.domain()).lo[1], -2.5);
  auto t = parse_system("dim = 2\ndomain = torus [2pi, 2*pi]\nfields = [\"d1\", \"sin(x1) d2\"]\n");
  EXPECT_TRUE(is_torus(t.domain()));
  EXPECT_NEAR(std::get<Torus>(t.domain()).period(0), 2 * std::numbers::pi, 1e-15);
  EXPECT_THROW(parse_system("dim = 2\nfields = [\"d1\"]\n"), SystemError);
  EXPECT_THROW(parse_system("dim = 2\ndomain = torus [6.28, 6.28]\nfields = [\"d1\"]\n"), SystemError);
}

TEST(SystemFile, RoundTripsThroughText) {
  for (const auto& name : {"grushin", "circle3d", "torus_sin"}) {
    auto s = builtin(name);
    auto back = parse_system(s.to_string());
    ASSERT_EQ(back.size(), s.size());
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(back.field(i), s.field(i));
  }
}

TEST(Flow, TranslationShearAndConstantCoefficient) {
  std::vector<double> o{0, 0};
  auto p = flow(F("d1", 2), o, 0.7, 1);
  EXPECT_DOUBLE_EQ(p[0], 0.7);
  EXPECT_DOUBLE_EQ(p[1], 0.0);
  std::vector<double> c0{1.5, 0};
  p = flow(F("x1 d2", 2), c0, 2.0, 1);
  EXPECT_DOUBLE_EQ(p[0], 1.5);
  EXPECT_DOUBLE_EQ(p[1], 3.0);
  std::vector<double> h{std::numbers::pi / 2, 0};
  p = flow(F("sin(x1) d2", 2), h, 1.0, 1);
  EXPECT_DOUBLE_EQ(p[0], std::numbers::pi / 2);
  EXPECT_NEAR(p[1], 1.0, 1e-15);
  EXPECT_THROW(flow(F("d1", 2), o, 1.0, 0), std::invalid_argument);
}

TEST(Flow, RotationFieldUsesRk4) {
  // x2 d1 - x1 d2 rotates clockwise; after t = pi/2, (1,0) -> (0,-1)
  VectorField rot = F("x2 d1 + -x1 d2", 2);
  EXPECT_FALSE(rot.shear_axis().has_value());
  std::vector<double> p0{1, 0};
  auto p = flow_converged(rot, p0, std::numbers::pi / 2);
  EXPECT_NEAR(p[0], 0.0, 1e-9);
  EXPECT_NEAR(p[1], -1.0, 1e-9);
}

TEST(Flow, EscapeIsReported) {
  // x1^2 d2 composed with x2^2 d1 is not shear; x2^2 d1 alone escapes for large data
  VectorField blow = F("x2^2 d1 + x1^2 d2", 2);
  std::vector<double> p0{1e200, 1e200};
  EXPECT_THROW(flow(blow, p0, 1.0, 4), FlowError);
}

TEST(Registry, Examples) {
  EXPECT_EQ(builtin("grushin", {.k = 1}).size(), 2u);
  auto c = builtin("circle3d");
  EXPECT_EQ(c.size(), 3u);
  EXPECT_EQ(c.dim(), 3u);
  auto t = builtin("torus_sin");
  ASSERT_TRUE(is_torus(t.domain()));
  EXPECT_EQ(std::get<Torus>(t.domain()).periods_over_pi, (std::vector<Rational>{2, 2}));
  EXPECT_THROW(builtin("nope"), UnknownBuiltin);
  EXPECT_THROW(builtin("grushin", {.k = 0}), SystemError);
  EXPECT_THROW(builtin("poly_omega", {.omegas = {"0"}}), SystemError);
  EXPECT_THROW(builtin("poly_omega", {.omegas = {"sin(x1)"}}), SystemError);
  EXPECT_EQ(builtin("multi_omega", {.omegas = {"1", "x1"}}).size(), 3u);
}

class FieldProperties : public ::testing::Test {
 protected:
  std::mt19937_64 rng{77};
};

TEST_F(FieldProperties, JacobiAndAntisymmetry) {
  for (int i = 0; i < 25; ++i) {
    auto x = gen::random_field(rng, 2), y = gen::random_field(rng, 2), z = gen::random_field(rng, 2);
    EXPECT_EQ(bracket(x, y), bracket(y, x).scaled(-1));
    VectorField j = bracket(x, bracket(y, z)) + bracket(y, bracket(z, x)) + bracket(z, bracket(x, y));
    EXPECT_TRUE(j.is_zero());
  }
}

TEST_F(FieldProperties, BracketOfDivergenceFreeFieldsIsDivergenceFree) {
  for (int i = 0; i < 40; ++i) {
    auto x = gen::random_divfree_field(rng, 3), y = gen::random_divfree_field(rng, 3);
    ASSERT_TRUE(divergence(x).is_zero());
    EXPECT_TRUE(divergence(bracket(x, y)).is_zero());
  }
}

TEST_F(FieldProperties, FlowGroupLaw) {
  std::uniform_real_distribution<double> u(-1, 1);
  VectorField rot = F("x2 d1 + -x1 d2 + sin(x1) d2", 2);
  for (int i = 0; i < 10; ++i) {
    std::vector<double> p{u(rng), u(rng)};
    double s = u(rng), t = u(rng);
    auto a = flow_converged(rot, flow_converged(rot, p, s), t);
    auto b = flow_converged(rot, p, s + t);
    EXPECT_NEAR(a[0], b[0], 1e-8);
    EXPECT_NEAR(a[1], b[1], 1e-8);
  }
}

TEST_F(FieldProperties, FlowPreservesArea) {
  // Jacobian determinant of the flow map by central differences.
  std::uniform_real_distribution<double> u(-1, 1);
  const std::vector<VectorField> fields{F("x2 d1 + -x1 d2", 2), F("sin(x2) d1 + x1^2 d2", 2),
                                        F("cos(x1) d2", 2)};
  for (const auto& x : fields) {
    ASSERT_TRUE(divergence(x).is_zero());
    for (int i = 0; i < 5; ++i) {
      std::vector<double> p{u(rng), u(rng)};
      const double h = 1e-5, t = 0.8;
      auto at = [&](double dx, double dy) {
        std::vector<double> q{p[0] + dx, p[1] + dy};
        return flow_converged(x, q, t, 1e-12);
      };
      auto xp = at(h, 0), xm = at(-h, 0), yp = at(0, h), ym = at(0, -h);
      double j11 = (xp[0] - xm[0]) / (2 * h), j21 = (xp[1] - xm[1]) / (2 * h);
      double j12 = (yp[0] - ym[0]) / (2 * h), j22 = (yp[1] - ym[1]) / (2 * h);
      EXPECT_NEAR(j11 * j22 - j12 * j21, 1.0, 1e-6);
    }
  }
}
