#include "grushin/heat.hpp"
#include "grushin/registry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace grushin;

namespace {

constexpr double kPi = std::numbers::pi;

// Periodic Euclidean plane of side 8 sampled with n nodes per axis. The
// centered difference has symbol i sin(kh)/h, the smoother (1 + cos kh)/2;
// the kernel is the inverse Fourier sum of phi(lambda) times the smoother
// squared when smoothed.
struct FourierOracle {
  std::size_t n;
  double side = 8;

  double kernel(double dx, double dy, const std::function<double(double)>& phi, bool smoothed) const {
    const double h = side / static_cast<double>(n);
    double s = 0;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        double k1 = 2 * kPi * static_cast<double>(a) / side, k2 = 2 * kPi * static_cast<double>(b) / side;
        double lam = std::pow(std::sin(k1 * h) / h, 2) + std::pow(std::sin(k2 * h) / h, 2);
        double m = phi(lam);
        if (smoothed) m *= std::pow((1 + std::cos(k1 * h)) / 2, 2) * std::pow((1 + std::cos(k2 * h)) / 2, 2);
        s += m * std::cos(k1 * dx + k2 * dy);
      }
    return s / (side * side);
  }
};

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

struct Plane {
  NumericSystem ns = NumericSystem::periodic_embedding(builtin("euclidean"));
  DiscreteGenerator gen;
  std::size_t origin;
  explicit Plane(std::size_t n) : gen(ns, GridSpec::over(ns, n)) {
    std::vector<double> o{0, 0};
    origin = gen.grid().nearest(o);
  }
  double at(const Vec& v, double x, double y) const {
    std::vector<double> p{x, y};
    return v[static_cast<Eigen::Index>(gen.grid().nearest(p))];
  }
};

}  // namespace

TEST(Generator, DifferencesAreAntisymmetricAndLIsSymmetric) {
  auto ns = NumericSystem::periodic_embedding(builtin("grushin"));
  DiscreteGenerator gen(ns, GridSpec::over(ns, 32));
  for (std::size_t i = 0; i < gen.num_fields(); ++i) {
    SparseMatrix s = gen.D(i) + SparseMatrix(gen.D(i).transpose());
    EXPECT_LT(s.norm(), 1e-12);
  }
  SparseMatrix a = gen.L() - SparseMatrix(gen.L().transpose());
  EXPECT_LT(a.norm(), 1e-12);
  Vec one = Vec::Ones(static_cast<Eigen::Index>(gen.size()));
  EXPECT_LT((gen.L() * one).lpNorm<Eigen::Infinity>(), 1e-10 * gen.norm_bound());
}

TEST(Generator, EigenMethodHasASizeLimit) {
  auto ns = NumericSystem::periodic_embedding(builtin("euclidean"));
  DiscreteGenerator gen(ns, GridSpec::over(ns, 80));
  EXPECT_FALSE(gen.eigen_allowed());
  EXPECT_THROW(gen.spectrum(), SizeLimitExceeded);
}

TEST(Smoother, PreservesMassOnPeriodicGrids) {
  auto ns = NumericSystem::periodic_embedding(builtin("euclidean"));
  auto g = GridSpec::over(ns, 16);
  Vec d = delta(g, 37);
  EXPECT_NEAR(mass(g, smooth(g, d)), 1.0, 1e-14);
}

TEST(HeatKernel, MatchesFourierOracle) {
  Plane p(32);
  FourierOracle f{32};
  for (auto method : {HeatMethod::Eigen, HeatMethod::Krylov}) {
    for (bool smoothed : {false, true}) {
      for (double t : {0.1, 0.5, 2.0}) {
        auto k = heat_kernel(p.gen, p.origin, t, method, smoothed ? Readout::Smoothed : Readout::Raw);
        for (auto [x, y] : std::vector<std::pair<double, double>>{{0, 0}, {0.5, 0}, {1, -1.25}, {3, 2}}) {
          double expect = f.kernel(x, y, heat_phi(t), smoothed);
          EXPECT_NEAR(p.at(k.values, x, y), expect, 1e-9 * std::max(1.0, expect)) << t << " " << x << " " << y;
        }
      }
    }
  }
}

TEST(HeatKernel, EuclideanOnDiagonal) {
  Plane p(64);
  KernelFamily fam(p.gen, p.origin, HeatMethod::Eigen);
  for (double t : {0.1, 0.2, 0.5, 1.0, 2.0}) {
    double h = fam.heat(t).values[static_cast<Eigen::Index>(p.origin)];
    EXPECT_NEAR(h * 4 * kPi * t, 1.0, 0.03) << t;
  }
}

TEST(HeatKernel, MassSymmetryAndSemigroup) {
  auto ns = NumericSystem::periodic_embedding(builtin("grushin"));
  DiscreteGenerator gen(ns, GridSpec::over(ns, 64));
  std::vector<double> a{0, 0}, b{1, 0.5};
  auto y1 = gen.grid().nearest(a), y2 = gen.grid().nearest(b);
  KernelFamily fam(gen, y1, HeatMethod::Eigen);
  for (double t : {0.05, 0.5, 2.0}) EXPECT_NEAR(mass(gen.grid(), fam.heat(t).values), 1.0, 1e-8);
  EXPECT_LE(symmetry_defect(gen, y1, y2, 0.5, HeatMethod::Eigen), 1e-8);
  Vec f = smooth(gen.grid(), delta(gen.grid(), y1));
  Vec twice = heat_apply(gen, heat_apply(gen, f, 0.25, HeatMethod::Eigen), 0.25, HeatMethod::Eigen);
  Vec once = heat_apply(gen, f, 0.5, HeatMethod::Eigen);
  EXPECT_LE((twice - once).norm() / once.norm(), 1e-6);
}

TEST(HeatKernel, MethodsAgree) {
  auto ns = NumericSystem::periodic_embedding(builtin("torus_sin"));
  DiscreteGenerator gen(ns, GridSpec::over(ns, 32));
  std::vector<double> o{1, 0};
  auto y = gen.grid().nearest(o);
  auto e = heat_kernel(gen, y, 0.5, HeatMethod::Eigen);
  auto k = heat_kernel(gen, y, 0.5, HeatMethod::Krylov);
  auto m = heat_kernel(gen, y, 0.5, HeatMethod::ImplicitMidpoint);
  double scale = e.values.cwiseAbs().maxCoeff();
  EXPECT_LE((k.values - e.values).cwiseAbs().maxCoeff() / scale, 1e-8);
  EXPECT_LE((m.values - e.values).cwiseAbs().maxCoeff() / scale, 1e-3);
  EXPECT_THROW(heat_kernel(gen, y, -1, HeatMethod::Eigen), std::invalid_argument);
}

TEST(Subordination, ScalarQuadratureReproducesPoissonSymbol) {
  SubordinationQuadrature q;
  auto u = q.nodes();
  for (double t : {0.25, 1.0, 3.0})
    for (double lam : {0.0, 1.0, 100.0, 1e4}) {
      double s = 0;
      for (std::size_t i = 0; i < u.size(); ++i)
        s += q.weight(u[i], i == 0 || i + 1 == u.size()) * std::exp(-t * t / (4 * std::exp(u[i])) * lam);
      EXPECT_NEAR(s, std::exp(-t * std::sqrt(lam)), 1e-8) << t << " " << lam;
    }
  EXPECT_LT(q.tail_bound(), 1e-8);
}

TEST(Subordination, MatchesSpectralPoisson) {
  Plane p(32);
  for (double t : {0.25, 1.0}) {
    auto s = poisson_subordination(p.gen, p.origin, t, HeatMethod::Eigen);
    auto e = poisson_spectral(p.gen, p.origin, t);
    EXPECT_LE((s.values - e.values).cwiseAbs().maxCoeff() / e.values.cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_NEAR(mass(p.gen.grid(), e.values), 1.0, 1e-8);
    FourierOracle f{32};
    EXPECT_NEAR(p.at(e.values, 0.5, 0.5), f.kernel(0.5, 0.5, poisson_phi(t), true), 1e-9);
  }
  EXPECT_THROW(poisson_subordination(p.gen, p.origin, 0, HeatMethod::Eigen), std::invalid_argument);
}

TEST(Poisson, EuclideanClosedForm) {
  Plane p(128);
  KernelFamily fam(p.gen, p.origin, HeatMethod::Krylov);
  for (double t : {0.5, 1.0}) {
    Vec v = fam.poisson(t).values;
    for (auto [x, y] : std::vector<std::pair<double, double>>{{0, 0}, {0.5, 0}, {1, 1}, {0, 2}}) {
      double c = poisson_closed(t, x, y);
      EXPECT_NEAR(p.at(v, x, y) / c, 1.0, 0.03) << t << " " << x << " " << y;
    }
  }
}

TEST(Gradient, SquaredDifferencesOfALinearFunction) {
  Plane p(32);
  const auto& g = p.gen.grid();
  Vec f(static_cast<Eigen::Index>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) f[static_cast<Eigen::Index>(i)] = 3 * g.point(i)[0] - g.point(i)[1];
  Vec gs = grad_sq(p.gen, f);
  EXPECT_NEAR(p.at(gs, 0, 0), 10.0, 1e-9);
}
