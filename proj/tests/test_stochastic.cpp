#include "grushin/registry.hpp"
#include "grushin/stochastic.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace grushin;

TEST(Seeds, SplitmixReferenceValue) {
  // first output of the reference generator seeded with 0
  EXPECT_EQ(splitmix64(0), 0xE220A8397B1DCDAFULL);
  EXPECT_NE(stream_seed(1, 0), stream_seed(1, 1));
  EXPECT_NE(stream_seed(1, 0), stream_seed(2, 0));
  EXPECT_EQ(stream_seed(5, 9), stream_seed(5, 9));
}

TEST(Paths, IndependentOfWorkerCount) {
  NumericSystem ns(builtin("grushin"));
  auto a = sample_paths(ns, {0.3, 0.1}, 0.5, 50, 1000, 42, 1);
  auto b = sample_paths(ns, {0.3, 0.1}, 0.5, 50, 1000, 42, 3);
  EXPECT_EQ(a.endpoints, b.endpoints);
  EXPECT_EQ(a.escaped, 0u);
  auto c = sample_paths(ns, {0.3, 0.1}, 0.5, 50, 1000, 43, 1);
  EXPECT_NE(a.endpoints, c.endpoints);
  EXPECT_THROW(sample_paths(ns, {0.0}, 0.5, 50, 10, 1), std::invalid_argument);
  EXPECT_THROW(sample_paths(ns, {0.0, 0.0}, 0.5, 0, 10, 1), std::invalid_argument);
}

TEST(Paths, EuclideanCovarianceIsTwoT) {
  NumericSystem ns(builtin("euclidean"));
  const double t = 0.5;
  auto b = sample_paths(ns, {0, 0}, t, 10, 100000, 3);
  for (int a = 0; a < 2; ++a) {
    auto m = endpoint_moment(b, [a](const double* e) { return e[a] * e[a]; });
    EXPECT_LE(std::abs(m.mean - 2 * t), 3 * m.std_error) << a;
  }
  auto c = endpoint_moment(b, [](const double* e) { return e[0] * e[1]; });
  EXPECT_LE(std::abs(c.mean), 3 * c.std_error);
}

TEST(Paths, GrushinVerticalSecondMoment) {
  // y_t = sqrt2 int x dW2 with x = sqrt2 W1: E[y^2] = 2 int_0^t 2s ds = 2 t^2
  NumericSystem ns(builtin("grushin"));
  const double t = 0.5;
  auto b = sample_paths(ns, {0, 0}, t, 400, 100000, stream_seed(1, 1));
  auto m = endpoint_moment(b, [](const double* e) { return e[1] * e[1]; });
  EXPECT_LE(std::abs(m.mean - 2 * t * t), 3 * m.std_error);
  auto x = endpoint_moment(b, [](const double* e) { return e[0] * e[0]; });
  EXPECT_LE(std::abs(x.mean - 2 * t), 3 * x.std_error);
}

TEST(Histogram, DensityHasUnitMass) {
  auto ns = NumericSystem::periodic_embedding(builtin("euclidean"));
  auto g = GridSpec::over(ns, 32);
  auto b = sample_paths(ns, {0, 0}, 0.2, 20, 5000, 9);
  Vec h = kernel_histogram(b, g);
  EXPECT_NEAR(h.sum() * g.cell_measure(), 1.0, 1e-12);
  EXPECT_EQ(total_variation(g, h, h), 0.0);
  Vec a = Vec::Zero(h.size()), c = a;
  a[0] = c[1] = 1 / g.cell_measure();
  EXPECT_NEAR(total_variation(g, a, c), 1.0, 1e-12);
}

TEST(Words, LettersActLeftToRight) {
  auto s = builtin("grushin");
  std::vector<double> x{0.25, -1};
  EXPECT_EQ(word_action(s, Word{}, x), x);
  auto one = word_action(s, Word{{{0, 0.5}}}, x);
  EXPECT_NEAR(one[0], 0.75, 1e-12);
  EXPECT_NEAR(one[1], -1, 1e-12);
  // exp(-s X2) exp(-s X1) exp(s X2) exp(s X1) from the origin lands on (0, s^2)
  const double h = 0.3;
  Word c{{{0, h}, {1, h}, {0, -h}, {1, -h}}};
  auto e = word_action(s, c, std::vector<double>{0, 0});
  EXPECT_NEAR(e[0], 0, 1e-12);
  EXPECT_NEAR(e[1], h * h, 1e-12);
  EXPECT_DOUBLE_EQ(c.length(), 4 * h);
  EXPECT_THROW(word_action(s, Word{{{2, 1.0}}}, x), std::invalid_argument);
}

TEST(Words, RandomWordsRespectTheLengthBudget) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    auto w = random_word(rng, 3, 2.0);
    EXPECT_GE(w.letters.size(), 1u);
    EXPECT_LE(w.letters.size(), 12u);
    EXPECT_LE(w.length(), 2.0 + 1e-12);
    EXPECT_GT(w.length(), 0.0);
    for (const auto& l : w.letters) EXPECT_LT(l.first, 3u);
  }
}

TEST(Transference, EuclideanWordsNeverBeatTheirLength) {
  auto r = transference_check(builtin("euclidean"), 30, 2.0, 11);
  EXPECT_EQ(r.n_words, 30u);
  EXPECT_EQ(r.n_passed, 30u);
  EXPECT_EQ(r.escapes, 0u);
  for (const auto& c : r.cases) {
    auto end = word_action(builtin("euclidean"), c.word, c.x);
    double straight = std::hypot(end[0] - c.x[0], end[1] - c.x[1]);
    EXPECT_NEAR(c.distance / straight, 1.0, 0.03);
  }
}

TEST(Transference, GrushinPassRate) {
  auto r = transference_check(builtin("grushin"), 50, 2.0, 11);
  EXPECT_EQ(r.n_passed, r.n_words);
  EXPECT_EQ(r.escapes, 0u);
  EXPECT_LE(r.max_ratio, 1.05);
}

TEST(Support, ShortWordsStayInTheBall) {
  auto r = support_check_qr(builtin("grushin"), {0, 0}, 0.5, 50, 3);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.inside, 50u);
  EXPECT_LE(r.max_distance, 0.5 * 1.05);
}
