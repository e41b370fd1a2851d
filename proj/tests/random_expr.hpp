// Seeded generators for property tests.
#ifndef GRUSHIN_TESTS_RANDOM_EXPR_HPP
#define GRUSHIN_TESTS_RANDOM_EXPR_HPP

#include "grushin/expr.hpp"
#include "grushin/fields.hpp"

#include <optional>
#include <random>

namespace grushin::gen {

// Small-degree real trig polynomial: sums of c * x^alpha * {1, cos, sin}(a.x).
// Variable `skip` (if set) does not appear.
inline Expr random_expr(std::mt19937_64& rng, std::size_t n, int max_terms = 3, int max_deg = 2,
                        std::optional<std::size_t> skip = std::nullopt) {
  std::uniform_int_distribution<int> nterms(0, max_terms);
  std::uniform_int_distribution<int> deg(0, max_deg);
  std::uniform_int_distribution<int> coef(-4, 4);
  std::uniform_int_distribution<int> den(1, 3);
  std::uniform_int_distribution<int> freq(-2, 2);
  std::uniform_int_distribution<int> kind(0, 2);
  Expr e(n);
  int t = nterms(rng);
  for (int i = 0; i < t; ++i) {
    Expr term = Expr::constant(n, Rational(coef(rng), den(rng)));
    for (std::size_t v = 0; v < n; ++v) {
      unsigned d = static_cast<unsigned>(deg(rng));
      if (v != skip) term = term * Expr::variable(n, v).pow(d);
    }
    int k = kind(rng);
    if (k > 0) {
      std::vector<Rational> a;
      for (std::size_t v = 0; v < n; ++v) a.push_back(v == skip ? Rational(0) : Rational(freq(rng), den(rng)));
      term = term * (k == 1 ? Expr::cosine(a) : Expr::sine(a));
    }
    e += term;
  }
  return e;
}

inline VectorField random_field(std::mt19937_64& rng, std::size_t n) {
  std::vector<Expr> c;
  for (std::size_t j = 0; j < n; ++j) c.push_back(random_expr(rng, n, 2, 2));
  return VectorField(std::move(c));
}

// Divergence-free: sum_j a_j(x_{!=j}) d_j.
inline VectorField random_divfree_field(std::mt19937_64& rng, std::size_t n) {
  std::vector<Expr> c;
  for (std::size_t j = 0; j < n; ++j) c.push_back(random_expr(rng, n, 2, 2, j));
  return VectorField(std::move(c));
}

}  // namespace grushin::gen

#endif
