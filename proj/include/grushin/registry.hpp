#ifndef GRUSHIN_REGISTRY_HPP
#define GRUSHIN_REGISTRY_HPP

#include "grushin/expr_parser.hpp"
#include "grushin/fields.hpp"

#include <string>
#include <vector>

namespace grushin {

struct BuiltinParams {
  int k = 1;                        // grushin exponent
  std::vector<std::string> omegas;  // poly_omega / multi_omega polynomials in x1
  int n = 2;                        // euclidean dimension
};

/// A registry system plus curated points for the Hormander certificate
/// (degeneracy sets such as x1 = 0 or x1^2 + x2^2 = 1).
struct BuiltinSystem {
  FieldSystem system;
  std::vector<std::vector<Rational>> certificate_points;
};

class UnknownBuiltin : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline Box square_box(std::size_t dim, double half) {
  return Box{std::vector<double>(dim, -half), std::vector<double>(dim, half)};
}

inline std::vector<Rational> rpoint(std::initializer_list<long long> xs) {
  std::vector<Rational> p;
  for (auto x : xs) p.emplace_back(x);
  return p;
}

inline Expr parse_omega(const std::string& text) {
  Expr w = parse_expr(text, 2);
  if (w.is_zero()) throw SystemError("omega must be a nonzero polynomial");
  if (!w.is_polynomial() || w.depends_on(1))
    throw SystemError("omega must be a polynomial in x1 alone");
  return w;
}

}  // namespace detail

inline const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names{"euclidean", "grushin",      "poly_omega", "multi_omega",
                                              "circle3d",  "motion_plane", "torus_sin"};
  return names;
}

inline BuiltinSystem builtin_entry(const std::string& name, const BuiltinParams& p = {}) {
  using detail::rpoint;
  if (name == "euclidean") {
    if (p.n < 1) throw SystemError("euclidean: n must be >= 1");
    std::size_t n = static_cast<std::size_t>(p.n);
    std::vector<VectorField> fs;
    for (std::size_t j = 0; j < n; ++j)
      fs.push_back(VectorField::along(n, j, Expr::constant(n, 1), "d" + std::to_string(j + 1)));
    std::vector<Rational> origin(n, Rational(0));
    return {FieldSystem(n, std::move(fs), detail::square_box(n, 4), "euclidean"), {origin}};
  }
  if (name == "grushin") {
    if (p.k < 1) throw SystemError("grushin: k must be >= 1");
    Expr w = Expr::variable(2, 0).pow(static_cast<unsigned>(p.k));
    std::vector<VectorField> fs{VectorField::along(2, 0, Expr::constant(2, 1), "d1"),
                                VectorField::along(2, 1, w, "x1^" + std::to_string(p.k) + " d2")};
    return {FieldSystem(2, std::move(fs), detail::square_box(2, 4), "grushin(" + std::to_string(p.k) + ")"),
            {rpoint({0, 0}), rpoint({0, 1}), rpoint({1, 0})}};
  }
  if (name == "poly_omega" || name == "multi_omega") {
    if (p.omegas.empty()) throw SystemError(name + ": at least one omega required");
    if (name == "poly_omega" && p.omegas.size() != 1) throw SystemError("poly_omega takes one omega");
    std::vector<VectorField> fs{VectorField::along(2, 0, Expr::constant(2, 1), "d1")};
    for (const auto& w : p.omegas) fs.push_back(VectorField::along(2, 1, detail::parse_omega(w), w + " d2"));
    return {FieldSystem(2, std::move(fs), detail::square_box(2, 4), name),
            {rpoint({0, 0}), rpoint({1, 0}), rpoint({-1, 0})}};
  }
  if (name == "circle3d") {
    Expr r2m1 = parse_expr("x1^2 + x2^2 - 1", 3);
    std::vector<VectorField> fs{VectorField::along(3, 0, Expr::constant(3, 1), "d1"),
                                VectorField::along(3, 1, Expr::constant(3, 1), "d2"),
                                VectorField::along(3, 2, r2m1, "(x1^2+x2^2-1) d3")};
    return {FieldSystem(3, std::move(fs), detail::square_box(3, 2), "circle3d"),
            {rpoint({1, 0, 0}), rpoint({0, 1, 0}), rpoint({-1, 0, 0}), rpoint({0, 0, 0})}};
  }
  if (name == "motion_plane") {
    std::vector<VectorField> fs{VectorField::along(2, 0, Expr::constant(2, 1), "d1"),
                                VectorField::along(2, 1, parse_expr("sin(x1)", 2), "sin(x1) d2")};
    return {FieldSystem(2, std::move(fs), detail::square_box(2, 4), "motion_plane"), {rpoint({0, 0})}};
  }
  if (name == "torus_sin") {
    std::vector<VectorField> fs{VectorField::along(2, 0, Expr::constant(2, 1), "d1"),
                                VectorField::along(2, 1, parse_expr("sin(x1)", 2), "sin(x1) d2")};
    return {FieldSystem(2, std::move(fs), Torus{{Rational(2), Rational(2)}}, "torus_sin"), {rpoint({0, 0})}};
  }
  throw UnknownBuiltin("unknown builtin system '" + name + "'");
}

inline FieldSystem builtin(const std::string& name, const BuiltinParams& p = {}) {
  return builtin_entry(name, p).system;
}

}  // namespace grushin

#endif  // GRUSHIN_REGISTRY_HPP
