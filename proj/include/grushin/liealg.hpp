#ifndef GRUSHIN_LIEALG_HPP
#define GRUSHIN_LIEALG_HPP

#include "grushin/fields.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace grushin {

/// Exact incremental row reduction over Q for sparse vectors indexed by Key.
/// Each stored row keeps its expression in terms of the inserted vectors, so
/// reduce() returns coordinates with respect to the inserted basis.
template <typename Key>
class RationalSpan {
 public:
  using Vec = std::map<Key, Rational>;

  struct Reduction {
    std::vector<Rational> coords;  // w.r.t. inserted vectors
    Vec remainder;
  };

  std::size_t dim() const { return rows_.size(); }

  Reduction reduce(const Vec& v) const {
    Reduction r{std::vector<Rational>(rows_.size(), Rational(0)), v};
    for (std::size_t j = 0; j < rows_.size(); ++j) {
      auto it = r.remainder.find(pivots_[j]);
      if (it == r.remainder.end()) continue;
      Rational c = it->second;  // rows are normalized to pivot 1
      axpy(r.remainder, -c, rows_[j]);
      for (std::size_t k = 0; k < transforms_[j].size(); ++k) r.coords[k] += c * transforms_[j][k];
    }
    return r;
  }

  bool contains(const Vec& v) const { return reduce(v).remainder.empty(); }

  /// Inserts v (whose reduction is r) as basis vector number dim().
  void insert(const Reduction& r) {
    if (r.remainder.empty()) throw std::logic_error("RationalSpan: inserting a dependent vector");
    const std::size_t m = rows_.size();
    const Rational pivot_value = r.remainder.begin()->second;
    Vec row;
    for (const auto& [k, c] : r.remainder) row.emplace(k, c / pivot_value);
    // remainder = b_m - sum_k coords_k b_k
    std::vector<Rational> t(m + 1, Rational(0));
    for (std::size_t k = 0; k < m; ++k) t[k] = -r.coords[k] / pivot_value;
    t[m] = Rational(1) / pivot_value;
    for (auto& tr : transforms_) tr.emplace_back(0);
    pivots_.push_back(r.remainder.begin()->first);
    rows_.push_back(std::move(row));
    transforms_.push_back(std::move(t));
  }

  /// Inserts v if independent; returns whether it was.
  bool try_insert(const Vec& v) {
    auto r = reduce(v);
    if (r.remainder.empty()) return false;
    insert(r);
    return true;
  }

 private:
  static void axpy(Vec& y, const Rational& a, const Vec& x) {
    for (const auto& [k, c] : x) {
      auto [it, inserted] = y.try_emplace(k, a * c);
      if (!inserted) {
        it->second += a * c;
        if (it->second == 0) y.erase(it);
      }
    }
  }

  std::vector<Vec> rows_;
  std::vector<Key> pivots_;
  std::vector<std::vector<Rational>> transforms_;
};

/// (component, term key, 0 = real part / 1 = imaginary part)
using FieldCoordinate = std::tuple<std::size_t, TermKey, int>;

inline std::map<FieldCoordinate, Rational> field_coordinates(const VectorField& x) {
  std::map<FieldCoordinate, Rational> v;
  for (std::size_t j = 0; j < x.dim(); ++j) {
    for (const auto& [k, c] : x[j].terms()) {
      if (c.re != 0) v.emplace(FieldCoordinate{j, k, 0}, c.re);
      if (c.im != 0) v.emplace(FieldCoordinate{j, k, 1}, c.im);
    }
  }
  return v;
}

/// C[i][j][m]: [b_i, b_j] = sum_m C[i][j][m] b_m
using StructureConstants = std::vector<std::vector<std::vector<Rational>>>;

enum class ClosureStatus { Closed, BudgetExceededDim, BudgetExceededDepth };

inline const char* to_string(ClosureStatus s) {
  switch (s) {
    case ClosureStatus::Closed: return "Closed";
    case ClosureStatus::BudgetExceededDim: return "BudgetExceeded(max_dim)";
    case ClosureStatus::BudgetExceededDepth: return "BudgetExceeded(max_depth)";
  }
  return "?";
}

struct ClosureResult {
  std::vector<VectorField> basis;
  std::vector<int> bracket_depth;
  StructureConstants structure;
  std::vector<std::vector<Rational>> generator_coords;
  ClosureStatus status = ClosureStatus::Closed;

  std::size_t dim() const { return basis.size(); }
  bool closed() const { return status == ClosureStatus::Closed; }

  /// Builds an abstract result from structure constants alone (no fields).
  static ClosureResult from_structure(StructureConstants c) {
    ClosureResult r;
    r.structure = std::move(c);
    r.basis.resize(r.structure.size());
    r.bracket_depth.assign(r.structure.size(), 1);
    return r;
  }
};

struct ClosureBudget {
  std::size_t max_dim = 64;
  int max_depth = 12;
};

/// Breadth-first bracket saturation with exact reduction over the
/// coefficient coordinates. Pairs are processed in order of total depth, so
/// every basis element is first produced at its minimal nesting depth.
inline ClosureResult close(const FieldSystem& system, ClosureBudget budget = {}) {
  if (budget.max_dim < system.size()) throw std::invalid_argument("close: max_dim < number of generators");
  if (budget.max_depth < 1) throw std::invalid_argument("close: max_depth must be >= 1");

  ClosureResult out;
  RationalSpan<FieldCoordinate> span;
  using Coeffs = std::vector<Rational>;
  std::map<std::pair<std::size_t, std::size_t>, Coeffs> bracket_coeffs;

  for (const auto& g : system.fields()) {
    if (g.dim() != system.dim()) throw std::invalid_argument("close: dimension mismatch");
    auto r = span.reduce(field_coordinates(g));
    if (!r.remainder.empty()) {
      span.insert(r);
      out.basis.push_back(g);
      out.bracket_depth.push_back(1);
    }
  }

  auto finish = [&](ClosureStatus status) {
    const std::size_t d = out.basis.size();
    out.status = status;
    out.structure.assign(d, std::vector<std::vector<Rational>>(d, std::vector<Rational>(d, Rational(0))));
    for (const auto& [ij, coeffs] : bracket_coeffs) {
      auto [i, j] = ij;
      for (std::size_t m = 0; m < coeffs.size() && m < d; ++m) {
        out.structure[i][j][m] = coeffs[m];
        out.structure[j][i][m] = -coeffs[m];
      }
    }
    for (const auto& g : system.fields()) {
      auto r = span.reduce(field_coordinates(g));
      r.coords.resize(d, Rational(0));
      out.generator_coords.push_back(std::move(r.coords));
    }
    return out;
  };

  for (;;) {
    // next unprocessed pair of minimal total depth
    std::optional<std::pair<std::size_t, std::size_t>> next;
    int best = 0;
    for (std::size_t i = 0; i < out.basis.size(); ++i) {
      for (std::size_t j = i + 1; j < out.basis.size(); ++j) {
        if (bracket_coeffs.count({i, j})) continue;
        int depth = out.bracket_depth[i] + out.bracket_depth[j];
        if (!next || depth < best) {
          next = std::make_pair(i, j);
          best = depth;
        }
      }
    }
    if (!next) return finish(ClosureStatus::Closed);

    auto [i, j] = *next;
    VectorField b = bracket(out.basis[i], out.basis[j]);
    auto r = span.reduce(field_coordinates(b));
    if (r.remainder.empty()) {
      bracket_coeffs[{i, j}] = std::move(r.coords);
      continue;
    }
    if (best > budget.max_depth) return finish(ClosureStatus::BudgetExceededDepth);
    if (out.basis.size() >= budget.max_dim) return finish(ClosureStatus::BudgetExceededDim);
    Coeffs unit(out.basis.size() + 1, Rational(0));
    unit.back() = 1;
    span.insert(r);
    out.basis.push_back(std::move(b));
    out.bracket_depth.push_back(best);
    bracket_coeffs[{i, j}] = std::move(unit);
  }
}

/// Recombines sum_m C[i][j][m] b_m as a vector field.
inline VectorField combine(const std::vector<VectorField>& basis, const std::vector<Rational>& coeffs) {
  VectorField out = VectorField::zero(basis.front().dim());
  for (std::size_t m = 0; m < coeffs.size(); ++m)
    if (coeffs[m] != 0) out += basis[m].scaled(coeffs[m]);
  return out;
}

/// Max violation-free check of antisymmetry and the Jacobi identity of C.
inline bool structure_is_lie(const StructureConstants& c) {
  const std::size_t d = c.size();
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t m = 0; m < d; ++m)
        if (c[i][j][m] != -c[j][i][m]) return false;
  // sum_l C[j][k][l] C[i][l][m] + C[k][i][l] C[j][l][m] + C[i][j][l] C[k][l][m] = 0
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t k = 0; k < d; ++k)
        for (std::size_t m = 0; m < d; ++m) {
          Rational s = 0;
          for (std::size_t l = 0; l < d; ++l)
            s += c[j][k][l] * c[i][l][m] + c[k][i][l] * c[j][l][m] + c[i][j][l] * c[k][l][m];
          if (s != 0) return false;
        }
  return true;
}

struct Nilpotency {
  bool nilpotent = false;
  int step = 0;                          // valid when nilpotent
  std::vector<std::size_t> series_dims;  // dims of g^(1), g^(2), ...
};

/// Lower central series g^(1) = g, g^(j+1) = [g, g^(j)] computed from C.
inline Nilpotency nilpotency(const ClosureResult& c) {
  if (!c.closed()) throw std::invalid_argument("nilpotency: closure did not finish");
  const std::size_t d = c.dim();
  Nilpotency out;
  using Vec = std::map<std::size_t, Rational>;
  std::vector<Vec> current;
  for (std::size_t i = 0; i < d; ++i) current.push_back(Vec{{i, Rational(1)}});
  out.series_dims.push_back(d);
  if (d == 0) {
    out.nilpotent = true;
    return out;
  }
  for (;;) {
    RationalSpan<std::size_t> span;
    std::vector<Vec> next;
    for (std::size_t i = 0; i < d; ++i) {
      for (const auto& v : current) {
        Vec w;
        for (const auto& [j, vj] : v)
          for (std::size_t m = 0; m < d; ++m)
            if (c.structure[i][j][m] != 0) {
              Rational& slot = w[m];
              slot += vj * c.structure[i][j][m];
              if (slot == 0) w.erase(m);
            }
        if (!w.empty() && span.try_insert(w)) next.push_back(std::move(w));
      }
    }
    out.series_dims.push_back(next.size());
    if (next.empty()) {
      out.nilpotent = true;
      out.step = static_cast<int>(out.series_dims.size()) - 1;
      return out;
    }
    if (next.size() == current.size()) return out;  // stabilized at a nonzero ideal
    current = std::move(next);
  }
}

/// ad(sum_i xi_i b_i) as a dense matrix: column j is [X, b_j].
inline Eigen::MatrixXd ad_matrix(const StructureConstants& c, const std::vector<Rational>& xi) {
  const std::size_t d = c.size();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) {
    if (xi[i] == 0) continue;
    double w = to_double(xi[i]);
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t m = 0; m < d; ++m)
        if (c[i][j][m] != 0) a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j)) += w * to_double(c[i][j][m]);
  }
  return a;
}

struct TypeRVerdict {
  enum class Kind { NilpotentHence, SampledPass, Counterexample };
  Kind kind = Kind::NilpotentHence;
  int n_samples = 0;  // random samples drawn (basis unit vectors are extra)
  double tolerance = 0;
  double max_real_part = 0;
  std::vector<Rational> witness;  // Counterexample: coordinates of X
  std::complex<double> eigenvalue;

  bool passed() const { return kind != Kind::Counterexample; }
};

inline const char* to_string(TypeRVerdict::Kind k) {
  switch (k) {
    case TypeRVerdict::Kind::NilpotentHence: return "NilpotentHence";
    case TypeRVerdict::Kind::SampledPass: return "SampledPass";
    case TypeRVerdict::Kind::Counterexample: return "Counterexample";
  }
  return "?";
}

inline std::vector<std::complex<double>> ad_eigenvalues(const StructureConstants& c,
                                                        const std::vector<Rational>& xi) {
  Eigen::MatrixXd a = ad_matrix(c, xi);
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  std::vector<std::complex<double>> out;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) out.push_back(es.eigenvalues()(i));
  return out;
}

/// Type (R): every ad(X) has purely imaginary spectrum. Exact for nilpotent
/// algebras; otherwise basis vectors plus n_samples random rational X.
inline TypeRVerdict type_r(const ClosureResult& c, int n_samples = 200, double tol = 1e-9,
                           std::uint64_t seed = 1) {
  if (!c.closed()) throw std::invalid_argument("type_r: closure did not finish");
  TypeRVerdict v;
  v.tolerance = tol;
  if (nilpotency(c).nilpotent) return v;

  const std::size_t d = c.dim();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> num(-20, 20);
  std::uniform_int_distribution<int> den(1, 10);

  auto check = [&](const std::vector<Rational>& xi) {
    Eigen::MatrixXd a = ad_matrix(c.structure, xi);
    Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
    const double bound = tol * (1.0 + a.norm());
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      std::complex<double> lam = es.eigenvalues()(i);
      v.max_real_part = std::max(v.max_real_part, std::abs(lam.real()));
      if (std::abs(lam.real()) > bound) {
        v.kind = TypeRVerdict::Kind::Counterexample;
        v.witness = xi;
        v.eigenvalue = lam;
        return false;
      }
    }
    return true;
  };

  for (std::size_t i = 0; i < d; ++i) {
    std::vector<Rational> e(d, Rational(0));
    e[i] = 1;
    if (!check(e)) return v;
  }
  for (int s = 0; s < n_samples; ++s) {
    std::vector<Rational> xi;
    xi.reserve(d);
    for (std::size_t i = 0; i < d; ++i) xi.push_back(Rational(num(rng), den(rng)));
    v.n_samples = s + 1;
    if (!check(xi)) return v;
  }
  v.kind = TypeRVerdict::Kind::SampledPass;
  return v;
}

struct HormanderVerdict {
  bool passed = true;
  std::size_t min_rank = 0;
  std::size_t points_checked = 0;
  std::size_t exact_points = 0;
  std::vector<double> rank_drop_point;  // empty unless !passed
};

/// Rank of the k x d matrix of basis fields at x; exact when every
/// coefficient can be evaluated exactly at x.
inline std::size_t rank_at(const std::vector<VectorField>& basis, const std::vector<Rational>& x, bool* exact = nullptr) {
  const std::size_t k = x.size();
  bool all_exact = true;
  std::vector<std::vector<Rational>> cols;
  for (const auto& b : basis) {
    std::vector<Rational> col;
    for (std::size_t j = 0; j < k && all_exact; ++j) {
      auto v = b[j].eval_exact(x);
      if (!v) all_exact = false;
      else col.push_back(*v);
    }
    if (!all_exact) break;
    cols.push_back(std::move(col));
  }
  if (exact) *exact = all_exact;
  if (all_exact) {
    RationalSpan<std::size_t> span;
    for (const auto& col : cols) {
      std::map<std::size_t, Rational> v;
      for (std::size_t j = 0; j < k; ++j)
        if (col[j] != 0) v.emplace(j, col[j]);
      if (!v.empty()) span.try_insert(v);
    }
    return span.dim();
  }
  std::vector<double> xd;
  for (const auto& r : x) xd.push_back(to_double(r));
  Eigen::MatrixXd m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = 0; j < k; ++j)
      m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = basis[i][j].eval(xd);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0) return 0;
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > 1e-9 * std::max(1.0, s(0))) ++r;
  return r;
}

/// Pointwise Hormander check at the given points and n_random rational
/// points (denominator 64) drawn from the domain window.
inline HormanderVerdict hormander(const ClosureResult& c, const FieldSystem& system,
                                  const std::vector<std::vector<Rational>>& points, int n_random = 20,
                                  std::uint64_t seed = 1) {
  if (!c.closed()) throw std::invalid_argument("hormander: closure did not finish");
  std::vector<std::vector<Rational>> all = points;
  std::mt19937_64 rng(seed);
  const std::size_t k = system.dim();
  for (int s = 0; s < n_random; ++s) {
    std::vector<Rational> p;
    for (std::size_t a = 0; a < k; ++a) {
      auto [lo, hi] = domain_extent(system.domain(), a);
      auto nlo = static_cast<long long>(std::ceil(lo * 64));
      auto nhi = static_cast<long long>(std::floor(hi * 64)) - 1;
      std::uniform_int_distribution<long long> u(nlo, nhi);
      p.emplace_back(Rational(u(rng), 64));
    }
    all.push_back(std::move(p));
  }
  HormanderVerdict v;
  v.min_rank = k;
  for (const auto& p : all) {
    if (p.size() != k) throw std::invalid_argument("hormander: point has wrong dimension");
    bool exact = false;
    std::size_t r = rank_at(c.basis, p, &exact);
    ++v.points_checked;
    if (exact) ++v.exact_points;
    v.min_rank = std::min(v.min_rank, r);
    if (r < k) {
      v.passed = false;
      for (const auto& q : p) v.rank_drop_point.push_back(to_double(q));
      return v;
    }
  }
  return v;
}

}  // namespace grushin

#endif  // GRUSHIN_LIEALG_HPP
