// Floating-point evaluation of systems, including the periodic embedding of
// box systems used by the heat solver.
#ifndef GRUSHIN_NUMERIC_HPP
#define GRUSHIN_NUMERIC_HPP

#include "grushin/fields.hpp"

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace grushin {

/// Real part of an Expr as a flat list of (monomial, cos, sin) terms.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  explicit CompiledExpr(const Expr& e) : num_vars_(e.num_vars()) {
    for (const auto& [k, c] : e.terms()) {
      Term t;
      t.alpha = k.alpha;
      if (k.has_zero_frequency()) {
        t.cos_coef = to_double(c.re);
      } else if (k.is_positive_frequency()) {
        for (const auto& f : k.freq) t.freq.push_back(to_double(f));
        t.cos_coef = 2 * to_double(c.re);
        t.sin_coef = -2 * to_double(c.im);
      } else {
        continue;
      }
      terms_.push_back(std::move(t));
    }
  }

  bool is_zero() const { return terms_.empty(); }

  double operator()(const double* x) const {
    double sum = 0;
    for (const auto& t : terms_) {
      double m = 1;
      for (std::size_t i = 0; i < t.alpha.size(); ++i)
        for (int p = 0; p < t.alpha[i]; ++p) m *= x[i];
      if (t.freq.empty()) {
        sum += t.cos_coef * m;
      } else {
        double th = 0;
        for (std::size_t i = 0; i < t.freq.size(); ++i) th += t.freq[i] * x[i];
        sum += m * (t.cos_coef * std::cos(th) + t.sin_coef * std::sin(th));
      }
    }
    return sum;
  }

  double operator()(std::span<const double> x) const { return (*this)(x.data()); }

 private:
  struct Term {
    std::vector<int> alpha;
    std::vector<double> freq;  // empty for the zero frequency
    double cos_coef = 0;
    double sin_coef = 0;
  };
  std::size_t num_vars_ = 0;
  std::vector<Term> terms_;
};

/// C^1 periodic coordinate fold on [m - L, m + L): identity on the core
/// |x - m| <= c, cubic Hermite return from m + c to m - c (both slopes 1) on
/// the complement.
struct Fold {
  double center = 0;
  double half = 1;
  double core = 0.75;

  double operator()(double x) const {
    const double period = 2 * half;
    double u = x - center;
    u -= period * std::floor((u + half) / period);
    if (std::abs(u) <= core) return center + u;
    double v = u > core ? u : u + period;
    double w = period - 2 * core;
    double s = (v - core) / w;
    double s2 = s * s, s3 = s2 * s;
    double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
    double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
    return center + h00 * core + h10 * w - h01 * core + h11 * w;
  }
};

/// Field values as dense columns, with per-axis periodicity and optional folds.
class NumericSystem {
 public:
  explicit NumericSystem(const FieldSystem& s) : dim_(s.dim()), n_(s.size()) {
    for (std::size_t a = 0; a < dim_; ++a) {
      auto [lo, hi] = domain_extent(s.domain(), a);
      lo_.push_back(lo);
      hi_.push_back(hi);
      periodic_.push_back(is_torus(s.domain()));
    }
    folds_.assign(dim_, std::nullopt);
    for (const auto& f : s.fields()) {
      std::vector<CompiledExpr> comps;
      for (std::size_t j = 0; j < dim_; ++j) comps.emplace_back(f[j]);
      fields_.push_back(std::move(comps));
      shear_.push_back(f.shear_axis());
      drift_.emplace_back();
      VectorField d = self_derivative(f);
      for (std::size_t j = 0; j < dim_; ++j) drift_.back().emplace_back(d[j]);
      drift_zero_.push_back(d.is_zero());
    }
  }

  /// Box systems become periodic on the same box, with every coordinate fed
  /// to the coefficients through a Fold whose core is `core_fraction` of the
  /// half-width. Tori are returned unchanged.
  static NumericSystem periodic_embedding(const FieldSystem& s, double core_fraction = 0.75) {
    if (core_fraction <= 0 || core_fraction >= 1)
      throw std::invalid_argument("periodic_embedding: core_fraction must be in (0,1)");
    NumericSystem ns(s);
    if (is_torus(s.domain())) return ns;
    for (std::size_t a = 0; a < ns.dim_; ++a) {
      double half = (ns.hi_[a] - ns.lo_[a]) / 2;
      ns.folds_[a] = Fold{(ns.hi_[a] + ns.lo_[a]) / 2, half, core_fraction * half};
      ns.periodic_[a] = true;
    }
    return ns;
  }

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return n_; }
  double lo(std::size_t a) const { return lo_[a]; }
  double hi(std::size_t a) const { return hi_[a]; }
  bool periodic(std::size_t a) const { return periodic_[a]; }
  bool folded() const {
    for (const auto& f : folds_)
      if (f) return true;
    return false;
  }
  const std::optional<Fold>& fold(std::size_t a) const { return folds_[a]; }
  std::optional<std::size_t> shear_axis(std::size_t i) const { return shear_[i]; }

  /// Points where folded coefficients coincide with the original ones.
  bool in_core(std::span<const double> x) const {
    for (std::size_t a = 0; a < dim_; ++a)
      if (folds_[a] && std::abs(x[a] - folds_[a]->center) > folds_[a]->core) return false;
    return true;
  }

  /// A(x): dim x size, column i = X_i(x). `out` has dim*size entries, row-major.
  void field_matrix(const double* x, double* out) const {
    const double* q = argument(x);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < dim_; ++j) out[j * n_ + i] = fields_[i][j](q);
  }

  double component(std::size_t field, std::size_t axis, const double* x) const {
    return fields_[field][axis](argument(x));
  }
  bool component_is_zero(std::size_t field, std::size_t axis) const {
    return fields_[field][axis].is_zero();
  }

  /// sum_i (X_i . grad) X_i, the Ito correction for the sqrt(2) scaling.
  void drift(const double* x, double* out) const {
    const double* q = argument(x);
    for (std::size_t j = 0; j < dim_; ++j) out[j] = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (drift_zero_[i]) continue;
      for (std::size_t j = 0; j < dim_; ++j) out[j] += drift_[i][j](q);
    }
  }
  bool drift_is_zero() const {
    for (bool z : drift_zero_)
      if (!z) return false;
    return true;
  }

 private:
  const double* argument(const double* x) const {
    if (!folded()) return x;
    thread_local std::vector<double> buf;
    buf.assign(x, x + dim_);
    for (std::size_t a = 0; a < dim_; ++a)
      if (folds_[a]) buf[a] = (*folds_[a])(x[a]);
    return buf.data();
  }

  std::size_t dim_;
  std::size_t n_;
  std::vector<double> lo_, hi_;
  std::vector<bool> periodic_;
  std::vector<std::optional<Fold>> folds_;
  std::vector<std::vector<CompiledExpr>> fields_;
  std::vector<std::optional<std::size_t>> shear_;
  std::vector<std::vector<CompiledExpr>> drift_;
  std::vector<bool> drift_zero_;
};

}  // namespace grushin

#endif  // GRUSHIN_NUMERIC_HPP
