#ifndef GRUSHIN_FIELDS_HPP
#define GRUSHIN_FIELDS_HPP

#include "grushin/expr.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace grushin {

/// A vector field sum_j a_j(x) d_j on R^k, coefficients in the Expr ring.
class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(std::vector<Expr> components, std::string label = {})
      : components_(std::move(components)), label_(std::move(label)) {
    for (const auto& c : components_)
      if (c.num_vars() != components_.size())
        throw std::invalid_argument("VectorField: component has wrong variable count");
  }

  static VectorField zero(std::size_t dim) {
    return VectorField(std::vector<Expr>(dim, Expr(dim)));
  }
  /// coefficient * d_axis
  static VectorField along(std::size_t dim, std::size_t axis, Expr coefficient,
                           std::string label = {}) {
    std::vector<Expr> comps(dim, Expr(dim));
    comps.at(axis) = std::move(coefficient);
    return VectorField(std::move(comps), std::move(label));
  }

  std::size_t dim() const { return components_.size(); }
  const Expr& operator[](std::size_t j) const { return components_[j]; }
  const std::vector<Expr>& components() const { return components_; }
  const std::string& label() const { return label_; }
  void set_label(std::string l) { label_ = std::move(l); }

  bool is_zero() const {
    for (const auto& c : components_)
      if (!c.is_zero()) return false;
    return true;
  }

  /// Axis j when the field is a(x) d_j with a independent of x_j.
  std::optional<std::size_t> shear_axis() const {
    std::optional<std::size_t> axis;
    for (std::size_t j = 0; j < components_.size(); ++j) {
      if (components_[j].is_zero()) continue;
      if (axis) return std::nullopt;
      axis = j;
    }
    if (axis && components_[*axis].depends_on(*axis)) return std::nullopt;
    return axis;
  }

  /// Applies the field to a scalar: sum_j a_j d_j f.
  Expr apply(const Expr& f) const {
    Expr out(dim());
    for (std::size_t j = 0; j < dim(); ++j)
      if (!components_[j].is_zero()) out += components_[j] * f.partial(j);
    return out;
  }

  VectorField scaled(const Rational& c) const {
    std::vector<Expr> out;
    out.reserve(dim());
    for (const auto& e : components_) out.push_back(e.scaled(c));
    return VectorField(std::move(out));
  }

  VectorField& operator+=(const VectorField& o) {
    check_same(o);
    for (std::size_t j = 0; j < dim(); ++j) components_[j] += o.components_[j];
    return *this;
  }
  VectorField& operator-=(const VectorField& o) {
    check_same(o);
    for (std::size_t j = 0; j < dim(); ++j) components_[j] -= o.components_[j];
    return *this;
  }
  friend VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
  friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }

  friend bool operator==(const VectorField& a, const VectorField& b) {
    return a.components_ == b.components_;
  }

  /// Text in the system-file syntax, e.g. "x1 d2 + 1 d1".
  std::string to_string() const {
    std::string out;
    for (std::size_t j = 0; j < dim(); ++j) {
      if (components_[j].is_zero()) continue;
      if (!out.empty()) out += " + ";
      std::string c = components_[j].to_string();
      bool compound = c.find_first_of("+-", 1) != std::string::npos;
      out += (compound ? "(" + c + ")" : c) + " d" + std::to_string(j + 1);
    }
    return out.empty() ? "0" : out;
  }

 private:
  void check_same(const VectorField& o) const {
    if (o.dim() != dim()) throw std::invalid_argument("VectorField: dimension mismatch");
  }

  std::vector<Expr> components_;
  std::string label_;
};

/// [X,Y]^j = sum_i (X^i d_i Y^j - Y^i d_i X^j)
inline VectorField bracket(const VectorField& x, const VectorField& y) {
  if (x.dim() != y.dim()) throw std::invalid_argument("bracket: dimension mismatch");
  std::vector<Expr> comps;
  comps.reserve(x.dim());
  for (std::size_t j = 0; j < x.dim(); ++j) comps.push_back(x.apply(y[j]) - y.apply(x[j]));
  return VectorField(std::move(comps));
}

inline Expr divergence(const VectorField& x) {
  Expr out(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) out += x[i].partial(i);
  return out;
}

/// Covariant self-derivative sum_j X^j d_j X, the Ito drift of X dW.
inline VectorField self_derivative(const VectorField& x) {
  std::vector<Expr> comps;
  comps.reserve(x.dim());
  for (std::size_t j = 0; j < x.dim(); ++j) comps.push_back(x.apply(x[j]));
  return VectorField(std::move(comps));
}

struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
};

/// Flat torus; each period is a rational multiple of pi.
struct Torus {
  std::vector<Rational> periods_over_pi;

  double period(std::size_t i) const {
    return to_double(periods_over_pi[i]) * std::numbers::pi;
  }
};

using Domain = std::variant<Box, Torus>;

inline std::size_t domain_dim(const Domain& d) {
  return std::visit(
      [](const auto& v) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, Box>)
          return v.lo.size();
        else
          return v.periods_over_pi.size();
      },
      d);
}

inline bool is_torus(const Domain& d) { return std::holds_alternative<Torus>(d); }

// Coordinate window used for numerics: boxes as given, tori centred at 0.
inline std::pair<double, double> domain_extent(const Domain& d, std::size_t axis) {
  if (const auto* b = std::get_if<Box>(&d)) return {b->lo[axis], b->hi[axis]};
  double p = std::get<Torus>(d).period(axis);
  return {-p / 2, p / 2};
}

class SystemError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A finite family of divergence-free vector fields on a box or flat torus,
/// with Lebesgue (resp. Haar) measure.
class FieldSystem {
 public:
  FieldSystem(std::size_t dim, std::vector<VectorField> fields, Domain domain,
              std::string name = {})
      : dim_(dim), fields_(std::move(fields)), domain_(std::move(domain)), name_(std::move(name)) {
    validate();
  }

  std::size_t dim() const { return dim_; }
  const std::vector<VectorField>& fields() const { return fields_; }
  const VectorField& field(std::size_t i) const { return fields_.at(i); }
  std::size_t size() const { return fields_.size(); }
  const Domain& domain() const { return domain_; }
  const std::string& name() const { return name_; }

  std::string to_string() const {
    std::string s = "dim = " + std::to_string(dim_) + "\n";
    if (const auto* b = std::get_if<Box>(&domain_)) {
      s += "domain = box [";
      for (std::size_t i = 0; i < dim_; ++i)
        s += (i ? "; " : "") + std::to_string(b->lo[i]) + ".." + std::to_string(b->hi[i]);
    } else {
      const auto& t = std::get<Torus>(domain_);
      s += "domain = torus [";
      for (std::size_t i = 0; i < dim_; ++i)
        s += (i ? ", " : "") + grushin::to_string(t.periods_over_pi[i]) + "pi";
    }
    s += "]\nfields = [";
    for (std::size_t i = 0; i < fields_.size(); ++i)
      s += std::string(i ? ", " : " ") + '"' + fields_[i].to_string() + '"';
    return s + " ]\n";
  }

 private:
  void validate() const {
    if (dim_ == 0) throw SystemError("system dimension must be positive");
    if (fields_.empty()) throw SystemError("system has no fields");
    if (domain_dim(domain_) != dim_) throw SystemError("domain dimension mismatch");
    if (const auto* b = std::get_if<Box>(&domain_)) {
      for (std::size_t i = 0; i < dim_; ++i)
        if (!(b->lo[i] < b->hi[i])) throw SystemError("box has empty extent on an axis");
    }
    for (std::size_t i = 0; i < fields_.size(); ++i) {
      const auto& f = fields_[i];
      if (f.dim() != dim_) throw SystemError("field " + std::to_string(i + 1) + " has wrong dimension");
      if (!divergence(f).is_zero())
        throw SystemError("field " + std::to_string(i + 1) +
                          " is not divergence-free (not skew-adjoint for the fixed measure)");
      if (const auto* t = std::get_if<Torus>(&domain_)) check_periodic(f, *t, i);
    }
  }

  void check_periodic(const VectorField& f, const Torus& t, std::size_t index) const {
    for (const auto& comp : f.components()) {
      for (const auto& [k, c] : comp.terms()) {
        for (std::size_t j = 0; j < dim_; ++j) {
          if (k.alpha[j] != 0)
            throw SystemError("field " + std::to_string(index + 1) +
                              " has polynomial dependence on a periodic variable");
          // a_j * q_j * pi must be a multiple of 2 pi
          Rational turns = k.freq[j] * t.periods_over_pi[j] / 2;
          if (denominator(turns) != 1)
            throw SystemError("field " + std::to_string(index + 1) +
                              " is not periodic with the declared torus periods");
        }
      }
    }
  }

  std::size_t dim_;
  std::vector<VectorField> fields_;
  Domain domain_;
  std::string name_;
};

class FlowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// exp(tX)x0 by `steps` classical RK4 steps; shear fields a(x_{!=j}) d_j are
/// integrated exactly.
inline std::vector<double> flow(const VectorField& x, std::span<const double> x0, double t,
                                int steps) {
  if (steps < 1) throw std::invalid_argument("flow: steps must be >= 1");
  if (x0.size() != x.dim()) throw std::invalid_argument("flow: point dimension mismatch");
  std::vector<double> p(x0.begin(), x0.end());
  if (auto axis = x.shear_axis()) {
    p[*axis] += t * x[*axis].eval(p);
    if (!std::isfinite(p[*axis])) throw FlowError("flow left the representable range");
    return p;
  }
  if (x.is_zero()) return p;
  const std::size_t n = p.size();
  auto rhs = [&](const std::vector<double>& q) {
    std::vector<double> v(n);
    for (std::size_t j = 0; j < n; ++j) v[j] = x[j].is_zero() ? 0.0 : x[j].eval(q);
    return v;
  };
  const double h = t / steps;
  std::vector<double> tmp(n);
  for (int s = 0; s < steps; ++s) {
    auto k1 = rhs(p);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = p[j] + 0.5 * h * k1[j];
    auto k2 = rhs(tmp);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = p[j] + 0.5 * h * k2[j];
    auto k3 = rhs(tmp);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = p[j] + h * k3[j];
    auto k4 = rhs(tmp);
    for (std::size_t j = 0; j < n; ++j) {
      p[j] += h / 6 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
      if (!std::isfinite(p[j])) throw FlowError("flow left the representable range");
    }
  }
  return p;
}

/// Flow with the step count doubled from 16 until endpoints move by < tol.
inline std::vector<double> flow_converged(const VectorField& x, std::span<const double> x0,
                                         double t, double tol = 1e-9) {
  int steps = 16;
  auto prev = flow(x, x0, t, steps);
  if (x.shear_axis() || x.is_zero()) return prev;
  for (int it = 0; it < 12; ++it) {
    steps *= 2;
    auto next = flow(x, x0, t, steps);
    double diff = 0;
    for (std::size_t j = 0; j < next.size(); ++j) diff = std::max(diff, std::abs(next[j] - prev[j]));
    prev = std::move(next);
    if (diff < tol) break;
  }
  return prev;
}

}  // namespace grushin

#endif  // GRUSHIN_FIELDS_HPP
