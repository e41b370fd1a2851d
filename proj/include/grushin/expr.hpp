#ifndef GRUSHIN_EXPR_HPP
#define GRUSHIN_EXPR_HPP

#include "grushin/rational.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace grushin {

/// Coordinates of one monomial x^alpha * exp(i <freq, x>).
struct TermKey {
  std::vector<int> alpha;
  std::vector<Rational> freq;

  friend bool operator<(const TermKey& a, const TermKey& b) {
    if (a.alpha != b.alpha) return a.alpha < b.alpha;
    return std::lexicographical_compare(a.freq.begin(), a.freq.end(),
                                        b.freq.begin(), b.freq.end());
  }
  friend bool operator==(const TermKey& a, const TermKey& b) {
    return a.alpha == b.alpha && a.freq == b.freq;
  }

  bool has_zero_frequency() const {
    for (const auto& f : freq)
      if (f != 0) return false;
    return true;
  }
  // The representative of a conjugate pair: first nonzero frequency positive.
  bool is_positive_frequency() const {
    for (const auto& f : freq)
      if (f != 0) return f > 0;
    return false;
  }
  TermKey negated_frequency() const {
    TermKey k = *this;
    for (auto& f : k.freq) f = -f;
    return k;
  }
};

/// Real-valued trigonometric polynomial in canonical form.
///
/// Stored as a sum c * x^alpha * exp(i <a, x>) with exact complex rational
/// coefficients c and rational frequency vectors a. Zero coefficients are
/// never stored, and the coefficient at (alpha, -a) is the conjugate of the
/// one at (alpha, a), so the represented function is real. Two Exprs are
/// equal as functions iff their term maps are equal.
///
/// Variable indices in this API are 0-based; the text syntax uses x1, x2, ...
class Expr {
 public:
  using TermMap = std::map<TermKey, ComplexRational>;

  Expr() = default;
  explicit Expr(std::size_t num_vars) : num_vars_(num_vars) {}

  static Expr constant(std::size_t num_vars, const Rational& c) {
    Expr e(num_vars);
    e.add_term(e.zero_key(), {c, 0});
    return e;
  }

  static Expr variable(std::size_t num_vars, std::size_t i) {
    check_index(num_vars, i);
    Expr e(num_vars);
    TermKey k = e.zero_key();
    k.alpha[i] = 1;
    e.add_term(std::move(k), {1, 0});
    return e;
  }

  // cos(<freq, x>) and sin(<freq, x>) for a rational frequency vector.
  static Expr cosine(const std::vector<Rational>& freq) {
    return trig(freq, {Rational(1, 2), 0}, {Rational(1, 2), 0});
  }
  static Expr sine(const std::vector<Rational>& freq) {
    return trig(freq, {0, Rational(-1, 2)}, {0, Rational(1, 2)});
  }

  std::size_t num_vars() const { return num_vars_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  bool is_constant() const {
    return terms_.empty() ||
           (terms_.size() == 1 && terms_.begin()->first == zero_key());
  }

  // True when the function depends on x_i (some term has alpha_i or freq_i).
  bool depends_on(std::size_t i) const {
    for (const auto& [k, c] : terms_)
      if (k.alpha[i] != 0 || k.freq[i] != 0) return true;
    return false;
  }

  bool is_polynomial() const {
    for (const auto& [k, c] : terms_)
      if (!k.has_zero_frequency()) return false;
    return true;
  }

  Expr& operator+=(const Expr& o) {
    check_same(o);
    for (const auto& [k, c] : o.terms_) add_term(k, c);
    return *this;
  }
  Expr& operator-=(const Expr& o) {
    check_same(o);
    for (const auto& [k, c] : o.terms_) add_term(k, -c);
    return *this;
  }
  friend Expr operator+(Expr a, const Expr& b) { return a += b; }
  friend Expr operator-(Expr a, const Expr& b) { return a -= b; }
  friend Expr operator-(const Expr& a) { return a.scaled(-1); }

  // Products of exponentials linearize by adding frequencies.
  friend Expr operator*(const Expr& a, const Expr& b) {
    a.check_same(b);
    Expr out(a.num_vars_);
    for (const auto& [ka, ca] : a.terms_) {
      for (const auto& [kb, cb] : b.terms_) {
        TermKey k = ka;
        for (std::size_t i = 0; i < k.alpha.size(); ++i) {
          k.alpha[i] += kb.alpha[i];
          k.freq[i] += kb.freq[i];
        }
        out.add_term(std::move(k), ca * cb);
      }
    }
    return out;
  }

  Expr scaled(const Rational& c) const {
    Expr out(num_vars_);
    if (c == 0) return out;
    for (const auto& [k, v] : terms_) out.terms_.emplace(k, v * c);
    return out;
  }

  Expr pow(unsigned n) const {
    Expr out = constant(num_vars_, 1);
    for (unsigned i = 0; i < n; ++i) out = out * *this;
    return out;
  }

  Expr partial(std::size_t i) const {
    check_index(num_vars_, i);
    Expr out(num_vars_);
    for (const auto& [k, c] : terms_) {
      if (k.alpha[i] > 0) {
        TermKey kk = k;
        kk.alpha[i] -= 1;
        out.add_term(std::move(kk), c * Rational(k.alpha[i]));
      }
      if (k.freq[i] != 0) {
        // d/dx_i exp(i a x) = i a_i exp(i a x)
        const Rational& a = k.freq[i];
        out.add_term(k, ComplexRational{-c.im * a, c.re * a});
      }
    }
    return out;
  }

  /// Floating evaluation in long double; the result is the real part of the
  /// term sum (the imaginary part cancels up to rounding).
  std::complex<long double> eval_complex(std::span<const long double> x) const {
    check_point(x.size());
    std::complex<long double> sum = 0;
    for (const auto& [k, c] : terms_) {
      long double mono = 1;
      long double phase = 0;
      for (std::size_t i = 0; i < num_vars_; ++i) {
        if (k.alpha[i] != 0) mono *= std::pow(x[i], k.alpha[i]);
        if (k.freq[i] != 0) phase += to_long_double(k.freq[i]) * x[i];
      }
      std::complex<long double> coef(to_long_double(c.re), to_long_double(c.im));
      sum += coef * mono * std::polar<long double>(1.0L, phase);
    }
    return sum;
  }

  double eval(std::span<const double> x) const {
    std::vector<long double> xl(x.begin(), x.end());
    return static_cast<double>(eval_complex(xl).real());
  }

  /// Exact value at a rational point, available when every trigonometric
  /// phase vanishes there (e.g. at the origin); nullopt otherwise.
  std::optional<Rational> eval_exact(std::span<const Rational> x) const {
    check_point(x.size());
    ComplexRational sum{0, 0};
    for (const auto& [k, c] : terms_) {
      Rational phase = 0;
      Rational mono = 1;
      for (std::size_t i = 0; i < num_vars_; ++i) {
        if (k.freq[i] != 0) phase += k.freq[i] * x[i];
        for (int p = 0; p < k.alpha[i]; ++p) mono *= x[i];
      }
      if (phase != 0) return std::nullopt;
      sum += c * mono;
    }
    return sum.re;
  }

  std::string to_string() const;

  friend bool operator==(const Expr& a, const Expr& b) {
    return a.num_vars_ == b.num_vars_ && a.terms_ == b.terms_;
  }

  TermKey zero_key() const {
    return TermKey{std::vector<int>(num_vars_, 0),
                   std::vector<Rational>(num_vars_, Rational(0))};
  }

 private:
  static Expr trig(const std::vector<Rational>& freq, ComplexRational plus,
                   ComplexRational minus) {
    Expr e(freq.size());
    TermKey k = e.zero_key();
    k.freq = freq;
    TermKey km = k.negated_frequency();
    e.add_term(std::move(k), plus);
    e.add_term(std::move(km), minus);
    return e;
  }

  void add_term(TermKey k, const ComplexRational& c) {
    if (c.is_zero()) return;
    auto [it, inserted] = terms_.try_emplace(std::move(k), c);
    if (!inserted) {
      it->second += c;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }

  void check_same(const Expr& o) const {
    if (o.num_vars_ != num_vars_)
      throw std::invalid_argument("Expr: variable count mismatch");
  }
  void check_point(std::size_t n) const {
    if (n != num_vars_)
      throw std::invalid_argument("Expr: point has wrong dimension");
  }
  static void check_index(std::size_t n, std::size_t i) {
    if (i >= n) throw std::out_of_range("Expr: variable index out of range");
  }

  std::size_t num_vars_ = 0;
  TermMap terms_;
};

namespace detail {

inline std::string monomial_text(const std::vector<int>& alpha) {
  std::string s;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i] == 0) continue;
    if (!s.empty()) s += '*';
    s += 'x' + std::to_string(i + 1);
    if (alpha[i] > 1) s += '^' + std::to_string(alpha[i]);
  }
  return s;
}

inline std::string affine_text(const std::vector<Rational>& freq) {
  std::string s;
  for (std::size_t i = 0; i < freq.size(); ++i) {
    const Rational& a = freq[i];
    if (a == 0) continue;
    Rational mag = a < 0 ? Rational(-a) : a;
    std::string var = 'x' + std::to_string(i + 1);
    std::string item = mag == 1 ? var : to_string(mag) + '*' + var;
    if (s.empty())
      s = a < 0 ? '-' + item : item;
    else
      s += (a < 0 ? " - " : " + ") + item;
  }
  return s;
}

inline std::string term_text(const Rational& coef, const std::string& factors) {
  if (factors.empty()) return to_string(coef);
  if (coef == 1) return factors;
  if (coef == -1) return '-' + factors;
  return to_string(coef) + '*' + factors;
}

}  // namespace detail

/// Canonical text in the parser's grammar; conjugate exponential pairs are
/// printed as cos/sin of the positive-frequency representative.
inline std::string Expr::to_string() const {
  if (terms_.empty()) return "0";
  std::vector<std::string> parts;
  for (const auto& [k, c] : terms_) {
    std::string mono = detail::monomial_text(k.alpha);
    if (k.has_zero_frequency()) {
      parts.push_back(detail::term_text(c.re, mono));
      continue;
    }
    if (!k.is_positive_frequency()) continue;
    // c e^{it} + conj(c) e^{-it} = 2 Re c cos t - 2 Im c sin t
    std::string arg = detail::affine_text(k.freq);
    Rational a = c.re * 2;
    Rational b = -c.im * 2;
    auto join = [&](const std::string& trig) {
      return mono.empty() ? trig : mono + '*' + trig;
    };
    if (a != 0) parts.push_back(detail::term_text(a, join("cos(" + arg + ")")));
    if (b != 0) parts.push_back(detail::term_text(b, join("sin(" + arg + ")")));
  }
  std::string out;
  for (const auto& p : parts) {
    if (out.empty())
      out = p;
    else if (p[0] == '-')
      out += " - " + p.substr(1);
    else
      out += " + " + p;
  }
  return out;
}

}  // namespace grushin

#endif  // GRUSHIN_EXPR_HPP
