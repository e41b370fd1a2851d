#ifndef GRUSHIN_RATIONAL_HPP
#define GRUSHIN_RATIONAL_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <ostream>
#include <string>

namespace grushin {

using Integer = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>, boost::multiprecision::et_off>;
using Rational = boost::multiprecision::number<boost::multiprecision::cpp_rational_backend, boost::multiprecision::et_off>;

inline Rational make_rational(long long num, long long den = 1) {
  return Rational(Integer(num), Integer(den));
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }
inline long double to_long_double(const Rational& r) {
  return r.convert_to<long double>();
}

inline std::string to_string(const Rational& r) { return r.str(); }

/// Exact element of Q(i).
struct ComplexRational {
  Rational re;
  Rational im;

  bool is_zero() const { return re == 0 && im == 0; }
  ComplexRational conj() const { return {re, -im}; }

  ComplexRational& operator+=(const ComplexRational& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  ComplexRational& operator-=(const ComplexRational& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  friend ComplexRational operator+(ComplexRational a, const ComplexRational& b) {
    return a += b;
  }
  friend ComplexRational operator-(ComplexRational a, const ComplexRational& b) {
    return a -= b;
  }
  friend ComplexRational operator-(const ComplexRational& a) {
    return {-a.re, -a.im};
  }
  friend ComplexRational operator*(const ComplexRational& a,
                                   const ComplexRational& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend ComplexRational operator*(const ComplexRational& a, const Rational& c) {
    return {a.re * c, a.im * c};
  }
  friend bool operator==(const ComplexRational& a, const ComplexRational& b) {
    return a.re == b.re && a.im == b.im;
  }
  friend std::ostream& operator<<(std::ostream& os, const ComplexRational& c) {
    return os << '(' << c.re << ", " << c.im << ')';
  }
};

}  // namespace grushin

#endif  // GRUSHIN_RATIONAL_HPP
