#ifndef GRUSHIN_EXPR_PARSER_HPP
#define GRUSHIN_EXPR_PARSER_HPP

#include "grushin/expr.hpp"

#include <cctype>
#include <stdexcept>
#include <string>
#include <string_view>

namespace grushin {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

namespace detail {

// Recursive-descent parser for
//   expr    := term (("+"|"-") term)*
//   term    := factor ("*" factor)*
//   factor  := base ("^" uint)?
//   base    := rational | var | "sin(" affine ")" | "cos(" affine ")"
//            | "(" expr ")" | "-" factor
//   affine  := rational? var (("+"|"-") rational? var)* (("+"|"-") rational)?
//   rational:= int ("/" uint)?
class ExprParser {
 public:
  ExprParser(std::string_view text, std::size_t num_vars)
      : text_(text), num_vars_(num_vars) {}

  Expr parse() {
    Expr e = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }
  bool accept(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }
  bool accept_word(std::string_view w) {
    skip_ws();
    if (text_.substr(pos_, w.size()) == w) {
      pos_ += w.size();
      return true;
    }
    return false;
  }

  bool at_digit() {
    char c = peek();
    return std::isdigit(static_cast<unsigned char>(c)) != 0;
  }

  Integer uint_literal() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("expected unsigned integer");
    return Integer(std::string(text_.substr(start, pos_ - start)));
  }

  Rational rational() {
    Integer num = uint_literal();
    if (peek() == '/') {
      ++pos_;
      Integer den = uint_literal();
      if (den == 0) fail("zero denominator");
      return Rational(num, den);
    }
    return Rational(num);
  }

  std::size_t var_index() {
    expect('x');
    std::size_t at = pos_;
    if (!at_digit()) fail("expected variable index after 'x'");
    Integer idx = uint_literal();
    if (idx < 1 || idx > num_vars_) {
      pos_ = at;
      fail("variable index out of range (num_vars = " + std::to_string(num_vars_) + ")");
    }
    return static_cast<std::size_t>(idx) - 1;
  }

  Expr expr() {
    Expr e = term();
    for (;;) {
      if (accept('+'))
        e += term();
      else if (accept('-'))
        e -= term();
      else
        return e;
    }
  }

  Expr term() {
    Expr e = factor();
    while (accept('*')) e = e * factor();
    return e;
  }

  Expr factor() {
    Expr b = base();
    if (accept('^')) {
      char c = peek();
      if (c == '-') fail("negative exponent");
      Integer n = uint_literal();
      char after = peek();
      if (after == '.' || after == '/') fail("non-integer exponent");
      if (n > 64) fail("exponent too large");
      return b.pow(static_cast<unsigned>(n));
    }
    return b;
  }

  Expr base() {
    char c = peek();
    if (c == '-') {
      ++pos_;
      return -factor();
    }
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) return Expr::constant(num_vars_, rational());
    if (c == 'x') return Expr::variable(num_vars_, var_index());
    if (accept_word("sin")) return Expr::sine(affine_argument());
    if (accept_word("cos")) return Expr::cosine(affine_argument());
    if (c == '\0') fail("unexpected end of input");
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  // Returns the frequency vector; constant offsets must vanish.
  std::vector<Rational> affine_argument() {
    expect('(');
    std::vector<Rational> freq(num_vars_, Rational(0));
    Rational offset = 0;
    bool first = true;
    for (;;) {
      Rational sign = 1;
      if (accept('-'))
        sign = -1;
      else if (!first && !accept('+'))
        break;
      else if (first)
        accept('+');
      first = false;

      char c = peek();
      if (std::isdigit(static_cast<unsigned char>(c))) {
        Rational r = rational();
        accept('*');
        if (peek() == 'x')
          freq[var_index()] += sign * r;
        else
          offset += sign * r;
      } else if (c == 'x') {
        freq[var_index()] += sign;
      } else {
        fail("non-affine argument inside sin/cos");
      }
    }
    if (peek() != ')') fail("non-affine argument inside sin/cos");
    ++pos_;
    if (offset != 0)
      fail("nonzero constant phase inside sin/cos (coefficients would leave Q(i))");
    return freq;
  }

  std::string_view text_;
  std::size_t num_vars_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses the expression grammar into canonical form. Throws ParseError.
inline Expr parse_expr(std::string_view text, std::size_t num_vars) {
  return detail::ExprParser(text, num_vars).parse();
}

}  // namespace grushin

#endif  // GRUSHIN_EXPR_PARSER_HPP
