#ifndef GRUSHIN_SYSTEM_IO_HPP
#define GRUSHIN_SYSTEM_IO_HPP

#include "grushin/expr_parser.hpp"
#include "grushin/fields.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

// System definition files:
//
//   # comment
//   dim = 2
//   domain = box [-4..4; -4..4]        or   domain = torus [2pi, 2pi]
//   fields = [ "d1", "x1 d2" ]
//   name = my-system                   (optional; defaults to the file path)
//
// Each field string is "<expr> d<j> (+ <expr> d<j>)*". The text between two
// d<j> tokens (minus one leading '+') is a whole expression, so
// "x1^2 + x2^2 - 1 d3" means (x1^2 + x2^2 - 1) d3. An empty expression is 1.

namespace grushin {

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

// "<rational>", "<rational>pi", "<rational>*pi", "pi", "-pi", decimals.
struct Scalar {
  Rational coefficient;
  bool times_pi = false;
  double value() const {
    return to_double(coefficient) * (times_pi ? std::numbers::pi : 1.0);
  }
};

inline Scalar parse_scalar(std::string_view raw) {
  std::string s = trim(raw);
  Scalar out;
  if (s.size() >= 2 && s.substr(s.size() - 2) == "pi") {
    out.times_pi = true;
    s = trim(s.substr(0, s.size() - 2));
    if (!s.empty() && s.back() == '*') s = trim(s.substr(0, s.size() - 1));
    if (s.empty() || s == "+") s = "1";
    if (s == "-") s = "-1";
  }
  if (s.empty()) throw SystemError("empty number");
  bool neg = false;
  std::size_t i = 0;
  if (s[0] == '-' || s[0] == '+') {
    neg = s[0] == '-';
    i = 1;
  }
  std::string body = s.substr(i);
  try {
    if (auto dot = body.find('.'); dot != std::string::npos) {
      std::string digits = body.substr(0, dot) + body.substr(dot + 1);
      if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
        throw SystemError("bad number '" + s + "'");
      Integer den = 1;
      for (std::size_t k = dot + 1; k < body.size(); ++k) den *= 10;
      out.coefficient = Rational(Integer(digits), den);
    } else if (auto slash = body.find('/'); slash != std::string::npos) {
      out.coefficient = Rational(Integer(body.substr(0, slash)), Integer(body.substr(slash + 1)));
    } else {
      if (body.empty() || body.find_first_not_of("0123456789") != std::string::npos)
        throw SystemError("bad number '" + s + "'");
      out.coefficient = Rational(Integer(body));
    }
  } catch (const SystemError&) {
    throw;
  } catch (const std::exception&) {
    throw SystemError("bad number '" + s + "'");
  }
  if (neg) out.coefficient = -out.coefficient;
  return out;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

inline std::string bracket_body(std::string_view s) {
  auto a = s.find('[');
  auto b = s.rfind(']');
  if (a == std::string_view::npos || b == std::string_view::npos || b < a)
    throw SystemError("expected [...] list");
  return std::string(s.substr(a + 1, b - a - 1));
}

}  // namespace detail

/// Parses one field string such as "x1 d2 + 1 d1".
inline VectorField parse_field(std::string_view text, std::size_t dim) {
  std::vector<Expr> comps(dim, Expr(dim));
  std::size_t seg_start = 0;
  int depth = 0;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '(') ++depth;
    if (c == ')') --depth;
    bool boundary_before = i == 0 || !std::isalnum(static_cast<unsigned char>(text[i - 1]));
    if (depth == 0 && c == 'd' && boundary_before && i + 1 < text.size() &&
        std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
      std::size_t j = i + 1;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      std::size_t axis = std::stoul(std::string(text.substr(i + 1, j - i - 1)));
      if (axis < 1 || axis > dim) throw SystemError("derivative index d" + std::to_string(axis) + " out of range");
      std::string seg = detail::trim(text.substr(seg_start, i - seg_start));
      if (any) {
        if (seg.empty() || seg[0] != '+')
          throw SystemError("field terms must be joined by '+': \"" + std::string(text) + "\"");
        seg = detail::trim(seg.substr(1));
      }
      Expr coef = seg.empty() ? Expr::constant(dim, 1) : parse_expr(seg, dim);
      comps[axis - 1] += coef;
      any = true;
      seg_start = j;
      i = j - 1;
    }
  }
  if (!any) throw SystemError("field has no d<j> term: \"" + std::string(text) + "\"");
  if (!detail::trim(text.substr(seg_start)).empty())
    throw SystemError("trailing text after last d<j> in \"" + std::string(text) + "\"");
  return VectorField(std::move(comps), std::string(text));
}

inline Domain parse_domain(std::string_view text, std::size_t dim) {
  std::string t = detail::trim(text);
  std::string body = detail::bracket_body(t);
  if (t.rfind("box", 0) == 0) {
    Box b;
    for (const auto& part : detail::split(body, ';')) {
      auto dots = part.find("..");
      if (dots == std::string::npos) throw SystemError("box axis must be lo..hi");
      b.lo.push_back(detail::parse_scalar(part.substr(0, dots)).value());
      b.hi.push_back(detail::parse_scalar(part.substr(dots + 2)).value());
    }
    if (b.lo.size() != dim) throw SystemError("box has wrong number of axes");
    return b;
  }
  if (t.rfind("torus", 0) == 0) {
    Torus tor;
    for (const auto& part : detail::split(body, ',')) {
      auto s = detail::parse_scalar(part);
      if (!s.times_pi) throw SystemError("torus periods must be rational multiples of pi");
      if (s.coefficient <= 0) throw SystemError("torus periods must be positive");
      tor.periods_over_pi.push_back(s.coefficient);
    }
    if (tor.periods_over_pi.size() != dim) throw SystemError("torus has wrong number of axes");
    return tor;
  }
  throw SystemError("domain must be 'box [...]' or 'torus [...]'");
}

inline FieldSystem parse_system(std::string_view text, std::string name = {}) {
  std::map<std::string, std::string> kv;
  std::string current;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (detail::trim(line).empty()) continue;
    auto eq = line.find('=');
    bool new_key = false;
    if (eq != std::string::npos) {
      std::string key = detail::trim(line.substr(0, eq));
      if (!key.empty() && key.find_first_of(" \"[") == std::string::npos) {
        current = key;
        kv[current] = line.substr(eq + 1);
        new_key = true;
      }
    }
    if (!new_key) {
      if (current.empty()) throw SystemError("line outside any key: " + line);
      kv[current] += "\n" + line;
    }
  }
  for (const char* key : {"dim", "domain", "fields"})
    if (!kv.count(key)) throw SystemError(std::string("missing key '") + key + "'");

  std::size_t dim = 0;
  try {
    dim = std::stoul(detail::trim(kv["dim"]));
  } catch (const std::exception&) {
    throw SystemError("dim must be a positive integer");
  }
  Domain domain = parse_domain(kv["domain"], dim);
  if (kv.count("name")) {
    name = detail::trim(kv["name"]);
    if (name.empty()) throw SystemError("empty name");
  }

  std::vector<VectorField> fields;
  std::string body = detail::bracket_body(kv["fields"]);
  std::size_t pos = 0;
  while ((pos = body.find('"', pos)) != std::string::npos) {
    auto end = body.find('"', pos + 1);
    if (end == std::string::npos) throw SystemError("unterminated field string");
    fields.push_back(parse_field(std::string_view(body).substr(pos + 1, end - pos - 1), dim));
    pos = end + 1;
  }
  return FieldSystem(dim, std::move(fields), std::move(domain), std::move(name));
}

inline FieldSystem load_system(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw SystemError("cannot open system file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_system(ss.str(), path);
}

}  // namespace grushin

#endif  // GRUSHIN_SYSTEM_IO_HPP
