#ifndef GRUSHIN_GRID_HPP
#define GRUSHIN_GRID_HPP

#include "grushin/numeric.hpp"

#include <cmath>
#include <cstddef>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace grushin {

/// Node-centred tensor grid. Periodic axes have n nodes per period starting
/// at lo; box axes have n nodes including both ends. Index is row-major
/// (axis 0 slowest).
struct GridSpec {
  std::vector<std::size_t> counts;
  std::vector<double> lo, hi;
  std::vector<bool> periodic;

  GridSpec() = default;
  GridSpec(std::vector<std::size_t> n, std::vector<double> l, std::vector<double> h, std::vector<bool> p)
      : counts(std::move(n)), lo(std::move(l)), hi(std::move(h)), periodic(std::move(p)) {
    validate();
  }

  /// Grid over the numeric window of a system.
  static GridSpec over(const NumericSystem& ns, std::vector<std::size_t> n) {
    std::vector<double> l, h;
    std::vector<bool> p;
    for (std::size_t a = 0; a < ns.dim(); ++a) {
      l.push_back(ns.lo(a));
      h.push_back(ns.hi(a));
      p.push_back(ns.periodic(a));
    }
    return GridSpec(std::move(n), std::move(l), std::move(h), std::move(p));
  }
  static GridSpec over(const NumericSystem& ns, std::size_t n) {
    return over(ns, std::vector<std::size_t>(ns.dim(), n));
  }

  void validate() const {
    std::size_t k = counts.size();
    if (k == 0 || lo.size() != k || hi.size() != k || periodic.size() != k)
      throw std::invalid_argument("GridSpec: inconsistent axis data");
    for (std::size_t a = 0; a < k; ++a) {
      if (counts[a] < 8) throw std::invalid_argument("GridSpec: at least 8 nodes per axis");
      if (!(hi[a] > lo[a])) throw std::invalid_argument("GridSpec: empty axis");
    }
  }

  std::size_t dim() const { return counts.size(); }
  std::size_t size() const {
    std::size_t s = 1;
    for (auto c : counts) s *= c;
    return s;
  }
  double spacing(std::size_t a) const {
    return (hi[a] - lo[a]) / static_cast<double>(periodic[a] ? counts[a] : counts[a] - 1);
  }
  double cell_measure() const {
    double m = 1;
    for (std::size_t a = 0; a < dim(); ++a) m *= spacing(a);
    return m;
  }
  double coord(std::size_t a, long i) const { return lo[a] + spacing(a) * static_cast<double>(i); }

  std::vector<std::size_t> unravel(std::size_t idx) const {
    std::vector<std::size_t> m(dim());
    for (std::size_t a = dim(); a-- > 0;) {
      m[a] = idx % counts[a];
      idx /= counts[a];
    }
    return m;
  }
  std::size_t ravel(std::span<const std::size_t> m) const {
    std::size_t idx = 0;
    for (std::size_t a = 0; a < dim(); ++a) idx = idx * counts[a] + m[a];
    return idx;
  }
  std::vector<double> point(std::size_t idx) const {
    auto m = unravel(idx);
    std::vector<double> x(dim());
    for (std::size_t a = 0; a < dim(); ++a) x[a] = coord(a, static_cast<long>(m[a]));
    return x;
  }
  std::size_t stride(std::size_t a) const {
    std::size_t s = 1;
    for (std::size_t b = a + 1; b < dim(); ++b) s *= counts[b];
    return s;
  }

  /// Wrapped (periodic) or range-checked (box) index along one axis.
  bool shift(std::size_t a, long i, long& out) const {
    long n = static_cast<long>(counts[a]);
    if (periodic[a]) {
      out = ((i % n) + n) % n;
      return true;
    }
    out = i;
    return i >= 0 && i < n;
  }

  /// Nearest node to x (wrapping periodic axes, clamping box axes).
  std::size_t nearest(std::span<const double> x) const {
    std::vector<std::size_t> m(dim());
    for (std::size_t a = 0; a < dim(); ++a) {
      long i = std::lround((x[a] - lo[a]) / spacing(a));
      long w;
      if (!shift(a, i, w)) w = std::clamp(i, 0L, static_cast<long>(counts[a]) - 1);
      m[a] = static_cast<std::size_t>(w);
    }
    return ravel(m);
  }

  bool operator==(const GridSpec&) const = default;
};

/// Row-major CSV with a header line naming axes and spacings.
inline void write_grid_csv(std::ostream& os, const GridSpec& g, std::span<const double> values,
                           const std::string& value_name = "value") {
  os.precision(17);
  os << "#";
  for (std::size_t a = 0; a < g.dim(); ++a)
    os << " x" << a + 1 << ":n=" << g.counts[a] << ",lo=" << g.lo[a] << ",h=" << g.spacing(a)
       << (g.periodic[a] ? ",periodic" : ",box");
  os << "\n";
  for (std::size_t a = 0; a < g.dim(); ++a) os << "x" << a + 1 << ",";
  os << value_name << "\n";
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto p = g.point(i);
    for (double c : p) os << c << ",";
    os << values[i] << "\n";
  }
}

}  // namespace grushin

#endif  // GRUSHIN_GRID_HPP
