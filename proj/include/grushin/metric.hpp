// Relaxed Carnot-Caratheodory distances by lattice shortest paths, ball
// volumes and doubling ratios.
#ifndef GRUSHIN_METRIC_HPP
#define GRUSHIN_METRIC_HPP

#include "grushin/grid.hpp"
#include "grushin/numeric.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace grushin {

/// G_eps(x) = A(x) A(x)^T + eps^2 I.
inline Eigen::MatrixXd relaxed_metric(const NumericSystem& ns, std::span<const double> x, double eps) {
  if (!(eps > 0)) throw std::invalid_argument("relaxed_metric: epsilon must be positive");
  const std::size_t k = ns.dim(), n = ns.size();
  std::vector<double> a(k * n);
  ns.field_matrix(x.data(), a.data());
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> A(a.data(), k, n);
  Eigen::MatrixXd g = A * A.transpose();
  g.diagonal().array() += eps * eps;
  return g;
}

/// Primitive lattice offsets in [-r, r]^k (gcd of entries 1).
inline std::vector<std::vector<long>> stencil_offsets(std::size_t k, int r) {
  if (r < 1 || r > 3) throw std::invalid_argument("stencil radius must be 1, 2 or 3");
  std::vector<std::vector<long>> out;
  std::vector<long> o(k, -r);
  while (true) {
    long g = 0;
    for (long v : o) g = std::gcd(g, std::abs(v));
    if (g == 1) out.push_back(o);
    std::size_t a = k;
    while (a-- > 0) {
      if (o[a] < r) {
        ++o[a];
        break;
      }
      o[a] = -r;
    }
    if (a == static_cast<std::size_t>(-1)) break;
  }
  return out;
}

namespace detail {

// sqrt(d^T G^{-1} d) with G = A A^T + eps^2 I evaluated at `mid`.
class EdgeCost {
 public:
  EdgeCost(const NumericSystem& ns, double eps) : ns_(ns), eps2_(eps * eps), a_(ns.dim() * ns.size()) {}

  double operator()(const double* mid, const double* d) {
    const std::size_t k = ns_.dim(), n = ns_.size();
    ns_.field_matrix(mid, a_.data());
    if (k == 2) {
      double g00 = eps2_, g01 = 0, g11 = eps2_;
      for (std::size_t i = 0; i < n; ++i) {
        double u = a_[i], v = a_[n + i];
        g00 += u * u;
        g01 += u * v;
        g11 += v * v;
      }
      double det = g00 * g11 - g01 * g01;
      double q = (g11 * d[0] * d[0] - 2 * g01 * d[0] * d[1] + g00 * d[1] * d[1]) / det;
      return std::sqrt(std::max(q, 0.0));
    }
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> A(a_.data(), k, n);
    Eigen::MatrixXd g = A * A.transpose();
    g.diagonal().array() += eps2_;
    Eigen::Map<const Eigen::VectorXd> dv(d, static_cast<Eigen::Index>(k));
    Eigen::VectorXd s = g.llt().solve(dv);
    return std::sqrt(std::max(dv.dot(s), 0.0));
  }

 private:
  const NumericSystem& ns_;
  double eps2_;
  std::vector<double> a_;
};

}  // namespace detail

/// Shortest-path distances from one node; +inf where unreached.
struct DistanceField {
  GridSpec grid;
  std::size_t source = 0;
  double epsilon = 0;
  int stencil_radius = 2;
  std::vector<double> values;

  double at(std::size_t node) const { return values[node]; }
};

/// Dijkstra over the lattice graph joining nodes whose index offset is a
/// primitive vector of the stencil; edge cost is the relaxed length of the
/// displacement at the segment midpoint. Ties pop in node order.
inline DistanceField distance_field(const NumericSystem& ns, const GridSpec& grid, std::size_t source,
                                    double epsilon, int stencil_radius = 2) {
  if (grid.dim() != ns.dim()) throw std::invalid_argument("distance_field: grid dimension mismatch");
  if (source >= grid.size()) throw std::invalid_argument("distance_field: source outside grid");
  if (!(epsilon > 0)) throw std::invalid_argument("distance_field: epsilon must be positive");
  const std::size_t k = grid.dim();
  const auto offsets = stencil_offsets(k, stencil_radius);
  const double inf = std::numeric_limits<double>::infinity();

  DistanceField df{grid, source, epsilon, stencil_radius, std::vector<double>(grid.size(), inf)};
  std::vector<char> done(grid.size(), 0);
  detail::EdgeCost cost(ns, epsilon);
  std::vector<double> h(k), mid(k), disp(k);
  for (std::size_t a = 0; a < k; ++a) h[a] = grid.spacing(a);

  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  df.values[source] = 0;
  pq.push({0.0, source});
  std::vector<std::size_t> m(k);
  while (!pq.empty()) {
    auto [du, u] = pq.top();
    pq.pop();
    if (done[u]) continue;
    done[u] = 1;
    m = grid.unravel(u);
    for (const auto& o : offsets) {
      std::size_t v = 0;
      bool ok = true;
      for (std::size_t a = 0; a < k; ++a) {
        long w;
        if (!grid.shift(a, static_cast<long>(m[a]) + o[a], w)) {
          ok = false;
          break;
        }
        v = v * grid.counts[a] + static_cast<std::size_t>(w);
      }
      if (!ok || done[v]) continue;
      for (std::size_t a = 0; a < k; ++a) {
        mid[a] = grid.lo[a] + h[a] * (0.5 * static_cast<double>(2 * static_cast<long>(m[a]) + o[a]));
        disp[a] = h[a] * static_cast<double>(o[a]);
      }
      double nd = du + cost(mid.data(), disp.data());
      if (nd < df.values[v]) {
        df.values[v] = nd;
        pq.push({nd, v});
      }
    }
  }
  return df;
}

inline DistanceField distance_field(const NumericSystem& ns, const GridSpec& grid,
                                    std::span<const double> source, double epsilon, int stencil_radius = 2) {
  return distance_field(ns, grid, grid.nearest(source), epsilon, stencil_radius);
}

/// Distance to an off-grid point: min over nearby nodes of d(node) plus the
/// relaxed length of the last segment.
inline double distance_to(const DistanceField& df, const NumericSystem& ns, std::span<const double> p) {
  const GridSpec& g = df.grid;
  const std::size_t k = g.dim();
  auto base = g.unravel(g.nearest(p));
  detail::EdgeCost cost(ns, df.epsilon);
  const long r = df.stencil_radius;
  double best = std::numeric_limits<double>::infinity();
  std::vector<long> o(k, -r);
  std::vector<double> mid(k), disp(k);
  while (true) {
    std::size_t v = 0;
    bool ok = true;
    for (std::size_t a = 0; a < k; ++a) {
      long w;
      if (!g.shift(a, static_cast<long>(base[a]) + o[a], w)) {
        ok = false;
        break;
      }
      v = v * g.counts[a] + static_cast<std::size_t>(w);
    }
    if (ok && std::isfinite(df.values[v])) {
      for (std::size_t a = 0; a < k; ++a) {
        double x = g.lo[a] + g.spacing(a) * static_cast<double>(static_cast<long>(base[a]) + o[a]);
        disp[a] = p[a] - x;
        mid[a] = x + disp[a] / 2;
      }
      best = std::min(best, df.values[v] + cost(mid.data(), disp.data()));
    }
    std::size_t a = k;
    while (a-- > 0) {
      if (o[a] < r) {
        ++o[a];
        break;
      }
      o[a] = -r;
    }
    if (a == static_cast<std::size_t>(-1)) break;
  }
  return best;
}

struct BallVolume {
  double volume = 0;
  std::size_t nodes = 0;
  bool touches_boundary = false;
};

/// Cell measure times the number of nodes with distance < r. A ball touches
/// the boundary when it contains a box-boundary node or reaches within one
/// stencil of half a period from the source on a periodic axis.
inline BallVolume ball_volume(const DistanceField& df, double r) {
  if (r < 0) throw std::invalid_argument("ball_volume: negative radius");
  const GridSpec& g = df.grid;
  auto s = g.unravel(df.source);
  BallVolume b;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(df.values[i] < r)) continue;
    ++b.nodes;
    auto m = g.unravel(i);
    for (std::size_t a = 0; a < g.dim(); ++a) {
      long n = static_cast<long>(g.counts[a]);
      long mi = static_cast<long>(m[a]);
      if (!g.periodic[a]) {
        if (mi == 0 || mi == n - 1) b.touches_boundary = true;
      } else {
        long off = mi - static_cast<long>(s[a]);
        off = ((off % n) + n) % n;
        if (off > n / 2) off -= n;
        if (std::abs(off) >= n / 2 - df.stencil_radius) b.touches_boundary = true;
      }
    }
  }
  b.volume = static_cast<double>(b.nodes) * g.cell_measure();
  return b;
}

struct VolumeRow {
  std::vector<double> center;
  double r = 0;
  double volume = 0;
  bool interior = true;
};

struct VolumeTable {
  std::vector<VolumeRow> rows;
  double epsilon = 0;
  GridSpec grid;
  int stencil_radius = 2;
};

inline VolumeTable volume_table(const NumericSystem& ns, const GridSpec& grid,
                                const std::vector<std::vector<double>>& centers,
                                const std::vector<double>& radii, double epsilon, int stencil_radius = 2) {
  VolumeTable t{{}, epsilon, grid, stencil_radius};
  for (const auto& c : centers) {
    auto df = distance_field(ns, grid, c, epsilon, stencil_radius);
    for (double r : radii) {
      auto b = ball_volume(df, r);
      t.rows.push_back({grid.point(df.source), r, b.volume, !b.touches_boundary});
    }
  }
  return t;
}

/// Least-squares slope of log v against log r.
inline double loglog_slope(std::span<const double> r, std::span<const double> v) {
  double n = static_cast<double>(r.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    double x = std::log(r[i]), y = std::log(v[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct LadderLevel {
  std::vector<std::size_t> counts;
  double epsilon = 0.1;
};

struct DoublingCell {
  std::vector<double> center;
  double r = 0;
  std::vector<double> ratios;  // per level; NaN when either ball touches the boundary
  double drift = 0;
  bool stable = false;
};

struct DoublingReport {
  std::vector<DoublingCell> cells;
  double sup_stable_ratio = 0;
  double exponent = 0;  // log2 of the sup
  std::size_t excluded = 0;  // cells whose 2r-ball touches the boundary
  bool all_stable = false;
  std::string error;
};

/// Grid over `window` if given, else over the system's numeric window. Balls
/// that stay inside a window see the same shortest paths as on the full
/// domain, since every path shorter than r lies in the ball.
inline GridSpec ladder_grid(const NumericSystem& ns, const LadderLevel& level, const std::optional<Box>& window) {
  if (!window) return GridSpec::over(ns, level.counts);
  std::vector<bool> p(ns.dim(), false);
  return GridSpec(level.counts, window->lo, window->hi, p);
}

/// V(x,2r)/V(x,r) at each ladder level; stable when the last two levels
/// differ by less than `drift_tol` relative to the last.
inline DoublingReport doubling_report(const NumericSystem& ns, const std::vector<std::vector<double>>& centers,
                                      const std::vector<double>& radii, const std::vector<LadderLevel>& ladder,
                                      int stencil_radius = 2, double drift_tol = 0.05,
                                      const std::optional<Box>& window = std::nullopt) {
  if (ladder.size() < 2) throw std::invalid_argument("doubling_report: ladder needs two levels");
  DoublingReport rep;
  for (const auto& c : centers)
    for (double r : radii) rep.cells.push_back({c, r, {}, 0, false});
  for (const auto& level : ladder) {
    GridSpec g = ladder_grid(ns, level, window);
    std::size_t cell = 0;
    for (const auto& c : centers) {
      auto df = distance_field(ns, g, c, level.epsilon, stencil_radius);
      for (double r : radii) {
        auto v1 = ball_volume(df, r), v2 = ball_volume(df, 2 * r);
        double ratio = (v1.touches_boundary || v2.touches_boundary || v1.nodes == 0)
                           ? std::numeric_limits<double>::quiet_NaN()
                           : v2.volume / v1.volume;
        rep.cells[cell++].ratios.push_back(ratio);
      }
    }
  }
  rep.all_stable = true;
  bool any = false;
  for (auto& c : rep.cells) {
    double a = c.ratios[c.ratios.size() - 2], b = c.ratios.back();
    if (std::isnan(b)) {
      ++rep.excluded;
      c.drift = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    c.drift = std::abs(b - a) / b;
    c.stable = std::isfinite(c.drift) && c.drift < drift_tol;
    if (c.stable) {
      any = true;
      rep.sup_stable_ratio = std::max(rep.sup_stable_ratio, b);
    } else {
      rep.all_stable = false;
    }
  }
  if (!any) rep.error = "no stable cells";
  else rep.exponent = std::log2(rep.sup_stable_ratio);
  return rep;
}

}  // namespace grushin

#endif  // GRUSHIN_METRIC_HPP
