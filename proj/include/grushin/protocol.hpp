// Curated sample sets and refinement ladders for verification runs. Registry
// systems get calibrated sets; other systems get sets scaled to their window.
#ifndef GRUSHIN_PROTOCOL_HPP
#define GRUSHIN_PROTOCOL_HPP

#include "grushin/bounds.hpp"
#include "grushin/metric.hpp"
#include "grushin/registry.hpp"

#include <optional>
#include <string>
#include <vector>

namespace grushin {

struct DoublingProtocol {
  std::vector<std::vector<double>> centers;
  std::vector<double> radii;
  std::vector<LadderLevel> ladder;
  std::optional<Box> window;
  int stencil = 2;
  double drift_tol = 0.05;
};

struct HeatProtocol {
  std::vector<HeatLevel> levels;
  std::vector<HeatLevel> riesz_levels;  // first level uses the eigen method
  std::vector<std::vector<double>> sources;
  std::vector<double> poisson_times;
  std::vector<double> harnack_times;
  std::vector<std::vector<double>> poincare_centers;
  std::vector<double> poincare_radii;
  std::vector<double> poincare_epsilons;
  DistanceSpec distance;
};

struct OracleProtocol {
  std::vector<double> start;
  double t = 0.5;
  int steps = 100;
  std::size_t paths = 1000000;
  std::size_t grid = 64;
  std::size_t words = 100;
  double max_len = 2;
  double allowance = 0.05;
  double support_radius = 0.5;
  std::size_t support_words = 50;
};

struct Protocol {
  DoublingProtocol doubling;
  HeatProtocol heat;
  OracleProtocol oracle;
};

namespace detail {

inline std::vector<double> window_center(const FieldSystem& s) {
  std::vector<double> c;
  for (std::size_t a = 0; a < s.dim(); ++a) {
    auto [lo, hi] = domain_extent(s.domain(), a);
    c.push_back((lo + hi) / 2);
  }
  return c;
}

inline double window_halfwidth(const FieldSystem& s) {
  double w = 0;
  for (std::size_t a = 0; a < s.dim(); ++a) {
    auto [lo, hi] = domain_extent(s.domain(), a);
    w = w == 0 ? (hi - lo) / 2 : std::min(w, (hi - lo) / 2);
  }
  return w;
}

/// Points c + scale * v for the given offset vectors.
inline std::vector<std::vector<double>> offsets(const std::vector<double>& c, double scale,
                                                const std::vector<std::vector<double>>& v) {
  std::vector<std::vector<double>> out;
  for (const auto& d : v) {
    auto p = c;
    for (std::size_t a = 0; a < p.size(); ++a) p[a] += scale * d[a];
    out.push_back(std::move(p));
  }
  return out;
}

inline bool starts_with(const std::string& s, const std::string& p) { return s.rfind(p, 0) == 0; }

}  // namespace detail

/// Protocol by system name. Registry systems use the calibrated sets; other
/// systems get the planar sets scaled by a quarter of the window half-width.
inline Protocol protocol_for(const FieldSystem& s) {
  Protocol p;
  const std::string& name = s.name();
  const std::size_t k = s.dim();
  const auto c = detail::window_center(s);
  bool registry = detail::starts_with(name, "grushin(");
  for (const auto& n : builtin_names()) registry = registry || name == n;
  const double u = registry ? 1.0 : detail::window_halfwidth(s) / 4;
  const bool planar = k == 2, solid = k == 3;

  // doubling
  auto& d = p.doubling;
  if (solid) d.ladder = {{{33, 33, 33}, 0.1}, {{65, 65, 65}, 0.05}};
  else if (planar) d.ladder = {{{65, 65}, 0.2}, {{129, 129}, 0.1}, {{257, 257}, 0.05}};
  else d.ladder = {{std::vector<std::size_t>(k, 33), 0.1}, {std::vector<std::size_t>(k, 49), 0.05}};
  if (name == "euclidean" && planar) {
    d.centers = {{0, 0}, {1, 1}};
    d.radii = {0.5, 1.0};
  } else if (name == "circle3d") {
    d.centers = {{1, 0, 0}};
    d.radii = {0.3, 0.4};
    d.window = Box{{0, -1, -0.5}, {2, 1, 0.5}};
  } else if (detail::starts_with(name, "grushin(") && name != "grushin(1)") {
    d.centers = {{0, 0}, {1, 0}};
    d.radii = {1.0, 1.25};
  } else if (name == "grushin(1)") {
    d.centers = {{0, 0}, {1, 0}, {0, 1}};
    d.radii = {0.75, 1.0, 1.25};
  } else if (planar) {
    d.centers = detail::offsets(c, u, {{0, 0}, {1, 0}});
    d.radii = {0.75 * u, u, 1.25 * u};
  } else {
    d.centers = {c};
    d.radii = {0.25 * u, 0.5 * u};
  }

  // heat-based claims
  auto& h = p.heat;
  if (planar) {
    h.levels = {{64, HeatMethod::Krylov}, {128, HeatMethod::Krylov}};
    h.riesz_levels = {{64, HeatMethod::Eigen}, {128, HeatMethod::Krylov}};
  } else {
    h.levels = {{16, HeatMethod::Krylov}, {32, HeatMethod::Krylov}};
    h.riesz_levels = {{16, HeatMethod::Eigen}, {32, HeatMethod::Krylov}};
  }
  if (name == "torus_sin") {
    h.sources = {{1, 0}, {2, 1}, {0.5, -1}, {-1.5, 0.5}};
  } else if (name == "circle3d") {
    h.sources = {{1, 0, 0}, {0, 0, 0}};
  } else if (planar) {
    h.sources = detail::offsets(c, u, {{0, 0}, {1, 0}, {0, 1}, {-0.5, -0.5}});
  } else {
    h.sources = {c};
  }
  // degenerate lines need larger times before the coarse level resolves p_t
  if (detail::starts_with(name, "grushin(")) h.poisson_times = {2, 3};
  else if (name == "torus_sin") h.poisson_times = {0.5, 1};
  else h.poisson_times = {0.25, 0.5, 1};
  h.harnack_times = name == "euclidean" ? std::vector<double>{1, 2} : std::vector<double>{2, 3};
  if (name == "circle3d") {
    for (double a : {-0.5, 0.0, 0.5})
      for (double b : {-0.5, 0.0, 0.5})
        for (double e : {-0.25, 0.25}) h.poincare_centers.push_back({a, b, e});
    h.poincare_radii = {0.75, 1.0};
    h.poincare_epsilons = {0.1, 0.05};
  } else if (planar) {
    for (double a : {-1.0, -0.5, 0.0, 0.5, 1.0})
      for (double b : {-1.0, 0.0, 1.0}) h.poincare_centers.push_back({c[0] + a * u, c[1] + b * u});
    h.poincare_radii = {0.5 * u, u};
    h.poincare_epsilons = {0.05, 0.025};
  } else {
    std::vector<double> z = solid ? std::vector<double>{-0.25, 0.25} : std::vector<double>{0.0};
    for (double a : {-0.5, 0.0, 0.5})
      for (double b : {-0.5, 0.0, 0.5})
        for (double e : z) {
          auto q = c;
          q[0] += a * u;
          if (k > 1) q[1] += b * u;
          if (k > 2) q[2] += e * u;
          h.poincare_centers.push_back(q);
        }
    h.poincare_radii = {0.75 * u, u};
    h.poincare_epsilons = {0.1, 0.05};
  }

  // stochastic oracle
  p.oracle.start = c;
  return p;
}

}  // namespace grushin

#endif  // GRUSHIN_PROTOCOL_HPP
