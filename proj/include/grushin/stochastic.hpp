// Monte Carlo diffusion for the heat semigroup and horizontal-word checks of
// the distance.
#ifndef GRUSHIN_STOCHASTIC_HPP
#define GRUSHIN_STOCHASTIC_HPP

#include "grushin/fields.hpp"
#include "grushin/grid.hpp"
#include "grushin/heat.hpp"
#include "grushin/metric.hpp"
#include "grushin/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

namespace grushin {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of stream i, independent of how streams are split across workers.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t i) {
  return splitmix64(splitmix64(seed) ^ splitmix64(i + 0x632BE59BD9B4E019ULL));
}

struct PathBatch {
  std::vector<double> x0;
  double t = 0;
  std::size_t n_paths = 0;
  int n_steps = 0;
  std::uint64_t seed = 0;
  std::vector<double> endpoints;  // n_paths x dim, row-major; NaN for escaped paths
  std::size_t escaped = 0;

  std::size_t dim() const { return x0.size(); }
  const double* endpoint(std::size_t i) const { return endpoints.data() + i * dim(); }
};

/// Euler-Maruyama for dx = sum_i X_i(x) sqrt(2) dW_i + sum_i (X_i.grad X_i)(x) dt,
/// whose generator is sum_i X_i^2. Each path has its own generator seeded by
/// stream_seed(seed, path index).
inline PathBatch sample_paths(const NumericSystem& ns, std::vector<double> x0, double t, int n_steps,
                              std::size_t n_paths, std::uint64_t seed, unsigned workers = 0) {
  if (x0.size() != ns.dim()) throw std::invalid_argument("sample_paths: start point dimension mismatch");
  if (!(t >= 0) || n_steps < 1) throw std::invalid_argument("sample_paths: need t >= 0 and n_steps >= 1");
  PathBatch b{std::move(x0), t, n_paths, n_steps, seed, {}, 0};
  const std::size_t k = ns.dim(), m = ns.size();
  b.endpoints.assign(n_paths * k, 0.0);
  const double dt = t / n_steps, sdt = std::sqrt(2 * dt);
  const bool drift = !ns.drift_is_zero();

  auto run = [&](std::size_t begin, std::size_t end, std::size_t& escaped) {
    std::vector<double> x(k), a(k * m), dr(k), z(m);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t p = begin; p < end; ++p) {
      std::mt19937_64 rng(stream_seed(seed, p));
      normal.reset();
      std::copy(b.x0.begin(), b.x0.end(), x.begin());
      bool ok = true;
      for (int s = 0; s < n_steps && ok; ++s) {
        ns.field_matrix(x.data(), a.data());
        for (std::size_t i = 0; i < m; ++i) z[i] = normal(rng) * sdt;
        if (drift) ns.drift(x.data(), dr.data());
        for (std::size_t j = 0; j < k; ++j) {
          double v = 0;
          for (std::size_t i = 0; i < m; ++i) v += a[j * m + i] * z[i];
          x[j] += v + (drift ? dr[j] * dt : 0.0);
          ok = ok && std::isfinite(x[j]);
        }
      }
      double* out = b.endpoints.data() + p * k;
      if (ok) {
        std::copy(x.begin(), x.end(), out);
      } else {
        std::fill(out, out + k, std::numeric_limits<double>::quiet_NaN());
        ++escaped;
      }
    }
  };

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n_paths, 1)));
  std::vector<std::size_t> esc(workers, 0);
  std::vector<std::thread> pool;
  const std::size_t chunk = (n_paths + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    std::size_t lo = std::min(n_paths, w * chunk), hi = std::min(n_paths, lo + chunk);
    if (w + 1 == workers) {
      run(lo, hi, esc[w]);
    } else {
      pool.emplace_back(run, lo, hi, std::ref(esc[w]));
    }
  }
  for (auto& th : pool) th.join();
  for (auto e : esc) b.escaped += e;
  return b;
}

/// Sample mean of a function of the endpoint and its standard error.
struct MomentEstimate {
  double mean = 0;
  double std_error = 0;
};

template <class F>
MomentEstimate endpoint_moment(const PathBatch& b, F f) {
  double s = 0, s2 = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < b.n_paths; ++i) {
    const double* e = b.endpoint(i);
    if (!std::isfinite(e[0])) continue;
    double v = f(e);
    s += v;
    s2 += v * v;
    ++n;
  }
  if (n < 2) throw std::invalid_argument("endpoint_moment: fewer than two finite paths");
  double mean = s / static_cast<double>(n);
  double var = (s2 - static_cast<double>(n) * mean * mean) / static_cast<double>(n - 1);
  return {mean, std::sqrt(std::max(var, 0.0) / static_cast<double>(n))};
}

/// Endpoint density on the grid (nearest node; periodic axes wrapped, box
/// axes dropping endpoints outside the grid).
inline Vec kernel_histogram(const PathBatch& b, const GridSpec& g) {
  if (g.dim() != b.dim()) throw std::invalid_argument("kernel_histogram: grid dimension mismatch");
  Vec h = Vec::Zero(static_cast<Eigen::Index>(g.size()));
  std::vector<std::size_t> m(g.dim());
  for (std::size_t i = 0; i < b.n_paths; ++i) {
    const double* e = b.endpoint(i);
    if (!std::isfinite(e[0])) continue;
    bool inside = true;
    for (std::size_t a = 0; a < g.dim(); ++a) {
      long idx = std::lround((e[a] - g.lo[a]) / g.spacing(a));
      long w;
      if (!g.shift(a, idx, w)) {
        inside = false;
        break;
      }
      m[a] = static_cast<std::size_t>(w);
    }
    if (inside) h[static_cast<Eigen::Index>(g.ravel(m))] += 1;
  }
  return h / (static_cast<double>(b.n_paths) * g.cell_measure());
}

/// 1/2 sum |a - b| times the cell measure.
inline double total_variation(const GridSpec& g, const Vec& a, const Vec& b) {
  if (a.size() != b.size() || a.size() != static_cast<Eigen::Index>(g.size()))
    throw std::invalid_argument("total_variation: grid mismatch");
  return 0.5 * (a - b).cwiseAbs().sum() * g.cell_measure();
}

inline double compare_kernels(const GridSpec& hist_grid, const Vec& hist, const GridSpec& kernel_grid,
                              const KernelSnapshot& k) {
  if (!(hist_grid == kernel_grid)) throw std::invalid_argument("compare_kernels: grid mismatch");
  return total_variation(hist_grid, hist, k.values);
}

// ------------------------------------------------------------------ words

struct Word {
  std::vector<std::pair<std::size_t, double>> letters;  // (field index, time)

  double length() const {
    double s = 0;
    for (const auto& l : letters) s += std::abs(l.second);
    return s;
  }
};

/// exp(t_n X_{i_n}) ... exp(t_1 X_{i_1}) x: letters act left to right.
inline std::vector<double> word_action(const FieldSystem& s, const Word& w, std::span<const double> x) {
  std::vector<double> p(x.begin(), x.end());
  for (const auto& [i, t] : w.letters) {
    if (i >= s.size()) throw std::invalid_argument("word_action: field index out of range");
    p = flow_converged(s.field(i), p, t);
  }
  return p;
}

/// Letter count 1 + geometric(1/2) capped at 12, uniform total length in
/// (0, max_len] split by uniform weights, random signs and fields.
inline Word random_word(std::mt19937_64& rng, std::size_t n_fields, double max_len) {
  std::geometric_distribution<int> extra(0.5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> field(0, n_fields - 1);
  int n = std::min(12, 1 + extra(rng));
  std::vector<double> w(static_cast<std::size_t>(n));
  double sum = 0;
  for (auto& v : w) sum += (v = unit(rng) + 1e-3);
  double total = max_len * (1 - unit(rng));
  Word word;
  for (int j = 0; j < n; ++j) {
    double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
    word.letters.push_back({field(rng), sign * total * w[static_cast<std::size_t>(j)] / sum});
  }
  return word;
}

/// Points visited by the word, including sub-steps along each letter.
inline std::vector<std::vector<double>> word_trajectory(const FieldSystem& s, const Word& w,
                                                        std::span<const double> x, int per_letter = 8) {
  std::vector<std::vector<double>> out{std::vector<double>(x.begin(), x.end())};
  std::vector<double> p(x.begin(), x.end());
  for (const auto& [i, t] : w.letters) {
    for (int k = 1; k <= per_letter; ++k) out.push_back(flow_converged(s.field(i), p, t * k / per_letter));
    p = out.back();
  }
  return out;
}

struct WordGridSpec {
  std::size_t nodes = 0;  // per axis; 0 picks 129 in the plane and 33 above
  std::size_t nodes_for(std::size_t dim) const { return nodes ? nodes : (dim <= 2 ? 129 : 33); }
  double epsilon_fraction = 0.01;  // epsilon relative to the window width
  double margin_fraction = 0.25;  // window margin relative to the word length
  int stencil = 2;
};

/// Box grid around a set of points, expanded by `margin` per axis.
inline GridSpec window_grid(const std::vector<std::vector<double>>& pts, double margin, std::size_t nodes) {
  const std::size_t k = pts.front().size();
  std::vector<double> lo(k, std::numeric_limits<double>::infinity()), hi(k, -std::numeric_limits<double>::infinity());
  for (const auto& p : pts)
    for (std::size_t a = 0; a < k; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  double width = 0;
  for (std::size_t a = 0; a < k; ++a) width = std::max(width, hi[a] - lo[a]);
  for (std::size_t a = 0; a < k; ++a) {
    double c = (lo[a] + hi[a]) / 2, half = std::max(width / 2, 1e-3) + margin;
    lo[a] = c - half;
    hi[a] = c + half;
  }
  return GridSpec(std::vector<std::size_t>(k, nodes), lo, hi, std::vector<bool>(k, false));
}

/// Distance from x to y on a window grid around the given trajectory, with
/// x placed on a node.
inline double window_distance(const FieldSystem& s, const std::vector<std::vector<double>>& traj,
                              std::span<const double> y, double length, const WordGridSpec& spec) {
  NumericSystem ns(s);
  GridSpec g = window_grid(traj, spec.margin_fraction * length + 1e-3, spec.nodes_for(s.dim()));
  // shift the window so that the start point is a node
  const auto& x = traj.front();
  for (std::size_t a = 0; a < g.dim(); ++a) {
    double h = g.spacing(a);
    double off = x[a] - (g.lo[a] + h * std::round((x[a] - g.lo[a]) / h));
    g.lo[a] += off;
    g.hi[a] += off;
  }
  double eps = spec.epsilon_fraction * (g.hi[0] - g.lo[0]);
  auto df = distance_field(ns, g, g.nearest(x), eps, spec.stencil);
  return distance_to(df, ns, y);
}

struct TransferenceCase {
  std::vector<double> x;
  Word word;
  double length = 0;
  double distance = 0;
  bool passed = false;
};

struct TransferenceReport {
  std::size_t n_words = 0;
  std::size_t n_passed = 0;
  std::size_t escapes = 0;
  double allowance = 0.05;
  double max_ratio = 0;  // max d / length
  std::vector<TransferenceCase> cases;

  double pass_rate() const { return n_words ? static_cast<double>(n_passed) / static_cast<double>(n_words) : 0.0; }
};

/// Random start points in the inner half of the numeric window.
inline std::vector<double> random_start(const FieldSystem& s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-0.5, 0.5);
  std::vector<double> x(s.dim());
  for (std::size_t a = 0; a < s.dim(); ++a) {
    auto [lo, hi] = domain_extent(s.domain(), a);
    x[a] = (lo + hi) / 2 + unit(rng) * (hi - lo) / 2;
  }
  return x;
}

/// d(x, word(x)) <= (1 + allowance) * |word| over random words and starts.
inline TransferenceReport transference_check(const FieldSystem& s, std::size_t n_words, double max_len,
                                             std::uint64_t seed, double allowance = 0.05,
                                             const WordGridSpec& grid = {}) {
  TransferenceReport r;
  r.allowance = allowance;
  std::mt19937_64 rng(seed);
  for (std::size_t n = 0; n < n_words; ++n) {
    TransferenceCase c;
    c.x = random_start(s, rng);
    c.word = random_word(rng, s.size(), max_len);
    c.length = c.word.length();
    ++r.n_words;
    try {
      auto traj = word_trajectory(s, c.word, c.x);
      c.distance = window_distance(s, traj, traj.back(), c.length, grid);
    } catch (const FlowError&) {
      ++r.escapes;
      r.cases.push_back(std::move(c));
      continue;
    }
    c.passed = c.distance <= (1 + allowance) * c.length;
    r.n_passed += c.passed;
    r.max_ratio = std::max(r.max_ratio, c.distance / c.length);
    r.cases.push_back(std::move(c));
  }
  return r;
}

struct SupportReport {
  std::vector<double> x;
  double r = 0;
  std::size_t n_words = 0;
  std::size_t inside = 0;
  double max_distance = 0;
  bool passed = false;
};

/// Endpoints of words of length <= r from x lie within (1 + allowance) r.
inline SupportReport support_check_qr(const FieldSystem& s, std::vector<double> x, double r, std::size_t n_words,
                                      std::uint64_t seed, double allowance = 0.05,
                                      const WordGridSpec& grid = {}) {
  SupportReport rep{std::move(x), r, n_words, 0, 0, false};
  std::mt19937_64 rng(seed);
  std::vector<Word> words;
  for (std::size_t n = 0; n < n_words; ++n) words.push_back(random_word(rng, s.size(), r));
  std::vector<std::vector<double>> all{rep.x}, ends;
  for (const auto& w : words) {
    auto traj = word_trajectory(s, w, rep.x);
    ends.push_back(traj.back());
    all.insert(all.end(), traj.begin(), traj.end());
  }
  NumericSystem ns(s);
  GridSpec g = window_grid(all, grid.margin_fraction * r + 1e-3, grid.nodes_for(s.dim()));
  for (std::size_t a = 0; a < g.dim(); ++a) {
    double h = g.spacing(a);
    double off = rep.x[a] - (g.lo[a] + h * std::round((rep.x[a] - g.lo[a]) / h));
    g.lo[a] += off;
    g.hi[a] += off;
  }
  auto df = distance_field(ns, g, g.nearest(rep.x), grid.epsilon_fraction * (g.hi[0] - g.lo[0]), grid.stencil);
  for (const auto& e : ends) {
    double d = distance_to(df, ns, e);
    rep.max_distance = std::max(rep.max_distance, d);
    rep.inside += d <= (1 + allowance) * r;
  }
  rep.passed = rep.inside == n_words;
  return rep;
}

}  // namespace grushin

#endif  // GRUSHIN_STOCHASTIC_HPP
