// Discrete sum-of-squares generator and functions of it: heat and Poisson
// semigroups by spectral decomposition, Lanczos, or implicit midpoint.
#ifndef GRUSHIN_HEAT_HPP
#define GRUSHIN_HEAT_HPP

#include "grushin/grid.hpp"
#include "grushin/numeric.hpp"

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace grushin {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

enum class HeatMethod { Eigen, Krylov, ImplicitMidpoint };

inline std::string to_string(HeatMethod m) {
  switch (m) {
    case HeatMethod::Eigen: return "eigen";
    case HeatMethod::Krylov: return "krylov";
    case HeatMethod::ImplicitMidpoint: return "implicit-midpoint";
  }
  return "?";
}

class SizeLimitExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class KrylovNotConverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverOptions {
  std::size_t eigen_max_nodes = 4096;
  double krylov_tol = 1e-11;  // relative to the starting norm
  int krylov_max_dim = 800;
  int midpoint_steps = 400;
  double cg_tol = 1e-12;
};

/// Spectrum of one connected block of L.
struct SpectralBlock {
  std::vector<std::size_t> nodes;
  Vec values;
  Eigen::MatrixXd vectors;  // columns
};

// Eigenvalues at round-off level are the kernel of L (constants per block).
inline double clamp_eigenvalue(double lambda, double scale) {
  return lambda < 1e-11 * scale ? 0.0 : lambda;
}

/// L = sum_i D_i^T D_i with each field discretized as
/// (D f)(p) = sum_j (a_j(p) + a_j(q)) / 2 * centered difference along j, which
/// is antisymmetric entry by entry. Box axes are truncated (zero outside).
class DiscreteGenerator {
 public:
  DiscreteGenerator(const NumericSystem& ns, GridSpec grid, SolverOptions opts = {})
      : grid_(std::move(grid)), opts_(opts) {
    if (grid_.dim() != ns.dim()) throw std::invalid_argument("DiscreteGenerator: dimension mismatch");
    const std::size_t N = grid_.size(), k = grid_.dim();
    std::vector<std::vector<double>> pts(N);
    for (std::size_t p = 0; p < N; ++p) pts[p] = grid_.point(p);
    for (std::size_t i = 0; i < ns.size(); ++i) {
      std::vector<double> coef(N);
      std::vector<Eigen::Triplet<double>> trip;
      for (std::size_t j = 0; j < k; ++j) {
        if (ns.component_is_zero(i, j)) continue;
        for (std::size_t p = 0; p < N; ++p) coef[p] = ns.component(i, j, pts[p].data());
        const double inv2h = 1.0 / (2 * grid_.spacing(j));
        const long stride = static_cast<long>(grid_.stride(j));
        for (std::size_t p = 0; p < N; ++p) {
          long mj = static_cast<long>((p / grid_.stride(j)) % grid_.counts[j]);
          for (int s : {-1, 1}) {
            long w;
            if (!grid_.shift(j, mj + s, w)) continue;
            std::size_t q = static_cast<std::size_t>(static_cast<long>(p) + (w - mj) * stride);
            trip.emplace_back(static_cast<int>(p), static_cast<int>(q), s * inv2h * 0.5 * (coef[p] + coef[q]));
          }
        }
      }
      SparseMatrix d(static_cast<int>(N), static_cast<int>(N));
      d.setFromTriplets(trip.begin(), trip.end());
      d.prune(0.0);
      D_.push_back(std::move(d));
    }
    L_.resize(static_cast<int>(N), static_cast<int>(N));
    for (const auto& d : D_) L_ += SparseMatrix(d.transpose() * d);
    L_.makeCompressed();
    find_blocks();
    const double tol = 1e-10 * norm_bound();
    for (const auto& nodes : blocks_) {
      Vec one = Vec::Zero(static_cast<Eigen::Index>(N));
      for (auto p : nodes) one[static_cast<Eigen::Index>(p)] = 1;
      constant_kernel_.push_back((L_ * one).lpNorm<Eigen::Infinity>() <= tol);
    }
  }

  const GridSpec& grid() const { return grid_; }
  const SolverOptions& options() const { return opts_; }
  std::size_t num_fields() const { return D_.size(); }
  const SparseMatrix& D(std::size_t i) const { return D_[i]; }
  const SparseMatrix& L() const { return L_; }
  std::size_t size() const { return grid_.size(); }
  bool periodic() const {
    for (bool p : grid_.periodic)
      if (!p) return false;
    return true;
  }
  const std::vector<std::vector<std::size_t>>& blocks() const { return blocks_; }
  /// Whether the indicator of block b lies in the kernel of L.
  bool constant_in_kernel(std::size_t b) const { return constant_kernel_[b]; }

  /// Orthogonal projection onto the span of the kernel block indicators.
  Vec kernel_part(const Vec& f) const {
    Vec out = Vec::Zero(f.size());
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      if (!constant_kernel_[b]) continue;
      double mean = 0;
      for (auto p : blocks_[b]) mean += f[static_cast<Eigen::Index>(p)];
      mean /= static_cast<double>(blocks_[b].size());
      for (auto p : blocks_[b]) out[static_cast<Eigen::Index>(p)] = mean;
    }
    return out;
  }

  /// Upper bound on the spectrum (max absolute row sum).
  double norm_bound() const {
    double m = 0;
    for (int r = 0; r < L_.outerSize(); ++r) {
      double s = 0;
      for (SparseMatrix::InnerIterator it(L_, r); it; ++it) s += std::abs(it.value());
      m = std::max(m, s);
    }
    return m;
  }

  bool eigen_allowed() const { return grid_.size() <= opts_.eigen_max_nodes; }

  /// Per-block symmetric eigendecomposition, computed on first use.
  const std::vector<SpectralBlock>& spectrum() const {
    if (!eigen_allowed())
      throw SizeLimitExceeded("eigen method limited to " + std::to_string(opts_.eigen_max_nodes) + " nodes");
    if (!spectrum_) {
      auto sp = std::make_shared<std::vector<SpectralBlock>>();
      const double scale = norm_bound();
      for (const auto& nodes : blocks_) {
        const int b = static_cast<int>(nodes.size());
        std::vector<int> local(grid_.size(), -1);
        for (int i = 0; i < b; ++i) local[nodes[i]] = i;
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(b, b);
        for (int i = 0; i < b; ++i)
          for (SparseMatrix::InnerIterator it(L_, static_cast<int>(nodes[i])); it; ++it)
            m(i, local[it.col()]) = it.value();
        m = 0.5 * (m + m.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
        if (es.info() != Eigen::Success) throw std::runtime_error("symmetric eigensolver failed");
        Vec w = es.eigenvalues();
        for (int i = 0; i < b; ++i) w[i] = clamp_eigenvalue(w[i], scale);
        sp->push_back({nodes, std::move(w), es.eigenvectors()});
      }
      spectrum_ = sp;
    }
    return *spectrum_;
  }

 private:
  void find_blocks() {
    const std::size_t N = grid_.size();
    std::vector<int> comp(N, -1);
    for (std::size_t s = 0; s < N; ++s) {
      if (comp[s] >= 0) continue;
      int id = static_cast<int>(blocks_.size());
      std::vector<std::size_t> nodes{s}, stack{s};
      comp[s] = id;
      while (!stack.empty()) {
        std::size_t u = stack.back();
        stack.pop_back();
        for (SparseMatrix::InnerIterator it(L_, static_cast<int>(u)); it; ++it) {
          auto v = static_cast<std::size_t>(it.col());
          if (comp[v] < 0) {
            comp[v] = id;
            nodes.push_back(v);
            stack.push_back(v);
          }
        }
      }
      std::sort(nodes.begin(), nodes.end());
      blocks_.push_back(std::move(nodes));
    }
  }

  GridSpec grid_;
  SolverOptions opts_;
  std::vector<SparseMatrix> D_;
  SparseMatrix L_;
  std::vector<std::vector<std::size_t>> blocks_;
  std::vector<bool> constant_kernel_;
  mutable std::shared_ptr<std::vector<SpectralBlock>> spectrum_;
};

/// Lanczos with full reorthogonalization for phi(L) f, reusing one Krylov
/// space for any number of functions.
class Lanczos {
 public:
  Lanczos(const SparseMatrix& L, const Vec& f, double scale) : L_(L), scale_(scale) {
    beta0_ = f.norm();
    if (beta0_ > 0) V_.push_back(f / beta0_);
  }

  double start_norm() const { return beta0_; }
  int dim() const { return static_cast<int>(V_.size()); }
  bool exhausted() const { return exhausted_; }

  void extend(int m) {
    while (!exhausted_ && static_cast<int>(alpha_.size()) < m) {
      const Vec& v = V_.back();
      Vec w = L_ * v;
      double a = v.dot(w);
      alpha_.push_back(a);
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& u : V_) w -= u.dot(w) * u;
      double b = w.norm();
      if (b <= 1e-13 * scale_ || static_cast<Eigen::Index>(V_.size()) == L_.rows()) {
        exhausted_ = true;
        break;
      }
      beta_.push_back(b);
      V_.push_back(w / b);
    }
  }

  /// Coefficients beta0 * Q phi(Theta) Q^T e1 in the first m Lanczos vectors.
  Vec coefficients(const std::function<double(double)>& phi, int m) {
    m = std::min<int>(m, static_cast<int>(alpha_.size()));
    Vec c = Vec::Zero(m);
    if (m == 0) return c;
    const auto& es = tridiagonal(m);
    const auto& Q = es.eigenvectors();
    for (int j = 0; j < m; ++j) {
      double lam = clamp_eigenvalue(es.eigenvalues()[j], scale_);
      c += (beta0_ * Q(0, j) * phi(lam)) * Q.col(j);
    }
    return c;
  }

  /// phi(L) f. The Krylov space grows in steps of 10 until the coefficient
  /// vectors of the last two sizes agree to tol * |f|; the error estimate is
  /// returned through `residual`.
  Vec apply(const std::function<double(double)>& phi, double tol, int max_dim, double* residual = nullptr) {
    if (beta0_ == 0) {
      if (residual) *residual = 0;
      return Vec::Zero(L_.rows());
    }
    int m = std::max(30, static_cast<int>(alpha_.size()));
    extend(m);
    Vec cur;
    double err = 0;
    while (true) {
      int have = static_cast<int>(alpha_.size());
      cur = coefficients(phi, have);
      if (exhausted_) {
        err = 0;
        break;
      }
      Vec prev = coefficients(phi, have - 10);
      Vec pad = Vec::Zero(cur.size());
      pad.head(prev.size()) = prev;
      err = (cur - pad).norm();
      if (err <= tol * beta0_) break;
      if (have >= max_dim)
        throw KrylovNotConverged("Lanczos did not converge within " + std::to_string(max_dim) + " vectors");
      extend(have + 10);
    }
    if (residual) *residual = err / beta0_;
    Vec out = Vec::Zero(L_.rows());
    for (int j = 0; j < cur.size(); ++j) out += cur[j] * V_[j];
    return out;
  }

 private:
  const SparseMatrix& L_;
  double scale_;
  double beta0_ = 0;
  std::vector<Vec> V_;
  std::vector<double> alpha_, beta_;
  bool exhausted_ = false;
  std::map<int, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>> tri_;

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>& tridiagonal(int m) {
    auto it = tri_.find(m);
    if (it != tri_.end()) return it->second;
    Vec d(m), e(std::max(m - 1, 0));
    for (int i = 0; i < m; ++i) d[i] = alpha_[i];
    for (int i = 0; i + 1 < m; ++i) e[i] = beta_[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
    return tri_.emplace(m, std::move(es)).first->second;
  }
};

/// phi(L) f for a fixed f and many phi, by the spectral cache or Lanczos.
class OperatorFunction {
 public:
  OperatorFunction(const DiscreteGenerator& gen, Vec f, HeatMethod method)
      : gen_(gen), f_(std::move(f)), method_(method) {
    if (method_ == HeatMethod::Eigen) {
      for (const auto& b : gen_.spectrum()) {
        Vec local(static_cast<Eigen::Index>(b.nodes.size()));
        for (std::size_t i = 0; i < b.nodes.size(); ++i) local[i] = f_[b.nodes[i]];
        coeffs_.push_back(b.vectors.transpose() * local);
      }
    } else if (method_ == HeatMethod::Krylov) {
      // the kernel component is handled exactly; Lanczos sees the rest
      kernel_ = gen_.kernel_part(f_);
      lanczos_ = std::make_unique<Lanczos>(gen_.L(), f_ - kernel_, gen_.norm_bound());
    } else {
      throw std::invalid_argument("OperatorFunction: method must be eigen or krylov");
    }
  }

  HeatMethod method() const { return method_; }
  double last_residual() const { return residual_; }

  Vec operator()(const std::function<double(double)>& phi) {
    if (method_ == HeatMethod::Eigen) {
      Vec out = Vec::Zero(f_.size());
      const auto& sp = gen_.spectrum();
      for (std::size_t k = 0; k < sp.size(); ++k) {
        Vec c = coeffs_[k];
        for (Eigen::Index i = 0; i < c.size(); ++i) c[i] *= phi(sp[k].values[i]);
        Vec local = sp[k].vectors * c;
        for (std::size_t i = 0; i < sp[k].nodes.size(); ++i) out[sp[k].nodes[i]] = local[i];
      }
      residual_ = 0;
      return out;
    }
    Vec out = lanczos_->apply(phi, gen_.options().krylov_tol, gen_.options().krylov_max_dim, &residual_);
    return out + phi(0.0) * kernel_;
  }

 private:
  const DiscreteGenerator& gen_;
  Vec f_;
  HeatMethod method_;
  std::vector<Vec> coeffs_;
  Vec kernel_;
  std::unique_ptr<Lanczos> lanczos_;
  double residual_ = 0;
};

/// Crank-Nicolson steps with conjugate gradients.
inline Vec implicit_midpoint(const DiscreteGenerator& gen, const Vec& f, double t, int steps, double cg_tol) {
  if (t == 0) return f;
  const double dt = t / steps;
  SparseMatrix I(static_cast<int>(f.size()), static_cast<int>(f.size()));
  I.setIdentity();
  SparseMatrix A = I + (0.5 * dt) * gen.L();
  SparseMatrix B = I - (0.5 * dt) * gen.L();
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(cg_tol);
  cg.compute(A);
  Vec u = f;
  for (int s = 0; s < steps; ++s) {
    Vec rhs = B * u;
    u = cg.solveWithGuess(rhs, u);
    if (cg.info() != Eigen::Success) throw std::runtime_error("implicit midpoint: CG failed");
  }
  return u;
}

inline std::function<double(double)> heat_phi(double t) {
  return [t](double lam) { return std::exp(-t * lam); };
}
inline std::function<double(double)> poisson_phi(double t) {
  return [t](double lam) { return std::exp(-t * std::sqrt(lam)); };
}

/// e^{-tL} f.
inline Vec heat_apply(const DiscreteGenerator& gen, const Vec& f, double t, HeatMethod method) {
  if (t < 0) throw std::invalid_argument("heat_apply: negative time");
  if (t == 0) return f;
  if (method == HeatMethod::ImplicitMidpoint)
    return implicit_midpoint(gen, f, t, gen.options().midpoint_steps, gen.options().cg_tol);
  OperatorFunction op(gen, f, method);
  return op(heat_phi(t));
}

/// Tensor product of [1/4, 1/2, 1/4] along every axis; symmetric, and mass
/// preserving on periodic axes.
inline Vec smooth(const GridSpec& g, const Vec& f) {
  Vec cur = f;
  for (std::size_t a = 0; a < g.dim(); ++a) {
    Vec next(cur.size());
    const long stride = static_cast<long>(g.stride(a));
    for (std::size_t p = 0; p < g.size(); ++p) {
      long m = static_cast<long>((p / g.stride(a)) % g.counts[a]);
      double v = 0.5 * cur[static_cast<Eigen::Index>(p)];
      for (int s : {-1, 1}) {
        long w;
        if (g.shift(a, m + s, w))
          v += 0.25 * cur[static_cast<Eigen::Index>(static_cast<long>(p) + (w - m) * stride)];
      }
      next[static_cast<Eigen::Index>(p)] = v;
    }
    cur = std::move(next);
  }
  return cur;
}

inline Vec delta(const GridSpec& g, std::size_t node) {
  Vec d = Vec::Zero(static_cast<Eigen::Index>(g.size()));
  d[static_cast<Eigen::Index>(node)] = 1.0 / g.cell_measure();
  return d;
}

inline double mass(const GridSpec& g, const Vec& f) { return f.sum() * g.cell_measure(); }

enum class KernelKind { Heat, Poisson };
enum class Readout { Smoothed, Raw };

/// One kernel slice k(., y), a density with respect to the cell measure.
struct KernelSnapshot {
  KernelKind kind = KernelKind::Heat;
  double t = 0;
  std::size_t source = 0;
  Vec values;
  HeatMethod method = HeatMethod::Eigen;
  Readout readout = Readout::Smoothed;
  double residual = 0;
};

/// Kernels from one source for many times. The smoothed readout is
/// S phi(L) S delta_y: the centered differences split the lattice into
/// parity classes that L never mixes, and S recouples them.
class KernelFamily {
 public:
  KernelFamily(const DiscreteGenerator& gen, std::size_t source, HeatMethod method,
               Readout readout = Readout::Smoothed)
      : gen_(gen), source_(source), readout_(readout),
        op_(gen, readout == Readout::Smoothed ? smooth(gen.grid(), delta(gen.grid(), source))
                                              : delta(gen.grid(), source),
            method) {}

  KernelSnapshot heat(double t) { return make(KernelKind::Heat, t, heat_phi(t)); }
  KernelSnapshot poisson(double t) { return make(KernelKind::Poisson, t, poisson_phi(t)); }
  /// Any spectral function of L applied to the (smoothed) delta.
  Vec apply(const std::function<double(double)>& phi) {
    Vec v = op_(phi);
    return readout_ == Readout::Smoothed ? smooth(gen_.grid(), v) : v;
  }
  double last_residual() const { return op_.last_residual(); }
  std::size_t source() const { return source_; }
  const DiscreteGenerator& generator() const { return gen_; }

 private:
  KernelSnapshot make(KernelKind kind, double t, const std::function<double(double)>& phi) {
    if (t < 0) throw std::invalid_argument("kernel: negative time");
    KernelSnapshot s{kind, t, source_, {}, op_.method(), readout_, 0};
    if (t == 0) {
      Vec d = delta(gen_.grid(), source_);
      s.values = readout_ == Readout::Smoothed ? smooth(gen_.grid(), smooth(gen_.grid(), d)) : d;
      return s;
    }
    s.values = apply(phi);
    s.residual = op_.last_residual();
    return s;
  }

  const DiscreteGenerator& gen_;
  std::size_t source_;
  Readout readout_;
  OperatorFunction op_;
};

inline KernelSnapshot heat_kernel(const DiscreteGenerator& gen, std::size_t y, double t, HeatMethod method,
                                  Readout readout = Readout::Smoothed) {
  if (method == HeatMethod::ImplicitMidpoint) {
    const GridSpec& g = gen.grid();
    Vec d = delta(g, y);
    if (readout == Readout::Smoothed) d = smooth(g, d);
    Vec v = heat_apply(gen, d, t, method);
    if (readout == Readout::Smoothed) v = smooth(g, v);
    return {KernelKind::Heat, t, y, std::move(v), method, readout, 0};
  }
  KernelFamily fam(gen, y, method, readout);
  return fam.heat(t);
}

/// |k(x, y) - k(y, x)| / max k for two sources.
inline double symmetry_defect(const DiscreteGenerator& gen, std::size_t y1, std::size_t y2, double t,
                              HeatMethod method) {
  auto a = heat_kernel(gen, y1, t, method), b = heat_kernel(gen, y2, t, method);
  double scale = std::max(a.values.maxCoeff(), b.values.maxCoeff());
  return std::abs(a.values[static_cast<Eigen::Index>(y2)] - b.values[static_cast<Eigen::Index>(y1)]) / scale;
}

inline KernelSnapshot poisson_spectral(const DiscreteGenerator& gen, std::size_t y, double t,
                                       Readout readout = Readout::Smoothed) {
  KernelFamily fam(gen, y, HeatMethod::Eigen, readout);
  return fam.poisson(t);
}

/// Trapezoid rule in u = log s for
///   e^{-t sqrt(l)} = pi^{-1/2} int_0^inf e^{-s} s^{-1/2} e^{-t^2 l / (4 s)} ds.
struct SubordinationQuadrature {
  double u_min = -38;
  double u_max = 4;
  double du = 0.1;
  double tol = 1e-8;

  std::vector<double> nodes() const {
    std::vector<double> u;
    int n = static_cast<int>(std::lround((u_max - u_min) / du));
    for (int i = 0; i <= n; ++i) u.push_back(u_min + du * i);
    return u;
  }
  // ds / sqrt(s) = e^{u/2} du; trapezoid end weights halved.
  double weight(double u, bool end) const {
    return (end ? 0.5 : 1.0) * du * std::exp(-std::exp(u)) * std::exp(0.5 * u) / std::sqrt(std::numbers::pi);
  }
  /// Analytic bound on the mass outside [u_min, u_max].
  double tail_bound() const {
    double low = 2 * std::exp(0.5 * u_min) / std::sqrt(std::numbers::pi);
    double high = std::exp(-std::exp(u_max)) * std::exp(0.5 * u_max) / std::sqrt(std::numbers::pi);
    return low + high;
  }
};

class QuadratureResidual : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// p_t(., y) as a weighted sum of heat kernels h_{t^2/(4s)}(., y). The
/// residual combines the tail bound, the mass defect of the weights and the
/// change from halving the node count.
inline KernelSnapshot poisson_subordination(const DiscreteGenerator& gen, std::size_t y, double t,
                                            HeatMethod method, const SubordinationQuadrature& q = {},
                                            Readout readout = Readout::Smoothed) {
  if (t <= 0) throw std::invalid_argument("poisson_subordination: t must be positive");
  KernelFamily fam(gen, y, method, readout);
  auto u = q.nodes();
  Vec full = Vec::Zero(static_cast<Eigen::Index>(gen.size()));
  Vec half = full;
  double wsum = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    bool end = i == 0 || i + 1 == u.size();
    double w = q.weight(u[i], end);
    double tau = t * t / (4 * std::exp(u[i]));
    Vec h = fam.heat(tau).values;
    full += w * h;
    wsum += w;
    if (i % 2 == 0) {
      double w2 = 2 * q.weight(u[i], end);
      half += w2 * h;
    }
  }
  double scale = full.cwiseAbs().maxCoeff();
  double halving = u.size() % 2 == 1 ? (full - half).cwiseAbs().maxCoeff() / scale : 0.0;
  double residual = std::max({q.tail_bound(), std::abs(wsum - 1), halving});
  if (residual > q.tol) throw QuadratureResidual("subordination residual " + std::to_string(residual));
  return {KernelKind::Poisson, t, y, std::move(full), method, readout, residual};
}

/// Discrete gradient magnitude squared, sum_i (D_i f)^2.
inline Vec grad_sq(const DiscreteGenerator& gen, const Vec& f) {
  Vec g = Vec::Zero(f.size());
  for (std::size_t i = 0; i < gen.num_fields(); ++i) g += (gen.D(i) * f).cwiseAbs2();
  return g;
}

}  // namespace grushin

#endif  // GRUSHIN_HEAT_HPP
