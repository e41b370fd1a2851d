// Command drivers behind the grushin executable: configuration, the ten
// subcommands and the certification pipeline. Every command returns a report
// envelope plus optional CSV tables; nothing here touches the filesystem
// except reading the system and ceiling files.
#ifndef GRUSHIN_CLI_HPP
#define GRUSHIN_CLI_HPP

#include "grushin/bounds.hpp"
#include "grushin/liealg.hpp"
#include "grushin/metric.hpp"
#include "grushin/protocol.hpp"
#include "grushin/registry.hpp"
#include "grushin/report.hpp"
#include "grushin/stochastic.hpp"
#include "grushin/system_io.hpp"

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace grushin::cli {

enum ExitCode : int { kPass = 0, kFail = 1, kInvalid = 2 };

class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  std::string command;
  std::string system_file;
  std::string builtin;
  BuiltinParams params;
  std::vector<std::size_t> grid;    // refinement ladder (nodes per axis)
  std::vector<double> eps_ladder;   // one epsilon per grid level
  std::uint64_t seed = 1;
  std::vector<std::string> claims;  // selection; empty selects all
  std::map<std::string, double> ceilings;  // overrides of limits()
  std::optional<std::vector<double>> source;
  std::optional<std::vector<double>> radii;
  std::optional<double> time;
  std::optional<std::size_t> paths;
  std::optional<std::size_t> words;
};

struct Output {
  Json report;
  std::vector<std::pair<std::string, std::string>> tables;  // file name, CSV text
  int exit_code = kPass;
};

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"analyze",  "distance", "volumes",     "heat-verify", "poisson-verify",
                                          "poincare", "riesz",    "mc-compare",  "transference", "certify"};
  return c;
}

/// Default pass limits. Only the algebraic and exact checks have limits
/// forced by theory; the rest are calibration choices.
inline const std::map<std::string, double>& default_limits() {
  static const std::map<std::string, double> m{
      {"doubling.sup", 100},
      {"gaussian-upper.C", 100},
      {"gaussian-lower.c", 1e-3},
      {"gaussian-on-diagonal.ratio", 50},
      {"poisson-subordination.deviation", 1e-6},
      {"poisson-time-doubling.C", 16},
      {"poisson-gradient.sup", 10},
      {"harnack.C", 100},
      {"harnack.c", 100},
      {"poincare.C", 10},
      {"riesz-p.C", 10},
      {"mc-kernel.tv", 0.05},
      {"mc-moment.z", 3},
      {"transference.allowance", 0.05},
  };
  return m;
}

/// Reads a JSON object of limit overrides; keys must be known, values
/// positive numbers.
inline std::map<std::string, double> parse_ceilings(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw InvalidInput(std::string("ceilings: ") + e.what());
  }
  if (!j.is_object()) throw InvalidInput("ceilings: expected a JSON object");
  std::map<std::string, double> out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!default_limits().count(it.key())) throw InvalidInput("ceilings: unknown key '" + it.key() + "'");
    if (!it.value().is_number()) throw InvalidInput("ceilings: '" + it.key() + "' must be a number");
    double v = it.value().get<double>();
    if (!(v > 0) || !std::isfinite(v)) throw InvalidInput("ceilings: '" + it.key() + "' must be positive");
    out[it.key()] = v;
  }
  return out;
}

inline std::map<std::string, double> parse_ceilings_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InvalidInput("cannot open ceilings file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_ceilings(ss.str());
}

namespace detail {

struct Loaded {
  FieldSystem system;
  std::vector<std::vector<Rational>> certificate;
  Json identity;
};

inline Loaded load(const RunConfig& c) {
  if (c.builtin.empty() == c.system_file.empty()) throw InvalidInput("give exactly one of --system and --builtin");
  if (!c.builtin.empty()) {
    auto e = builtin_entry(c.builtin, c.params);
    Json params = Json::object();
    if (c.builtin == "grushin") params["k"] = c.params.k;
    if (c.builtin == "euclidean") params["n"] = c.params.n;
    if (c.builtin == "poly_omega" || c.builtin == "multi_omega") params["omegas"] = c.params.omegas;
    Json id{{"builtin", c.builtin}, {"params", params}, {"name", e.system.name()}};
    return {std::move(e.system), std::move(e.certificate_points), std::move(id)};
  }
  FieldSystem s = load_system(c.system_file);
  std::vector<Rational> origin(s.dim(), Rational(0));
  Json id{{"file_text", s.to_string()}, {"name", s.name()}};
  return {std::move(s), {origin}, std::move(id)};
}

inline double limit(const RunConfig& c, const std::string& key) {
  auto it = c.ceilings.find(key);
  return it != c.ceilings.end() ? it->second : default_limits().at(key);
}

/// A claim id is selected by its own name or by the prefix before a dash.
inline bool wanted(const RunConfig& c, const std::string& id) {
  if (c.claims.empty()) return true;
  for (const auto& w : c.claims)
    if (id == w || id.rfind(w + "-", 0) == 0) return true;
  return false;
}

inline bool any_wanted(const RunConfig& c, std::initializer_list<const char*> ids) {
  for (const char* id : ids)
    if (wanted(c, id)) return true;
  return false;
}

inline void check_point(const FieldSystem& s, const std::vector<double>& p, const char* what) {
  if (p.size() != s.dim()) throw InvalidInput(std::string(what) + " has the wrong dimension");
}

inline std::vector<HeatLevel> heat_levels(const RunConfig& c, std::vector<HeatLevel> def, bool eigen_first) {
  if (c.grid.empty()) return def;
  std::vector<HeatLevel> out;
  for (std::size_t i = 0; i < c.grid.size(); ++i)
    out.push_back({c.grid[i], eigen_first && i == 0 ? HeatMethod::Eigen : HeatMethod::Krylov});
  return out;
}

inline Json config_json(const RunConfig& c, const Json& identity) {
  Json j{{"command", c.command}, {"system", identity}, {"grid", c.grid}, {"eps_ladder", num_array(c.eps_ladder)},
         {"seed", c.seed},       {"claims", c.claims}};
  Json lim = Json::object();
  for (const auto& [k, v] : default_limits()) lim[k] = num(limit(c, k));
  j["limits"] = lim;
  Json ov = Json::object();
  if (c.source) ov["source"] = num_array(*c.source);
  if (c.radii) ov["radii"] = num_array(*c.radii);
  if (c.time) ov["time"] = num(*c.time);
  if (c.paths) ov["paths"] = *c.paths;
  if (c.words) ov["words"] = *c.words;
  j["overrides"] = ov;
  return j;
}

// ---------------------------------------------------------------- stages

inline void stage_analyze(const RunConfig& c, const Loaded& l, Json& claims, bool& gate) {
  const FieldSystem& s = l.system;
  auto cr = close(s);
  Json closure = to_json(cr);
  if (cr.closed()) closure["nilpotency"] = to_json(nilpotency(cr));
  claims.push_back(claim_record("closure", cr.closed(), closure));
  claims.push_back(claim_record("skew-adjoint", true, {{"fields", s.size()}, {"measure", "lebesgue"}}));
  bool ok = cr.closed();
  if (cr.closed()) {
    bool lie = structure_is_lie(cr.structure);
    claims.push_back(claim_record("jacobi", lie));
    auto tr = type_r(cr, 200, 1e-9, c.seed);
    claims.push_back(claim_record("type-r", tr.passed(), to_json(tr)));
    auto hv = hormander(cr, s, l.certificate, 20, c.seed);
    claims.push_back(claim_record("hormander", hv.passed, to_json(hv)));
    ok = lie && tr.passed() && hv.passed;
  } else {
    for (const char* id : {"jacobi", "type-r", "hormander"})
      claims.push_back(claim_record(id, false, {{"reason", "closure did not finish within budget"}}));
  }
  gate = ok;
}

inline DoublingProtocol doubling_protocol(const RunConfig& c, const FieldSystem& s) {
  auto d = protocol_for(s).doubling;
  if (!c.grid.empty()) {
    if (c.grid.size() < 2) throw InvalidInput("doubling needs at least two grid levels");
    if (!c.eps_ladder.empty() && c.eps_ladder.size() != c.grid.size())
      throw InvalidInput("--eps-ladder needs one value per grid level");
    d.ladder.clear();
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
      // default epsilon halves per level from 0.2
      double eps = c.eps_ladder.empty() ? 0.2 / static_cast<double>(1u << i) : c.eps_ladder[i];
      d.ladder.push_back({std::vector<std::size_t>(s.dim(), c.grid[i]), eps});
    }
  } else if (!c.eps_ladder.empty()) {
    if (c.eps_ladder.size() != d.ladder.size()) throw InvalidInput("--eps-ladder needs one value per grid level");
    for (std::size_t i = 0; i < d.ladder.size(); ++i) d.ladder[i].epsilon = c.eps_ladder[i];
  }
  if (c.radii) d.radii = *c.radii;
  if (c.source) {
    check_point(s, *c.source, "--source");
    d.centers = {*c.source};
  }
  return d;
}

inline void stage_doubling(const RunConfig& c, const FieldSystem& s, Json& claims, Output* out) {
  auto d = doubling_protocol(c, s);
  NumericSystem ns(s);
  auto rep = doubling_report(ns, d.centers, d.radii, d.ladder, d.stencil, d.drift_tol, d.window);
  double cap = limit(c, "doubling.sup");
  bool pass = rep.error.empty() && rep.all_stable && rep.sup_stable_ratio <= cap;
  Json body = to_json(rep);
  body["ceiling"] = num(cap);
  body["limit_origin"] = "calibration";
  body["drift_tolerance"] = num(d.drift_tol);
  claims.push_back(claim_record("doubling", pass, body));
  if (out) {
    const auto& last = d.ladder.back();
    std::vector<double> both = d.radii;
    for (double r : d.radii) both.push_back(2 * r);
    auto t = volume_table(ns, ladder_grid(ns, last, d.window), d.centers, both, last.epsilon, d.stencil);
    out->tables.push_back({"volumes.csv", volume_csv(t)});
  }
}

inline HeatProtocol heat_protocol(const RunConfig& c, const FieldSystem& s) {
  auto h = protocol_for(s).heat;
  if (c.source) {
    check_point(s, *c.source, "--source");
    h.sources = {*c.source};
  }
  return h;
}

inline void stage_gaussian(const RunConfig& c, const FieldSystem& s, Json& claims, Output* out) {
  auto hp = heat_protocol(c, s);
  HeatLadder h(s, heat_levels(c, hp.levels, false));
  GaussianSpec g;
  g.sources = hp.sources;
  g.distance = hp.distance;
  g.upper_ceiling = limit(c, "gaussian-upper.C");
  g.lower_floor = limit(c, "gaussian-lower.c");
  g.diagonal_ceiling = limit(c, "gaussian-on-diagonal.ratio");
  for (const auto& r : gaussian_reports(h, g))
    if (wanted(c, r.claim)) claims.push_back(claim_record(r));
  if (out) {
    const auto& gen = h.level(0);
    auto k = heat_kernel(gen, gen.grid().nearest(hp.sources.front()), c.time.value_or(0.5), h.method(0));
    out->tables.push_back({"heat_kernel.csv", grid_csv(gen.grid(), {k.values.data(), static_cast<std::size_t>(k.values.size())}, "h")});
  }
}

inline void stage_poisson(const RunConfig& c, const FieldSystem& s, Json& claims, Output* out) {
  auto hp = heat_protocol(c, s);
  HeatLadder h(s, heat_levels(c, hp.levels, false));
  const auto& gen = h.level(0);
  const std::size_t y = gen.grid().nearest(hp.sources.front());
  if (wanted(c, "poisson-subordination")) {
    double t = hp.poisson_times.front();
    Json body{{"t", num(t)}, {"nodes", gen.size()}};
    bool pass = false;
    if (gen.size() <= gen.options().eigen_max_nodes) {
      auto spec = poisson_spectral(gen, y, t);
      auto sub = poisson_subordination(gen, y, t, HeatMethod::Eigen);
      double dev = (sub.values - spec.values).cwiseAbs().maxCoeff() / spec.values.cwiseAbs().maxCoeff();
      double cap = limit(c, "poisson-subordination.deviation");
      pass = dev <= cap;
      body["deviation"] = num(dev);
      body["quadrature_residual"] = num(sub.residual);
      body["ceiling"] = num(cap);
    } else {
      body["reason"] = "coarse level exceeds the eigen node limit";
    }
    claims.push_back(claim_record("poisson-subordination", pass, body));
    if (out) {
      auto p = poisson_spectral(gen, y, t);
      out->tables.push_back({"poisson_kernel.csv", grid_csv(gen.grid(), {p.values.data(), static_cast<std::size_t>(p.values.size())}, "p")});
    }
  }
  if (any_wanted(c, {"poisson-time-doubling", "poisson-gradient"})) {
    PoissonSpec p;
    p.sources = hp.sources;
    p.times = hp.poisson_times;
    p.distance = hp.distance;
    p.doubling_ceiling = limit(c, "poisson-time-doubling.C");
    p.gradient_ceiling = limit(c, "poisson-gradient.sup");
    for (const auto& r : poisson_reports(h, p))
      if (wanted(c, r.claim)) claims.push_back(claim_record(r));
  }
  if (wanted(c, "harnack")) {
    HarnackSpec p;
    p.sources = hp.sources;
    p.times = hp.harnack_times;
    p.distance = hp.distance;
    p.C_ceiling = limit(c, "harnack.C");
    p.c_ceiling = limit(c, "harnack.c");
    claims.push_back(claim_record(harnack_report(h, p)));
  }
}

inline void stage_poincare(const RunConfig& c, const FieldSystem& s, Json& claims) {
  auto hp = heat_protocol(c, s);
  HeatLadder h(s, heat_levels(c, hp.levels, false));
  PoincareSpec p;
  p.centers = hp.poincare_centers;
  if (c.source) p.centers = {*c.source};
  p.radii = c.radii.value_or(hp.poincare_radii);
  p.epsilons = hp.poincare_epsilons;
  if (!c.eps_ladder.empty()) p.epsilons = c.eps_ladder;
  if (p.epsilons.size() != h.size()) {
    if (!c.eps_ladder.empty()) throw InvalidInput("--eps-ladder needs one value per grid level");
    std::vector<double> e;
    for (std::size_t i = 0; i < h.size(); ++i) e.push_back(0.05 / static_cast<double>(1u << i));
    p.epsilons = e;
  }
  p.seed = c.seed;
  p.ceiling = limit(c, "poincare.C");
  claims.push_back(claim_record(poincare_report(h, p)));
}

inline void stage_riesz(const RunConfig& c, const FieldSystem& s, Json& claims) {
  auto hp = heat_protocol(c, s);
  HeatLadder h(s, heat_levels(c, hp.riesz_levels, true));
  if (h.level(0).size() > h.level(0).options().eigen_max_nodes)
    throw InvalidInput("riesz: the first grid level must allow the eigen method");
  RieszSpec r;
  r.seed = c.seed;
  r.ceiling = limit(c, "riesz-p.C");
  if (!wanted(c, "riesz-p")) r.p_list.clear();
  for (const auto& rep : riesz_reports(h, r))
    if (wanted(c, rep.claim)) claims.push_back(claim_record(rep));
}

/// Closed-form second moments available for the flat and Grushin systems
/// started at the origin.
inline void stage_moments(const RunConfig& c, const FieldSystem& s, double t, Json& claims) {
  const std::string& name = s.name();
  const bool flat = name == "euclidean", grushin = name.rfind("grushin(", 0) == 0;
  if (!flat && !grushin) return;
  NumericSystem ns(s);
  std::vector<double> origin(s.dim(), 0.0);
  const std::size_t n = 100000;
  const int steps = 400;
  auto b = sample_paths(ns, origin, t, steps, n, stream_seed(c.seed, 1));
  double zmax = limit(c, "mc-moment.z");
  Json ms = Json::array();
  bool pass = b.escaped == 0;
  auto add = [&](const std::string& what, double target, const MomentEstimate& m) {
    double z = (m.mean - target) / m.std_error;
    pass = pass && std::abs(z) <= zmax;
    ms.push_back({{"moment", what}, {"target", num(target)}, {"estimate", to_json(m)}, {"z", num(z)}});
  };
  if (flat) {
    for (std::size_t i = 0; i < s.dim(); ++i)
      for (std::size_t j = i; j < s.dim(); ++j)
        add("x" + std::to_string(i + 1) + "*x" + std::to_string(j + 1), i == j ? 2 * t : 0.0,
            endpoint_moment(b, [i, j](const double* e) { return e[i] * e[j]; }));
  } else {
    // E[y_t^2] = 2 int_0^t E[x_s^(2k)] ds = 2 (2k-1)!! 2^k t^(k+1) / (k+1)
    int k = 0;
    for (std::size_t i = 8; i < name.size() && std::isdigit(static_cast<unsigned char>(name[i])); ++i)
      k = 10 * k + (name[i] - '0');
    double dfact = 1;
    for (int j = 2 * k - 1; j > 1; j -= 2) dfact *= j;
    double target = 2 * dfact * std::pow(2.0, k) * std::pow(t, k + 1) / (k + 1);
    add("x1*x1", 2 * t, endpoint_moment(b, [](const double* e) { return e[0] * e[0]; }));
    add("x2*x2", target, endpoint_moment(b, [](const double* e) { return e[1] * e[1]; }));
  }
  claims.push_back(claim_record("mc-moment", pass,
                                {{"t", num(t)}, {"paths", n}, {"steps", steps}, {"escaped", b.escaped},
                                 {"z_limit", num(zmax)}, {"moments", ms}}));
}

inline void stage_mc(const RunConfig& c, const FieldSystem& s, Json& claims, Output* out) {
  auto op = protocol_for(s).oracle;
  double t = c.time.value_or(op.t);
  if (!(t > 0)) throw InvalidInput("--time must be positive");
  if (wanted(c, "mc-kernel")) {
    auto ns = NumericSystem::periodic_embedding(s);
    std::size_t n = c.grid.empty() ? op.grid : c.grid.back();
    GridSpec g = GridSpec::over(ns, n);
    std::vector<double> start = c.source.value_or(op.start);
    check_point(s, start, "--source");
    std::size_t node = g.nearest(start);
    start = g.point(node);
    std::size_t paths = c.paths.value_or(op.paths);
    auto b = sample_paths(ns, start, t, op.steps, paths, c.seed);
    Vec hist = kernel_histogram(b, g);
    DiscreteGenerator gen(ns, g);
    auto k = heat_kernel(gen, node, t, HeatMethod::Krylov);
    double tv = compare_kernels(g, hist, gen.grid(), k);
    double cap = limit(c, "mc-kernel.tv");
    claims.push_back(claim_record("mc-kernel", tv <= cap && b.escaped == 0,
                                  {{"start", num_array(start)},
                                   {"t", num(t)},
                                   {"paths", paths},
                                   {"steps", op.steps},
                                   {"escaped", b.escaped},
                                   {"grid", to_json(g)},
                                   {"total_variation", num(tv)},
                                   {"ceiling", num(cap)},
                                   {"limit_origin", "calibration"}}));
    if (out) {
      out->tables.push_back({"mc_histogram.csv", grid_csv(g, {hist.data(), static_cast<std::size_t>(hist.size())}, "density")});
      out->tables.push_back({"pde_kernel.csv", grid_csv(g, {k.values.data(), static_cast<std::size_t>(k.values.size())}, "h")});
    }
  }
  if (wanted(c, "mc-moment")) stage_moments(c, s, t, claims);
}

inline void stage_transference(const RunConfig& c, const FieldSystem& s, Json& claims) {
  auto op = protocol_for(s).oracle;
  double allowance = limit(c, "transference.allowance");
  if (wanted(c, "transference")) {
    auto r = transference_check(s, c.words.value_or(op.words), op.max_len, c.seed, allowance);
    claims.push_back(claim_record("transference", r.n_passed == r.n_words && r.escapes == 0, to_json(r)));
  }
  if (wanted(c, "support")) {
    std::vector<double> x = c.source.value_or(op.start);
    check_point(s, x, "--source");
    double r = c.radii && !c.radii->empty() ? c.radii->front() : op.support_radius;
    auto sr = support_check_qr(s, x, r, op.support_words, c.seed, allowance);
    claims.push_back(claim_record("support", sr.passed, to_json(sr)));
  }
}

inline void stage_distance(const RunConfig& c, const FieldSystem& s, Json& claims, Output* out) {
  NumericSystem ns(s);
  std::size_t n = c.grid.empty() ? (s.dim() <= 2 ? 257 : 65) : c.grid.back();
  double eps = c.eps_ladder.empty() ? 0.05 : c.eps_ladder.back();
  std::vector<double> src = c.source.value_or(protocol_for(s).oracle.start);
  check_point(s, src, "--source");
  GridSpec g = GridSpec::over(ns, std::vector<std::size_t>(s.dim(), n));
  auto df = distance_field(ns, g, src, eps, 2);
  double dmax = 0;
  std::size_t unreached = 0;
  for (double v : df.values) {
    if (std::isfinite(v)) dmax = std::max(dmax, v);
    else ++unreached;
  }
  claims.push_back(claim_record("distance-field", unreached == 0,
                                {{"grid", to_json(g)},
                                 {"source", num_array(g.point(df.source))},
                                 {"epsilon", num(eps)},
                                 {"stencil_radius", df.stencil_radius},
                                 {"max_distance", num(dmax)},
                                 {"unreached", unreached}}));
  if (out) out->tables.push_back({"distance.csv", grid_csv(g, df.values, "d")});
}

}  // namespace detail

/// Runs one subcommand. Invalid input surfaces as exit code 2 with the
/// message in the report; other failures as exit code 1.
inline Output run(const RunConfig& cfg) {
  Output out;
  Json claims = Json::array();
  Json identity = Json::object();
  Json extra = Json::object();
  try {
    bool known = false;
    for (const auto& c : commands()) known = known || c == cfg.command;
    if (!known) throw InvalidInput("unknown command '" + cfg.command + "'");
    for (auto n : cfg.grid)
      if (n < 8) throw InvalidInput("grid levels need at least 8 nodes per axis");
    for (double e : cfg.eps_ladder)
      if (!(e > 0)) throw InvalidInput("epsilons must be positive");
    auto l = detail::load(cfg);
    identity = l.identity;
    const FieldSystem& s = l.system;
    const std::string& cmd = cfg.command;
    if (cmd == "analyze") {
      bool gate = false;
      detail::stage_analyze(cfg, l, claims, gate);
    } else if (cmd == "distance") {
      detail::stage_distance(cfg, s, claims, &out);
    } else if (cmd == "volumes") {
      detail::stage_doubling(cfg, s, claims, &out);
    } else if (cmd == "heat-verify") {
      detail::stage_gaussian(cfg, s, claims, &out);
    } else if (cmd == "poisson-verify") {
      detail::stage_poisson(cfg, s, claims, &out);
    } else if (cmd == "poincare") {
      detail::stage_poincare(cfg, s, claims);
    } else if (cmd == "riesz") {
      detail::stage_riesz(cfg, s, claims);
    } else if (cmd == "mc-compare") {
      detail::stage_mc(cfg, s, claims, &out);
    } else if (cmd == "transference") {
      detail::stage_transference(cfg, s, claims);
    } else if (cmd == "certify") {
      // hypotheses gate the conclusions
      bool gate = false;
      detail::stage_analyze(cfg, l, claims, gate);
      extra["hypotheses"] = gate ? "pass" : "fail";
      if (gate) {
        if (detail::wanted(cfg, "doubling")) detail::stage_doubling(cfg, s, claims, nullptr);
        if (detail::any_wanted(cfg, {"gaussian-upper", "gaussian-lower", "gaussian-on-diagonal"}))
          detail::stage_gaussian(cfg, s, claims, nullptr);
        if (detail::any_wanted(cfg, {"poisson-subordination", "poisson-time-doubling", "poisson-gradient", "harnack"}))
          detail::stage_poisson(cfg, s, claims, nullptr);
        if (detail::wanted(cfg, "poincare")) detail::stage_poincare(cfg, s, claims);
        if (detail::any_wanted(cfg, {"riesz-2", "riesz-p"})) detail::stage_riesz(cfg, s, claims);
        if (detail::any_wanted(cfg, {"mc-kernel", "mc-moment"})) detail::stage_mc(cfg, s, claims, nullptr);
        if (detail::any_wanted(cfg, {"transference", "support"})) detail::stage_transference(cfg, s, claims);
      }
    }
    if (claims.empty()) throw InvalidInput("--claims selects nothing for '" + cmd + "'");
    out.report = envelope(cmd, detail::config_json(cfg, identity), claims, extra);
    out.exit_code = out.report["verdict"] == "pass" ? kPass : kFail;
  } catch (const std::exception& e) {
    bool invalid = dynamic_cast<const InvalidInput*>(&e) || dynamic_cast<const SystemError*>(&e) ||
                   dynamic_cast<const ParseError*>(&e) || dynamic_cast<const UnknownBuiltin*>(&e);
    extra["error"] = e.what();
    Json cfg_json = detail::config_json(cfg, identity);
    out.report = envelope(cfg.command, cfg_json, claims, extra);
    out.report["verdict"] = "fail";
    out.exit_code = invalid ? kInvalid : kFail;
    out.tables.clear();
  }
  return out;
}

/// One line per claim for terminal output.
inline std::string summary(const Json& report) {
  std::string s;
  for (const auto& c : report["claims"])
    s += std::string(c["passed"].get<bool>() ? "pass  " : "FAIL  ") + c["claim"].get<std::string>() + "\n";
  if (report.contains("error")) s += "error: " + report["error"].get<std::string>() + "\n";
  s += "verdict: " + report["verdict"].get<std::string>() + "\n";
  return s;
}

}  // namespace grushin::cli

#endif  // GRUSHIN_CLI_HPP
