// Structured reports: deterministic JSON records and CSV tables.
#ifndef GRUSHIN_REPORT_HPP
#define GRUSHIN_REPORT_HPP

#include "grushin/bounds.hpp"
#include "grushin/liealg.hpp"
#include "grushin/metric.hpp"
#include "grushin/stochastic.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace grushin {

using Json = nlohmann::ordered_json;

/// Version tag per module; bumped whenever a module's report content changes.
inline const Json& module_versions() {
  static const Json v = {{"expr", "1.0"},  {"fields", "1.0"},     {"liealg", "1.0"}, {"metric", "1.0"},
                         {"heat", "1.0"}, {"stochastic", "1.0"}, {"cli", "1.0"}};
  return v;
}

inline std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i) os << std::setw(2) << static_cast<int>(md[i]);
  return os.str();
}

/// Finite doubles as numbers; non-finite values as the strings "nan", "inf"
/// and "-inf" so that no information is lost to null.
inline Json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline Json num_array(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

inline Json rational_array(const std::vector<Rational>& v) {
  Json a = Json::array();
  for (const auto& x : v) a.push_back(to_string(x));
  return a;
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// ------------------------------------------------------------------ algebra

inline Json to_json(const ClosureResult& c) {
  Json j;
  j["status"] = to_string(c.status);
  j["dimension"] = c.dim();
  Json basis = Json::array();
  for (std::size_t i = 0; i < c.basis.size(); ++i)
    basis.push_back({{"index", i}, {"depth", c.bracket_depth[i]}, {"field", c.basis[i].to_string()}});
  j["basis"] = basis;
  Json sc = Json::array();
  for (std::size_t a = 0; a < c.structure.size(); ++a)
    for (std::size_t b = 0; b < c.structure[a].size(); ++b)
      for (std::size_t m = 0; m < c.structure[a][b].size(); ++m)
        if (a < b && c.structure[a][b][m] != 0) sc.push_back({a, b, m, to_string(c.structure[a][b][m])});
  j["structure_constants"] = sc;
  Json gc = Json::array();
  for (const auto& g : c.generator_coords) gc.push_back(rational_array(g));
  j["generator_coordinates"] = gc;
  return j;
}

inline Json to_json(const Nilpotency& n) {
  Json j{{"nilpotent", n.nilpotent}};
  if (n.nilpotent) j["step"] = n.step;
  j["series_dimensions"] = n.series_dims;
  return j;
}

inline Json to_json(const TypeRVerdict& v) {
  Json j{{"kind", to_string(v.kind)}, {"passed", v.passed()}, {"samples", v.n_samples},
         {"tolerance", num(v.tolerance)}, {"max_real_part", num(v.max_real_part)}};
  if (v.kind == TypeRVerdict::Kind::Counterexample) {
    j["witness"] = rational_array(v.witness);
    j["eigenvalue"] = {num(v.eigenvalue.real()), num(v.eigenvalue.imag())};
  }
  return j;
}

inline Json to_json(const HormanderVerdict& v) {
  Json j{{"passed", v.passed}, {"min_rank", v.min_rank}, {"points_checked", v.points_checked},
         {"exact_points", v.exact_points}};
  if (!v.passed) j["rank_drop_point"] = num_array(v.rank_drop_point);
  return j;
}

// ------------------------------------------------------------------- metric

inline Json to_json(const GridSpec& g) {
  Json axes = Json::array();
  for (std::size_t a = 0; a < g.dim(); ++a)
    axes.push_back({{"nodes", g.counts[a]}, {"lo", num(g.lo[a])}, {"hi", num(g.hi[a])},
                    {"spacing", num(g.spacing(a))}, {"periodic", static_cast<bool>(g.periodic[a])}});
  return axes;
}

inline Json to_json(const DoublingReport& r) {
  Json cells = Json::array();
  for (const auto& c : r.cells)
    cells.push_back({{"center", num_array(c.center)}, {"r", num(c.r)}, {"ratios", num_array(c.ratios)},
                     {"drift", num(c.drift)}, {"stable", c.stable}});
  Json j{{"sup_stable_ratio", num(r.sup_stable_ratio)}, {"exponent", num(r.exponent)},
         {"excluded", r.excluded}, {"all_stable", r.all_stable}, {"cells", cells}};
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

inline Json to_json(const VolumeTable& t) {
  Json rows = Json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"center", num_array(r.center)}, {"r", num(r.r)}, {"volume", num(r.volume)}, {"interior", r.interior}});
  return {{"epsilon", num(t.epsilon)}, {"stencil_radius", t.stencil_radius}, {"grid", to_json(t.grid)}, {"rows", rows}};
}

// ------------------------------------------------------------------- bounds

inline Json to_json(const Extremizer& e) {
  Json j = Json::object();
  if (!e.x.empty()) j["x"] = num_array(e.x);
  if (!e.y.empty()) j["y"] = num_array(e.y);
  if (e.t != 0) j["t"] = num(e.t);
  if (e.r != 0) j["r"] = num(e.r);
  if (e.function != 0 || (e.x.empty() && e.y.empty())) j["function"] = e.function;
  return j;
}

inline Json to_json(const BoundConstant& c) {
  Json levels = Json::array();
  for (const auto& l : c.levels) levels.push_back({{"nodes", l.nodes}, {"value", num(l.value)}, {"at", to_json(l.at)}});
  Json j{{"name", c.name}, {"kind", c.is_sup ? "sup" : "inf"}, {"value", num(c.value())}};
  if (c.ceiling) {
    j[c.is_sup ? "ceiling" : "floor"] = num(*c.ceiling);
    j["limit_origin"] = "calibration";
  }
  j["drift"] = num(c.drift);
  j["stable"] = c.stable;
  j["within_limit"] = c.within;
  j["levels"] = levels;
  return j;
}

inline Json to_json(const BoundReport& r) {
  Json cs = Json::array();
  for (const auto& c : r.constants) cs.push_back(to_json(c));
  Json j{{"claim", r.claim},         {"passed", r.passed},         {"stable", r.stable},
         {"samples", r.samples},     {"excluded", r.excluded},     {"drift_tolerance", num(r.drift_tol)},
         {"constants", cs}};
  if (!r.notes.empty()) j["notes"] = r.notes;
  return j;
}

// --------------------------------------------------------------- stochastic

inline Json to_json(const Word& w) {
  Json a = Json::array();
  for (const auto& [i, t] : w.letters) a.push_back({i, num(t)});
  return a;
}

inline Json to_json(const TransferenceReport& r, bool with_cases = true) {
  Json j{{"words", r.n_words}, {"passed", r.n_passed},   {"pass_rate", num(r.pass_rate())},
         {"escapes", r.escapes}, {"allowance", num(r.allowance)}, {"max_ratio", num(r.max_ratio)}};
  if (with_cases) {
    Json cs = Json::array();
    for (const auto& c : r.cases)
      cs.push_back({{"x", num_array(c.x)}, {"word", to_json(c.word)}, {"length", num(c.length)},
                    {"distance", num(c.distance)}, {"passed", c.passed}});
    j["cases"] = cs;
  }
  return j;
}

inline Json to_json(const SupportReport& r) {
  return {{"x", num_array(r.x)},           {"r", num(r.r)},       {"words", r.n_words},
          {"inside", r.inside},            {"max_distance", num(r.max_distance)}, {"passed", r.passed}};
}

inline Json to_json(const MomentEstimate& m) { return {{"mean", num(m.mean)}, {"std_error", num(m.std_error)}}; }

// ----------------------------------------------------------------- envelope

/// A claim record: id, pass flag and claim-specific content.
inline Json claim_record(const std::string& id, bool passed, Json body = Json::object()) {
  Json j{{"claim", id}, {"passed", passed}};
  for (auto it = body.begin(); it != body.end(); ++it)
    if (it.key() != "claim" && it.key() != "passed") j[it.key()] = it.value();
  return j;
}

inline Json claim_record(const BoundReport& r) { return to_json(r); }

/// Top-level report: command, effective configuration, its SHA-256 over the
/// compact serialization, module versions, claim records and the verdict
/// (pass iff every claim passes).
inline Json envelope(const std::string& command, const Json& config, const Json& claims, Json extra = Json::object()) {
  bool pass = !claims.empty();
  for (const auto& c : claims) pass = pass && c.at("passed").get<bool>();
  Json j{{"tool", "grushin"}, {"command", command}, {"config", config},
         {"config_hash", sha256_hex(config.dump())}, {"versions", module_versions()}};
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  j["claims"] = claims;
  j["verdict"] = pass ? "pass" : "fail";
  return j;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << text;
}

inline std::string grid_csv(const GridSpec& g, std::span<const double> values, const std::string& name) {
  std::ostringstream os;
  write_grid_csv(os, g, values, name);
  return os.str();
}

inline std::string volume_csv(const VolumeTable& t) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t a = 0; a < t.grid.dim(); ++a) os << "c" << a + 1 << ",";
  os << "r,volume,interior\n";
  for (const auto& r : t.rows) {
    for (double c : r.center) os << c << ",";
    os << r.r << "," << r.volume << "," << (r.interior ? 1 : 0) << "\n";
  }
  return os.str();
}

}  // namespace grushin

#endif  // GRUSHIN_REPORT_HPP
