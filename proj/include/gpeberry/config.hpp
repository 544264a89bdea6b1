#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpeberry/grid.hpp"
#include "gpeberry/hes.hpp"
#include "gpeberry/oracle.hpp"
#include "gpeberry/params.hpp"

namespace gpeberry {

using json = nlohmann::json;

struct PropagatorSettings {
  double dt = 0.01;
  Scheme scheme = Scheme::implicit_midpoint;
  int self_consistency_iters = 2;
  double max_norm_drift = 1e-4;
  double max_boundary_ratio = 1e-12;
  bool energy_shift = true;
  std::size_t observe_every = 0;
};

struct HesSettings {
  double dt = 0.0;     // 0: default_hes_dt
  double t_end = 0.0;  // 0: one period T
  std::optional<MomentState> initial;
  int stationary_n = 0;
};

struct GermSettings {
  double dt = 0.0;
  double t_end = 0.0;
};

struct SurfaceSettings {
  std::size_t n_u = 256;
  std::size_t n_s = 256;
};

// Everything a CLI run needs, validated before any computation.
struct RunConfig {
  PhysicalScales scales = PhysicalScales::unit_norm(1.0, 0.0);
  ParameterPath path = ParameterPath::constant(ParameterSet{}, 1.0);
  bool frozen = true;  // given as "params" rather than "loop"
  int n_max = 5;
  std::vector<int> n_list{0};
  std::vector<double> T_list;
  std::optional<SpatialGrid> grid;
  GridOptions grid_options;
  PropagatorSettings propagator;
  HesSettings hes;
  GermSettings germ;
  SurfaceSettings surface;
  std::size_t n_samples = 1024;
  double resolution_tol = 1e-6;
  std::string golden;

  ParameterSet initial_parameters() const { return path.at(0.0); }
  double period() const { return path.period(); }
};

namespace config_detail {

inline void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError((where.empty() ? std::string("config") : where) + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; });
    if (!ok) throw ConfigError("unknown key '" + (where.empty() ? "" : where + ".") + it.key() + "'");
  }
}

inline std::string path_of(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError("key '" + where + "' must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError("key '" + where + "' must be finite");
  return v;
}

inline long integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError("key '" + where + "' must be an integer");
  return j.get<long>();
}

inline std::size_t count(const json& j, const std::string& where) {
  const long v = integer(j, where);
  if (v <= 0) throw ConfigError("key '" + where + "' must be positive");
  return std::size_t(v);
}

inline std::vector<double> numbers(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError("key '" + where + "' must be an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

inline double opt_number(const json& j, const char* key, double def, const std::string& where) {
  return j.contains(key) ? number(j.at(key), path_of(where, key)) : def;
}

// A coefficient is a number, {const, cos_coeffs, sin_coeffs}, or {samples}.
inline FourierSeries coefficient(const json& j, const std::string& where) {
  FourierSeries fs;
  if (j.is_number()) {
    fs.constant = number(j, where);
    return fs;
  }
  reject_unknown(j, {"const", "cos_coeffs", "sin_coeffs", "samples"}, where);
  if (j.contains("samples")) {
    if (j.contains("const") || j.contains("cos_coeffs") || j.contains("sin_coeffs"))
      throw ConfigError("key '" + where + "': samples cannot be combined with Fourier coefficients");
    const auto s = numbers(j.at("samples"), path_of(where, "samples"));
    if (s.empty()) throw ConfigError("key '" + path_of(where, "samples") + "' must not be empty");
    return FourierSeries::interpolate(s);
  }
  fs.constant = opt_number(j, "const", 0.0, where);
  if (j.contains("cos_coeffs")) fs.cos_coeffs = numbers(j.at("cos_coeffs"), path_of(where, "cos_coeffs"));
  if (j.contains("sin_coeffs")) fs.sin_coeffs = numbers(j.at("sin_coeffs"), path_of(where, "sin_coeffs"));
  return fs;
}

inline ParameterSet parameter_set(const json& j, const std::string& where) {
  reject_unknown(j, {"mu", "sigma", "rho", "a", "b", "c"}, where);
  ParameterSet R{1.0, 1.0, 0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < ParameterSet::size; ++i) {
    const char* k = ParameterSet::names[i];
    if (j.contains(k)) R[i] = number(j.at(k), path_of(where, k));
  }
  return R;
}

inline MomentState moment_state(const json& j, const std::string& where) {
  reject_unknown(j, {"p", "x", "sigma_pp", "sigma_xp", "sigma_xx"}, where);
  MomentState g;
  g.p = opt_number(j, "p", 0.0, where);
  g.x = opt_number(j, "x", 0.0, where);
  g.sigma_pp = opt_number(j, "sigma_pp", 0.0, where);
  g.sigma_xp = opt_number(j, "sigma_xp", 0.0, where);
  g.sigma_xx = opt_number(j, "sigma_xx", 0.0, where);
  if (g.sigma_pp < 0.0 || g.sigma_xx < 0.0) throw ConfigError("key '" + where + "': variances must be >= 0");
  return g;
}

}  // namespace config_detail

inline RunConfig parse_config(const json& j) {
  using namespace config_detail;
  reject_unknown(j,
                 {"hbar", "kappa_tilde", "period_T", "n_samples", "warp", "loop", "params", "n_max", "n_list",
                  "T_list", "grid", "propagator", "hes", "germ", "surface", "resolution_tol", "golden"},
                 "");
  RunConfig c;
  const double hbar = opt_number(j, "hbar", 1.0, "");
  const double kt = opt_number(j, "kappa_tilde", 0.0, "");
  c.scales = PhysicalScales::unit_norm(hbar, kt);
  const double T = opt_number(j, "period_T", 1.0, "");
  if (!(T > 0.0)) throw ConfigError("key 'period_T' must be positive");
  const double warp = opt_number(j, "warp", 0.0, "");
  if (!(warp >= 0.0 && warp <= 1.0)) throw ConfigError("key 'warp' must lie in [0, 1]");
  if (j.contains("n_samples")) c.n_samples = count(j.at("n_samples"), "n_samples");

  if (j.contains("loop") == j.contains("params")) throw ConfigError("exactly one of 'loop' or 'params' is required");
  if (j.contains("params")) {
    c.frozen = true;
    c.path = ParameterPath::constant(parameter_set(j.at("params"), "params"), T);
  } else {
    c.frozen = false;
    const json& L = j.at("loop");
    reject_unknown(L, {"mu", "sigma", "rho", "a", "b", "c"}, "loop");
    std::array<FourierSeries, 6> coeffs;
    const ParameterSet defaults{1.0, 1.0, 0.0, 0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < 6; ++i) {
      const char* k = ParameterSet::names[i];
      if (L.contains(k))
        coeffs[i] = coefficient(L.at(k), path_of("loop", k));
      else
        coeffs[i].constant = defaults[i];
    }
    c.path = ParameterPath(std::move(coeffs), T, warp);
  }

  if (j.contains("n_max")) {
    const long v = integer(j.at("n_max"), "n_max");
    if (v < 0 || v > 64) throw ConfigError("key 'n_max' must lie in [0, 64]");
    c.n_max = int(v);
  }
  if (j.contains("n_list")) {
    const json& a = j.at("n_list");
    if (!a.is_array() || a.empty()) throw ConfigError("key 'n_list' must be a non-empty array of integers");
    c.n_list.clear();
    for (std::size_t i = 0; i < a.size(); ++i) {
      const long v = integer(a[i], "n_list[" + std::to_string(i) + "]");
      if (v < 0 || v > c.n_max) throw ConfigError("key 'n_list[" + std::to_string(i) + "]' must lie in [0, n_max]");
      c.n_list.push_back(int(v));
    }
  }
  if (j.contains("T_list")) {
    c.T_list = numbers(j.at("T_list"), "T_list");
    for (double t : c.T_list)
      if (!(t > 0.0)) throw ConfigError("key 'T_list' entries must be positive");
  }
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    reject_unknown(g, {"x_min", "x_max", "n_points", "min_points", "max_points", "widths", "max_k_dx"}, "grid");
    const bool explicit_grid = g.contains("x_min") || g.contains("x_max") || g.contains("n_points");
    if (explicit_grid) {
      if (!(g.contains("x_min") && g.contains("x_max") && g.contains("n_points")))
        throw ConfigError("key 'grid': x_min, x_max and n_points must be given together");
      SpatialGrid sg{number(g.at("x_min"), "grid.x_min"), number(g.at("x_max"), "grid.x_max"),
                     count(g.at("n_points"), "grid.n_points")};
      sg.validate();
      c.grid = sg;
    }
    if (g.contains("min_points")) c.grid_options.min_points = count(g.at("min_points"), "grid.min_points");
    if (g.contains("max_points")) c.grid_options.max_points = count(g.at("max_points"), "grid.max_points");
    c.grid_options.widths = opt_number(g, "widths", c.grid_options.widths, "grid");
    c.grid_options.max_k_dx = opt_number(g, "max_k_dx", c.grid_options.max_k_dx, "grid");
    if (!(c.grid_options.widths > 0.0) || !(c.grid_options.max_k_dx > 0.0))
      throw ConfigError("key 'grid': widths and max_k_dx must be positive");
  }
  if (j.contains("propagator")) {
    const json& p = j.at("propagator");
    reject_unknown(p,
                   {"dt", "scheme", "self_consistency_iters", "max_norm_drift", "max_boundary_ratio", "energy_shift",
                    "observe_every"},
                   "propagator");
    auto& s = c.propagator;
    s.dt = opt_number(p, "dt", s.dt, "propagator");
    if (!(s.dt > 0.0)) throw ConfigError("key 'propagator.dt' must be positive");
    if (p.contains("scheme")) {
      if (!p.at("scheme").is_string()) throw ConfigError("key 'propagator.scheme' must be a string");
      s.scheme = parse_scheme(p.at("scheme").get<std::string>());
    }
    if (p.contains("self_consistency_iters")) {
      const long v = integer(p.at("self_consistency_iters"), "propagator.self_consistency_iters");
      if (v < 0 || v > 16) throw ConfigError("key 'propagator.self_consistency_iters' must lie in [0, 16]");
      s.self_consistency_iters = int(v);
    }
    s.max_norm_drift = opt_number(p, "max_norm_drift", s.max_norm_drift, "propagator");
    s.max_boundary_ratio = opt_number(p, "max_boundary_ratio", s.max_boundary_ratio, "propagator");
    if (p.contains("energy_shift")) {
      if (!p.at("energy_shift").is_boolean()) throw ConfigError("key 'propagator.energy_shift' must be a boolean");
      s.energy_shift = p.at("energy_shift").get<bool>();
    }
    if (p.contains("observe_every")) s.observe_every = count(p.at("observe_every"), "propagator.observe_every");
  }
  if (j.contains("hes")) {
    const json& h = j.at("hes");
    reject_unknown(h, {"dt", "t_end", "initial", "stationary_n"}, "hes");
    c.hes.dt = opt_number(h, "dt", 0.0, "hes");
    c.hes.t_end = opt_number(h, "t_end", 0.0, "hes");
    if (c.hes.dt < 0.0 || c.hes.t_end < 0.0) throw ConfigError("key 'hes': dt and t_end must be >= 0");
    if (h.contains("initial") && h.contains("stationary_n"))
      throw ConfigError("key 'hes': initial and stationary_n are exclusive");
    if (h.contains("initial")) c.hes.initial = moment_state(h.at("initial"), "hes.initial");
    if (h.contains("stationary_n")) {
      const long v = integer(h.at("stationary_n"), "hes.stationary_n");
      if (v < 0) throw ConfigError("key 'hes.stationary_n' must be >= 0");
      c.hes.stationary_n = int(v);
    }
  }
  if (j.contains("germ")) {
    const json& g = j.at("germ");
    reject_unknown(g, {"dt", "t_end"}, "germ");
    c.germ.dt = opt_number(g, "dt", 0.0, "germ");
    c.germ.t_end = opt_number(g, "t_end", 0.0, "germ");
    if (c.germ.dt < 0.0 || c.germ.t_end < 0.0) throw ConfigError("key 'germ': dt and t_end must be >= 0");
  }
  if (j.contains("surface")) {
    const json& s = j.at("surface");
    reject_unknown(s, {"n_u", "n_s"}, "surface");
    if (s.contains("n_u")) c.surface.n_u = count(s.at("n_u"), "surface.n_u");
    if (s.contains("n_s")) c.surface.n_s = count(s.at("n_s"), "surface.n_s");
  }
  c.resolution_tol = opt_number(j, "resolution_tol", c.resolution_tol, "");
  if (!(c.resolution_tol > 0.0)) throw ConfigError("key 'resolution_tol' must be positive");
  if (j.contains("golden")) {
    if (!j.at("golden").is_string()) throw ConfigError("key 'golden' must be a string");
    c.golden = j.at("golden").get<std::string>();
  }
  return c;
}

inline json read_json_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file '" + file + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + file + "' is not valid JSON: " + e.what());
  }
}

inline RunConfig load_config(const std::string& file) { return parse_config(read_json_file(file)); }

}  // namespace gpeberry
