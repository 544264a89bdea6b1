#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpeberry/config.hpp"
#include "gpeberry/germ.hpp"
#include "gpeberry/hes.hpp"
#include "gpeberry/oracle.hpp"
#include "gpeberry/phases.hpp"
#include "gpeberry/states.hpp"

namespace gpeberry {

inline json to_json(const ParameterSet& R) {
  json j;
  for (std::size_t i = 0; i < ParameterSet::size; ++i) j[ParameterSet::names[i]] = R[i];
  return j;
}

inline json to_json(const SpatialGrid& g) {
  return {{"x_min", g.x_min}, {"x_max", g.x_max}, {"n_points", g.n_points}, {"dx", g.dx()}};
}

inline json to_json(const ParameterPath& p) {
  json loop;
  for (std::size_t i = 0; i < ParameterSet::size; ++i) {
    const auto& fs = p.coefficients()[i];
    loop[ParameterSet::names[i]] = {{"const", fs.constant}, {"cos_coeffs", fs.cos_coeffs}, {"sin_coeffs", fs.sin_coeffs}};
  }
  json j{{"loop", loop}, {"period_T", p.period()}, {"warp", p.warp()}};
  if (p.is_reversed()) j["reversed"] = true;
  return j;
}

inline json to_json(const MomentState& g) {
  return {{"p", g.p}, {"x", g.x}, {"sigma_pp", g.sigma_pp}, {"sigma_xp", g.sigma_xp}, {"sigma_xx", g.sigma_xx}};
}

inline json to_json(const PropagationDiagnostics& d) {
  return {{"steps", d.steps},
          {"dt", d.dt},
          {"initial_norm_sq", d.initial_norm_sq},
          {"max_norm_drift", d.max_norm_drift},
          {"max_boundary_ratio", d.max_boundary_ratio},
          {"energy_times", d.energy_times},
          {"energy_trace", d.energy_trace}};
}

inline SpatialGrid grid_for(const RunConfig& cfg, const ParameterSet& R, int n_max) {
  return cfg.grid ? *cfg.grid : auto_grid(R, cfg.scales, n_max, 0.0, cfg.grid_options);
}

inline SpatialGrid grid_for(const RunConfig& cfg, const ParameterPath& path, int n_max) {
  return cfg.grid ? *cfg.grid : auto_grid_for_path(path, cfg.scales, n_max, cfg.grid_options);
}

// ---- spectrum ----

struct SpectrumRow {
  int n = 0;
  double energy = 0.0;
  double rayleigh = 0.0;
  double residual = 0.0;
};

struct SpectrumResult {
  ParameterSet R;
  SpatialGrid grid;
  std::vector<SpectrumRow> rows;
};

inline SpectrumResult run_spectrum(const RunConfig& cfg) {
  SpectrumResult out;
  out.R = cfg.initial_parameters();
  out.grid = grid_for(cfg, out.R, cfg.n_max);
  for (int n = 0; n <= cfg.n_max; ++n) {
    const auto psi = eigenstate(n, out.R, cfg.scales, out.grid);
    SpectrumRow row;
    row.n = n;
    row.energy = eigenvalue(n, out.R, cfg.scales);
    row.rayleigh = rayleigh_quotient(psi, out.R, cfg.scales, cfg.resolution_tol);
    row.residual = eigen_residual(psi, row.energy, out.R, cfg.scales, cfg.resolution_tol);
    out.rows.push_back(row);
  }
  return out;
}

// ---- HES and germ trajectories ----

// Initial moments: the configured state, else the stationary moments of
// the stationary_n-th state at R(0).
inline MomentState hes_initial(const RunConfig& cfg) {
  if (cfg.hes.initial) return *cfg.hes.initial;
  const ParameterSet R = cfg.initial_parameters();
  return closed_form_hes(stationary_constants(cfg.hes.stationary_n, R, cfg.scales), R, cfg.scales, 0.0);
}

inline HesTrajectory run_hes(const RunConfig& cfg) {
  const double t_end = cfg.hes.t_end > 0.0 ? cfg.hes.t_end : cfg.period();
  const double dt = cfg.hes.dt > 0.0 ? cfg.hes.dt : default_hes_dt(cfg.path, cfg.scales);
  const MomentState g0 = hes_initial(cfg);
  if (cfg.frozen) return integrate_hes(g0, Frozen{cfg.initial_parameters()}, 0.0, t_end, dt, cfg.scales);
  return integrate_hes(g0, AlongPath{&cfg.path}, 0.0, t_end, dt, cfg.scales);
}

inline GermTrajectory run_germ(const RunConfig& cfg) {
  const double t_end = cfg.germ.t_end > 0.0 ? cfg.germ.t_end : cfg.period();
  const double dt = cfg.germ.dt > 0.0 ? cfg.germ.dt : default_hes_dt(cfg.path, cfg.scales);
  const GermState a0 = floquet_solution(cfg.initial_parameters(), cfg.scales, 0.0);
  if (cfg.frozen) return integrate_variations(a0, Frozen{cfg.initial_parameters()}, 0.0, t_end, dt, cfg.scales);
  return integrate_variations(a0, AlongPath{&cfg.path}, 0.0, t_end, dt, cfg.scales);
}

// ---- closed-form phases ----

inline json run_hannay(const RunConfig& cfg) {
  const double theta = hannay_angle(cfg.path, cfg.scales, cfg.n_samples);
  json rows = json::array();
  for (int n : cfg.n_list) {
    const double g = berry_contour(n, cfg.path, cfg.scales, cfg.n_samples);
    rows.push_back({{"n", n}, {"gamma", g}, {"minus_n_half_theta", -(n + 0.5) * theta}});
  }
  return {{"theta_kappa", theta},
          {"theta_linear", hannay_angle_linear(cfg.path, cfg.scales, cfg.n_samples)},
          {"nonlinear_correction", nonlinear_correction(cfg.path, cfg.scales, cfg.n_samples)},
          {"gamma", rows}};
}

// ---- propagation around the loop ----

struct LoopPropagation {
  int n = 0;
  double T = 0.0;
  SpatialGrid grid;
  double delta = 0.0;
  double closed_form_gamma = 0.0;
  std::optional<PhaseDecomposition> phase;
  std::optional<std::string> failure;
  PropagationDiagnostics diagnostics;
  WaveFunction final_state;

  double error() const { return phase ? phase->geometric - closed_form_gamma : NAN; }
};

inline PropagatorConfig propagator_config(const RunConfig& cfg, const SpatialGrid& grid) {
  PropagatorConfig pc;
  pc.dt = cfg.propagator.dt;
  pc.scheme = cfg.propagator.scheme;
  pc.self_consistency_iters = cfg.propagator.self_consistency_iters;
  pc.grid = grid;
  pc.max_norm_drift = cfg.propagator.max_norm_drift;
  pc.max_boundary_ratio = cfg.propagator.max_boundary_ratio;
  pc.observe_every = cfg.propagator.observe_every;
  return pc;
}

// Carries psi_n(R(0)) once around the loop with period T and splits the
// phase of <psi_n(R(0))|Psi(T)> into dynamic and geometric parts. A
// StabilityLost or AdiabaticityLost abort is recorded in failure.
inline LoopPropagation propagate_loop(const RunConfig& cfg, int n, double T, bool keep_state = false) {
  const ParameterPath path = cfg.path.with_period(T);
  LoopPropagation out;
  out.n = n;
  out.T = T;
  out.grid = grid_for(cfg, path, n);
  out.delta = dynamic_phase(n, path, cfg.scales, cfg.n_samples);
  out.closed_form_gamma = berry_contour(n, path, cfg.scales, cfg.n_samples);
  PropagatorConfig pc = propagator_config(cfg, out.grid);
  pc.validate(path.max_frequency(cfg.scales));
  double e_max = 0.0;
  for (int j = 0; j < 64; ++j) e_max = std::max(e_max, eigenvalue(n, path.at(j / 64.0), cfg.scales));
  if (pc.observe_every == 0)
    pc.observe_every = std::max<std::size_t>(1, std::size_t(0.5 * cfg.scales.hbar / (e_max * pc.dt)));
  const WaveFunction psi0 = eigenstate(n, path.at(0.0), cfg.scales, out.grid);
  PhaseTracker tracker(psi0);
  const Observer obs = [&](double, const WaveFunction& psi) { tracker.observe(psi); };
  EnergyShift shift;
  if (cfg.propagator.energy_shift) shift = [&](double t) { return eigenvalue(n, path.at_time(t), cfg.scales); };
  try {
    PropagationResult r = cfg.frozen
                              ? propagate(psi0, Frozen{path.at(0.0)}, 0.0, T, pc, cfg.scales, obs, shift)
                              : propagate(psi0, AlongPath{&path}, 0.0, T, pc, cfg.scales, obs, shift);
    out.diagnostics = r.diagnostics;
    PhaseDecomposition d = extract_geometric_phase(r.final_state, psi0, -out.delta, n);
    d.tolerance = 1.0 / T;
    attach_winding(d, tracker.unwrapped());
    out.phase = d;
    if (keep_state) out.final_state = std::move(r.final_state);
  } catch (const StabilityLost& e) {
    out.failure = std::string("StabilityLost: ") + e.what();
  } catch (const AdiabaticityLost& e) {
    out.failure = std::string("AdiabaticityLost: ") + e.what();
  }
  return out;
}

// Phase report {n, T, total, dynamic, geometric, closed_form_gamma, fidelity, quadrature_points}.
inline json phase_report(const LoopPropagation& lp, std::size_t quadrature_points) {
  json j{{"n", lp.n}, {"T", lp.T}, {"closed_form_gamma", lp.closed_form_gamma}, {"delta", lp.delta},
         {"quadrature_points", quadrature_points}};
  if (lp.phase) {
    j["total"] = lp.phase->total;
    j["dynamic"] = lp.phase->dynamic;
    j["geometric"] = lp.phase->geometric;
    j["fidelity"] = lp.phase->fidelity;
    j["error"] = lp.error();
    if (lp.phase->winding) j["winding"] = *lp.phase->winding;
  }
  if (lp.failure) j["failure"] = *lp.failure;
  return j;
}

inline json run_berry(const RunConfig& cfg) {
  json report{{"kappa_tilde", cfg.scales.kappa_tilde}, {"hbar", cfg.scales.hbar}, {"path", to_json(cfg.path)}};
  const auto contour_info = converged_loop_integral(cfg.path, cfg.scales, cfg.n_samples);
  json per_n = json::array();
  for (int n : cfg.n_list) {
    json e{{"n", n},
           {"closed_form_gamma", berry_contour(n, cfg.path, cfg.scales, cfg.n_samples)},
           {"surface_gamma", berry_surface(n, cfg.path, cfg.scales, cfg.surface.n_u, cfg.surface.n_s)},
           {"hannay_theta", hannay_angle(cfg.path, cfg.scales, cfg.n_samples)},
           {"quadrature_points", contour_info.quadrature_points}};
    json rows = json::array();
    double prev_err = NAN;
    for (double T : cfg.T_list) {
      const LoopPropagation lp = propagate_loop(cfg, n, T);
      json row = phase_report(lp, contour_info.quadrature_points);
      row["grid"] = to_json(lp.grid);
      row["diagnostics"] = {{"steps", lp.diagnostics.steps},
                            {"max_norm_drift", lp.diagnostics.max_norm_drift},
                            {"max_boundary_ratio", lp.diagnostics.max_boundary_ratio}};
      if (lp.phase) {
        const double err = std::abs(lp.error());
        if (std::isfinite(prev_err)) row["ratio_to_previous"] = prev_err / err;
        prev_err = err;
      } else {
        prev_err = NAN;
      }
      rows.push_back(row);
    }
    e["convergence"] = rows;
    per_n.push_back(e);
  }
  report["results"] = per_n;
  return report;
}

}  // namespace gpeberry
