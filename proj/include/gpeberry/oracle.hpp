#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "gpeberry/grid.hpp"
#include "gpeberry/hes.hpp"
#include "gpeberry/operators.hpp"
#include "gpeberry/params.hpp"
#include "gpeberry/states.hpp"

namespace gpeberry {

enum class Scheme { implicit_midpoint, split_quadratic };

inline const char* scheme_name(Scheme s) {
  return s == Scheme::implicit_midpoint ? "implicit-midpoint" : "split-quadratic";
}

inline Scheme parse_scheme(const std::string& s) {
  if (s == "implicit-midpoint") return Scheme::implicit_midpoint;
  if (s == "split-quadratic") return Scheme::split_quadratic;
  throw ConfigError("unknown scheme '" + s + "' (expected implicit-midpoint or split-quadratic)");
}

struct PropagatorConfig {
  double dt = 0.01;
  Scheme scheme = Scheme::implicit_midpoint;
  int self_consistency_iters = 2;
  SpatialGrid grid;
  double max_norm_drift = 1e-4;
  double max_boundary_ratio = 1e-12;
  std::size_t observe_every = 0;  // 0: observe only the initial and final states
  bool record_energy = false;

  // dt times the largest instantaneous frequency must stay below 0.1.
  void validate(double max_frequency) const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("propagator dt must be positive");
    if (self_consistency_iters < 0 || self_consistency_iters > 16)
      throw ConfigError("self_consistency_iters must lie in [0, 16]");
    grid.validate();
    if (!(dt * max_frequency < 0.1)) {
      throw ConfigError("dt * max frequency = " + std::to_string(dt * max_frequency) + " exceeds 0.1");
    }
  }
};

struct PropagationDiagnostics {
  std::size_t steps = 0;
  double dt = 0.0;
  double initial_norm_sq = 0.0;
  double max_norm_drift = 0.0;
  double max_boundary_ratio = 0.0;
  std::vector<double> energy_times;
  std::vector<double> energy_trace;
};

struct PropagationResult {
  WaveFunction final_state;
  PropagationDiagnostics diagnostics;
};

// Called with (t, state) at t0, every observe_every steps and at the end.
using Observer = std::function<void(double, const WaveFunction&)>;

// Optional spectral shift eps(t): the run evolves under H - eps and
// restores the factor exp(-i Int eps dt / hbar) step by step (midpoint
// rule), an exact change of gauge that keeps the scheme's phase error
// proportional to the shifted rather than the absolute energy.
using EnergyShift = std::function<double(double)>;

namespace detail {

inline void add_identity_scaled(Pentadiagonal& A, cplx diag_scale, const Pentadiagonal& H, cplx off_scale) {
  for (std::size_t i = 0; i < A.size(); ++i) {
    for (int k = 0; k < 5; ++k) A.rows[i][std::size_t(k)] = off_scale * H.rows[i][std::size_t(k)];
    A.rows[i][2] += diag_scale;
  }
}

// One Cayley step (1 + i tau H) out = (1 - i tau H) in with H = Hlin + diag(v).
inline void cayley_step(const Pentadiagonal& Hlin, std::span<const double> v, const std::vector<cplx>& in,
                        std::vector<cplx>& out, double tau) {
  Pentadiagonal H = Hlin;
  H.add_diagonal(v);
  std::vector<cplx> rhs(in.size());
  H.apply(in, rhs);
  for (std::size_t i = 0; i < in.size(); ++i) rhs[i] = in[i] - I * tau * rhs[i];
  Pentadiagonal A(H.size());
  add_identity_scaled(A, 1.0, H, I * tau);
  solve_banded(std::move(A), rhs);
  out = std::move(rhs);
}

inline std::vector<double> effective_potential_of(const SpatialGrid& grid, const std::vector<cplx>& values,
                                                  const ParameterSet& R, const PhysicalScales& scales) {
  WaveFunction tmp(grid, values);
  return effective_potential(tmp, R, scales);
}

}  // namespace detail

// Second-order unitary propagation of i hbar d_t Psi = [H_lin(R(t)) + V_eff(Psi)] Psi
// from t0 to t0 + duration. Parameters are sampled at step midpoints;
// V_eff is refreshed self_consistency_iters times per step at the
// midpoint estimate. The norm is never renormalized.
template <ParameterSource Source>
PropagationResult propagate(const WaveFunction& psi0, const Source& params, double t0, double duration,
                            const PropagatorConfig& cfg, const PhysicalScales& scales, const Observer& observer = {},
                            const EnergyShift& shift = {}) {
  if (!(psi0.grid == cfg.grid)) throw ConfigError("initial state grid differs from propagator grid");
  if (!(duration >= 0.0)) throw ConfigError("propagation time must be non-negative");
  const std::size_t n_steps = duration == 0.0 ? 0 : std::size_t(std::ceil(duration / cfg.dt - 1e-9));
  const double dt = n_steps == 0 ? 0.0 : duration / double(n_steps);
  const double hb = scales.hbar;
  const double tau = 0.5 * dt / hb;
  const std::size_t N = cfg.grid.n_points;

  PropagationResult res;
  auto& diag = res.diagnostics;
  diag.dt = dt;
  diag.steps = n_steps;
  diag.initial_norm_sq = psi0.norm_sq();

  WaveFunction psi = psi0;
  const auto xs = cfg.grid.points();

  auto record = [&](double t) {
    if (cfg.record_energy) {
      const auto R = params(t);
      diag.energy_times.push_back(t);
      diag.energy_trace.push_back(rayleigh_quotient(psi, R, scales, INFINITY));
    }
    if (observer) observer(t, psi);
  };
  auto sci = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return std::string(buf);
  };
  auto monitor = [&](double t) {
    const double drift = std::abs(psi.norm_sq() - diag.initial_norm_sq);
    const double bnd = psi.boundary_ratio();
    diag.max_norm_drift = std::max(diag.max_norm_drift, drift);
    diag.max_boundary_ratio = std::max(diag.max_boundary_ratio, bnd);
    if (drift > cfg.max_norm_drift)
      throw StabilityLost("norm drift " + sci(drift) + " at t=" + std::to_string(t));
    if (!(bnd <= cfg.max_boundary_ratio))
      throw StabilityLost("boundary amplitude ratio " + sci(bnd) + " at t=" + std::to_string(t));
  };

  record(t0);
  std::vector<cplx> next(N), mid(N);
  std::vector<double> v(N), vq(N);
  for (std::size_t k = 0; k < n_steps; ++k) {
    const double t = t0 + double(k) * dt;
    const double tm = t + 0.5 * dt;
    const ParameterSet R = params(tm);
    const double eps = shift ? shift(tm) : 0.0;
    if (cfg.scheme == Scheme::implicit_midpoint) {
      const Pentadiagonal Hlin = linear_hamiltonian(cfg.grid, R, scales);
      v = detail::effective_potential_of(cfg.grid, psi.values, R, scales);
      for (auto& e : v) e -= eps;
      detail::cayley_step(Hlin, v, psi.values, next, tau);
      for (int it = 0; it < cfg.self_consistency_iters; ++it) {
        for (std::size_t i = 0; i < N; ++i) mid[i] = 0.5 * (psi[i] + next[i]);
        v = detail::effective_potential_of(cfg.grid, mid, R, scales);
        for (auto& e : v) e -= eps;
        detail::cayley_step(Hlin, v, psi.values, next, tau);
      }
    } else {
      // Strang splitting: diagonal half-steps in sigma x^2/2 + V_eff, a
      // Cayley step in the kinetic and rho terms. The density is unchanged
      // by the diagonal factors, so V_eff is refreshed only around the
      // middle solve.
      const Pentadiagonal Hk = linear_hamiltonian(cfg.grid, R, scales, false);
      auto half_kick = [&](std::vector<cplx>& y) {
        vq = detail::effective_potential_of(cfg.grid, y, R, scales);
        for (std::size_t i = 0; i < N; ++i) {
          const double pot = 0.5 * R.sigma * xs[i] * xs[i] + vq[i] - eps;
          y[i] *= std::polar(1.0, -tau * pot);
        }
      };
      next = psi.values;
      half_kick(next);
      const std::vector<double> zero(N, 0.0);
      detail::cayley_step(Hk, zero, next, next, tau);
      half_kick(next);
    }
    if (eps != 0.0) {
      const cplx ph = std::polar(1.0, -eps * dt / hb);
      for (auto& e : next) e *= ph;
    }
    psi.values.swap(next);
    const double t1 = t0 + double(k + 1) * dt;
    monitor(t1);
    if ((cfg.observe_every > 0 && (k + 1) % cfg.observe_every == 0) || k + 1 == n_steps) record(t1);
  }
  res.final_state = std::move(psi);
  return res;
}

// Grid covering the n <= n_max eigenstates at every point of the loop.
inline SpatialGrid auto_grid_for_path(const ParameterPath& path, const PhysicalScales& scales, int n_max,
                                      const GridOptions& opt = {}, std::size_t n_samples = 256) {
  SpatialGrid g = auto_grid(path.at(0.0), scales, n_max, 0.0, opt);
  double dx = g.dx();
  for (std::size_t j = 1; j < n_samples; ++j) {
    const SpatialGrid gj = auto_grid(path.at(double(j) / double(n_samples)), scales, n_max, 0.0, opt);
    g.x_min = std::min(g.x_min, gj.x_min);
    g.x_max = std::max(g.x_max, gj.x_max);
    dx = std::min(dx, gj.dx());
  }
  while (g.dx() > dx && g.n_points < opt.max_points) g.n_points *= 2;
  return g;
}

}  // namespace gpeberry
