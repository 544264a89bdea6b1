#pragma once

#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <ostream>
#include <vector>

#include "gpeberry/params.hpp"
#include "gpeberry/quadrature.hpp"

namespace gpeberry {

// Anything mapping fast time t to the instantaneous parameters.
template <typename F>
concept ParameterSource = requires(const F& f, double t) {
  { f(t) } -> std::convertible_to<ParameterSet>;
};

// Fixed parameters as a ParameterSource.
struct Frozen {
  ParameterSet R;
  ParameterSet operator()(double) const { return R; }
};

// Traverses a loop once over t in [0, T].
struct AlongPath {
  const ParameterPath* path;
  ParameterSet operator()(double t) const { return path->at_time(t); }
};

// First moments and centered second moments, ordered as (p, x, s_pp, s_xp, s_xx).
struct MomentState {
  double p = 0.0;
  double x = 0.0;
  double sigma_pp = 0.0;
  double sigma_xp = 0.0;
  double sigma_xx = 0.0;

  std::array<double, 5> as_array() const { return {p, x, sigma_pp, sigma_xp, sigma_xx}; }
  static MomentState from_array(const std::array<double, 5>& v) { return {v[0], v[1], v[2], v[3], v[4]}; }

  // Schroedinger uncertainty functional, an integral of motion of the flow.
  double uncertainty() const { return sigma_pp * sigma_xx - sigma_xp * sigma_xp; }

  bool finite() const {
    return std::isfinite(p) && std::isfinite(x) && std::isfinite(sigma_pp) && std::isfinite(sigma_xp) &&
           std::isfinite(sigma_xx);
  }

  friend MomentState operator+(const MomentState& l, const MomentState& r) {
    return {l.p + r.p, l.x + r.x, l.sigma_pp + r.sigma_pp, l.sigma_xp + r.sigma_xp, l.sigma_xx + r.sigma_xx};
  }
  friend MomentState operator-(const MomentState& l, const MomentState& r) {
    return {l.p - r.p, l.x - r.x, l.sigma_pp - r.sigma_pp, l.sigma_xp - r.sigma_xp, l.sigma_xx - r.sigma_xx};
  }
  friend MomentState operator*(double k, const MomentState& r) {
    return {k * r.p, k * r.x, k * r.sigma_pp, k * r.sigma_xp, k * r.sigma_xx};
  }
  friend bool operator==(const MomentState&, const MomentState&) = default;
};

inline double max_abs_difference(const MomentState& a, const MomentState& b) {
  const auto d = (a - b).as_array();
  double m = 0.0;
  for (double v : d) m = std::max(m, std::abs(v));
  return m;
}

// Integration constants of the constant-parameter general solution.
struct MomentConstants {
  double C1 = 0.0, C2 = 0.0, C3 = 0.0, C4 = 0.0, C5 = 0.0;
};

// Time derivative of the moments:
//   p' = -s0 x - rho p,  x' = mu p + rho x,
//   s_xx' = 2 mu s_xp + 2 rho s_xx,
//   s_xp' = mu s_pp - st s_xx,
//   s_pp' = -2 rho s_pp - 2 st s_xp.
inline MomentState hes_rhs(const MomentState& g, const ParameterSet& R, const PhysicalScales& scales) {
  const double s0 = R.sigma + scales.kappa_tilde * (R.a + R.b);
  const double st = R.sigma + scales.kappa_tilde * R.a;
  MomentState d;
  d.p = -s0 * g.x - R.rho * g.p;
  d.x = R.mu * g.p + R.rho * g.x;
  d.sigma_xx = 2.0 * R.mu * g.sigma_xp + 2.0 * R.rho * g.sigma_xx;
  d.sigma_xp = R.mu * g.sigma_pp - st * g.sigma_xx;
  d.sigma_pp = -2.0 * R.rho * g.sigma_pp - 2.0 * st * g.sigma_xp;
  return d;
}

struct HesSample {
  double t = 0.0;
  MomentState g;
  double uncertainty = 0.0;
};

struct HesTrajectory {
  std::vector<HesSample> samples;
  double dt = 0.0;
  // Initial uncertainty functional below hbar^2/4: the state cannot come
  // from a wavefunction. The run proceeds regardless.
  bool below_uncertainty_bound = false;

  const HesSample& back() const { return samples.back(); }
};

// Default fixed step: the shorter of the first- and second-moment periods over 200.
inline double default_hes_dt(const ParameterSet& R, const PhysicalScales& scales) {
  const auto f = derive_frequencies(R, scales);
  return std::min(two_pi / f.omega_tilde, two_pi / (2.0 * f.omega)) / 200.0;
}

inline double default_hes_dt(const ParameterPath& path, const PhysicalScales& scales) {
  return two_pi / path.max_frequency(scales) / 200.0;
}

// Classical fixed-step RK4 from t0 to t1. The step is shrunk so an integer
// number of steps lands exactly on t1; every step is recorded.
template <ParameterSource Source>
HesTrajectory integrate_hes(const MomentState& g0, const Source& params, double t0, double t1, double dt,
                            const PhysicalScales& scales) {
  if (!(dt > 0.0)) throw ConfigError("integrate_hes: dt must be positive");
  const std::size_t n = std::max<std::size_t>(1, std::size_t(std::ceil((t1 - t0) / dt - 1e-9)));
  const double h = (t1 - t0) / double(n);
  HesTrajectory traj;
  traj.dt = h;
  traj.samples.reserve(n + 1);
  traj.below_uncertainty_bound = g0.uncertainty() < 0.25 * scales.hbar * scales.hbar;
  MomentState g = g0;
  traj.samples.push_back({t0, g, g.uncertainty()});
  for (std::size_t k = 0; k < n; ++k) {
    const double t = t0 + double(k) * h;
    const ParameterSet R0 = params(t), Rm = params(t + 0.5 * h), R1 = params(t + h);
    const MomentState k1 = hes_rhs(g, R0, scales);
    const MomentState k2 = hes_rhs(g + (0.5 * h) * k1, Rm, scales);
    const MomentState k3 = hes_rhs(g + (0.5 * h) * k2, Rm, scales);
    const MomentState k4 = hes_rhs(g + h * k3, R1, scales);
    g = g + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!g.finite()) throw StepRejected("integrate_hes: non-finite moments at t=" + std::to_string(t + h));
    traj.samples.push_back({t0 + double(k + 1) * h, g, g.uncertainty()});
  }
  return traj;
}

// General constant-parameter solution: first moments oscillate at
// Omega_tilde, second moments at 2 Omega around the stationary profile.
inline MomentState closed_form_hes(const MomentConstants& C, const ParameterSet& R, const PhysicalScales& scales,
                                   double t) {
  const auto f = derive_frequencies(R, scales);
  const double mu = R.mu, rho = R.rho, om = f.omega, omt = f.omega_tilde;
  const double s1 = std::sin(omt * t), c1 = std::cos(omt * t);
  const double s2 = std::sin(2.0 * om * t), c2 = std::cos(2.0 * om * t);
  MomentState g;
  g.x = C.C1 * s1 + C.C2 * c1;
  g.p = (omt * C.C1 - rho * C.C2) / mu * c1 - (omt * C.C2 + rho * C.C1) / mu * s1;
  g.sigma_xx = C.C3 * s2 + C.C4 * c2 + C.C5;
  g.sigma_xp = (om * C.C3 - rho * C.C4) / mu * c2 - (om * C.C4 + rho * C.C3) / mu * s2 - rho / mu * C.C5;
  g.sigma_pp = ((rho * rho - om * om) * C.C3 + 2.0 * rho * om * C.C4) / (mu * mu) * s2 +
               ((rho * rho - om * om) * C.C4 - 2.0 * rho * om * C.C3) / (mu * mu) * c2 + f.sigma_tilde / mu * C.C5;
  return g;
}

// Constants reproducing g0 at t = 0 under closed_form_hes. C5 is the
// projection on the left null vector (st, 2 rho, mu) of the second-moment block.
inline MomentConstants constants_from_initial(const MomentState& g0, const ParameterSet& R,
                                              const PhysicalScales& scales) {
  const auto f = derive_frequencies(R, scales);
  MomentConstants C;
  C.C2 = g0.x;
  C.C1 = (R.mu * g0.p + R.rho * C.C2) / f.omega_tilde;
  const double ell = f.sigma_tilde * g0.sigma_xx + 2.0 * R.rho * g0.sigma_xp + R.mu * g0.sigma_pp;
  C.C5 = R.mu * ell / (2.0 * f.omega * f.omega);
  C.C4 = g0.sigma_xx - C.C5;
  C.C3 = (R.mu * g0.sigma_xp + R.rho * g0.sigma_xx) / f.omega;
  return C;
}

// Stationary moments of the n-th Fock/eigen state: C = (0,0,0,0, hbar mu (2n+1)/(2 Omega)).
inline MomentConstants stationary_constants(int n, const ParameterSet& R, const PhysicalScales& scales) {
  const auto f = derive_frequencies(R, scales);
  return {0.0, 0.0, 0.0, 0.0, scales.hbar * R.mu * (2.0 * n + 1.0) / (2.0 * f.omega)};
}

// Components ordered (s_xx, s_xp, s_pp).
struct AdiabaticMoments {
  std::array<double, 3> Sigma0{};
  std::array<double, 3> Sigma1{};
  double sigma_xx_1 = 0.0;

  // Sigma0 + Sigma1 / T as a moment state with vanishing first moments.
  MomentState state(double T) const {
    return {0.0, 0.0, Sigma0[2] + Sigma1[2] / T, Sigma0[1] + Sigma1[1] / T, Sigma0[0] + Sigma1[0] / T};
  }
};

// Adiabatic constant matching the n-th Fock state at leading order:
// Sigma0_xx = C1 mu/Omega = hbar (2n+1) mu / (2 Omega).
inline double fock_adiabatic_constant(int n, const PhysicalScales& scales) {
  return scales.hbar * (n + 0.5);
}

// Two-term 1/T expansion of the second moments along a slow loop:
//   Sigma0 = C1 (mu/Om, -rho/Om, st/Om),
//   Sigma1 = s1_xx (1, -rho/mu, st/mu) + C1 (0, (mu/Om)'/(2 mu), -(rho/Om)'/mu),
//   s1_xx  = C1 mu^2/(2 Om^3) (rho/mu)' + C2 mu/Om.
// First moments vanish at both orders.
inline AdiabaticMoments adiabatic_moments(const ParameterPath& path, double C1, double C2, double s,
                                          const PhysicalScales& scales) {
  const ParameterSet R = path.at(s);
  const ParameterSet dR = path.derivative(s);
  const auto f = derive_frequencies(R, scales);
  const auto d = slow_derivatives(R, dR, scales);
  const double mu = R.mu, rho = R.rho, om = f.omega, st = f.sigma_tilde;
  AdiabaticMoments m;
  m.Sigma0 = {C1 * mu / om, -C1 * rho / om, C1 * st / om};
  m.sigma_xx_1 = C1 * mu * mu / (2.0 * om * om * om) * d.d_rho_over_mu + C2 * mu / om;
  m.Sigma1 = {m.sigma_xx_1, -m.sigma_xx_1 * rho / mu + C1 * d.d_mu_over_omega / (2.0 * mu),
              m.sigma_xx_1 * st / mu - C1 * d.d_rho_over_omega / mu};
  return m;
}

// Moment-level Hamiltonian function
//   mu P^2/2 + sigma X^2/2 + rho X P + (kt/2) c s_xx + (kt/2)(a + 2b + c) X^2.
inline double classical_hamiltonian(const MomentState& g, const ParameterSet& R, const PhysicalScales& scales) {
  const double k = scales.kappa_tilde;
  return 0.5 * R.mu * g.p * g.p + 0.5 * R.sigma * g.x * g.x + R.rho * g.x * g.p + 0.5 * k * R.c * g.sigma_xx +
         0.5 * k * (R.a + 2.0 * R.b + R.c) * g.x * g.x;
}

// S(t_k) = Int_0^{t_k} (P Xdot - H) on a uniform sampling.
inline std::vector<double> action_integral(std::span<const double> P, std::span<const double> Xdot,
                                           std::span<const double> H, double dt) {
  std::vector<double> integrand(P.size());
  for (std::size_t i = 0; i < P.size(); ++i) integrand[i] = P[i] * Xdot[i] - H[i];
  return quad::cumulative_simpson<double>(integrand, dt);
}

// Classical action along an integrated HES trajectory; Xdot is taken from
// the exact right-hand side at each sample.
template <ParameterSource Source>
std::vector<double> action_S(const HesTrajectory& traj, const Source& params, const PhysicalScales& scales) {
  const std::size_t n = traj.samples.size();
  std::vector<double> P(n), Xd(n), H(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& smp = traj.samples[i];
    const ParameterSet R = params(smp.t);
    P[i] = smp.g.p;
    Xd[i] = hes_rhs(smp.g, R, scales).x;
    H[i] = classical_hamiltonian(smp.g, R, scales);
  }
  return action_integral(P, Xd, H, traj.dt);
}

// CSV columns: t, p, x, sigma_pp, sigma_xp, sigma_xx, uncertainty_U.
inline void write_hes_csv(std::ostream& os, const HesTrajectory& traj) {
  const auto old = os.precision(17);
  os << "t,p,x,sigma_pp,sigma_xp,sigma_xx,uncertainty_U\n";
  for (const auto& s : traj.samples) {
    os << s.t << ',' << s.g.p << ',' << s.g.x << ',' << s.g.sigma_pp << ',' << s.g.sigma_xp << ',' << s.g.sigma_xx
       << ',' << s.uncertainty << '\n';
  }
  os.precision(old);
}

}  // namespace gpeberry
