#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "gpeberry/germ.hpp"
#include "gpeberry/grid.hpp"
#include "gpeberry/hes.hpp"
#include "gpeberry/operators.hpp"
#include "gpeberry/params.hpp"

namespace gpeberry {

inline constexpr int default_n_max = 10;

// Orthonormal Hermite functions h_0..h_n_max at xi, from
//   h_0 = pi^{-1/4} e^{-xi^2/2},
//   h_{k+1} = sqrt(2/(k+1)) xi h_k - sqrt(k/(k+1)) h_{k-1}.
inline std::vector<double> hermite_functions(double xi, int n_max) {
  std::vector<double> h(std::size_t(n_max) + 1);
  h[0] = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * xi * xi);
  if (n_max >= 1) h[1] = std::sqrt(2.0) * xi * h[0];
  for (int k = 1; k < n_max; ++k)
    h[std::size_t(k + 1)] = std::sqrt(2.0 / (k + 1.0)) * xi * h[std::size_t(k)] -
                            std::sqrt(double(k) / (k + 1.0)) * h[std::size_t(k - 1)];
  return h;
}

inline double hermite_function(int n, double xi) { return hermite_functions(xi, n)[std::size_t(n)]; }

inline cplx i_pow(int n) {
  switch (((n % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

struct PhaseSpaceCenter {
  double P = 0.0;
  double X = 0.0;
};

// Fock state Phi_n built on the germ a at time t; argC0 is the unwrapped
// Arg C at the initial time. n = 0 is the vacuum.
inline WaveFunction fock_state(int n, const GermState& a, double argC0, double S, const PhaseSpaceCenter& center,
                               const PhysicalScales& scales, const SpatialGrid& grid) {
  if (n < 0) throw ConfigError("Fock label must be non-negative");
  const cplx Q = a.Q();
  if (!(Q.imag() > 0.0)) throw GermDegenerate("Im Q <= 0 in Gaussian ansatz");
  const double hb = scales.hbar;
  const double dArg = a.argC_unwrapped - argC0;
  // (pi hbar)^{-1/4} |C|^{-1/2}, with the pi^{-1/4} carried by h_n
  const double amp = std::pow(hb, -0.25) / std::sqrt(std::abs(a.C));
  const double scale = std::sqrt(Q.imag() / hb);
  const cplx ladder = i_pow(n) * std::polar(1.0, -double(n) * dArg);
  WaveFunction psi(grid);
  psi.center_x = center.X;
  psi.center_p = center.P;
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    const double dx = grid.x(i) - center.X;
    const double theta = -0.5 * dArg + (S + center.P * dx + 0.5 * Q.real() * dx * dx) / hb;
    psi[i] = amp * ladder * std::polar(hermite_function(n, scale * dx), theta);
  }
  return psi;
}

inline WaveFunction vacuum_state(const GermState& a, double argC0, double S, const PhaseSpaceCenter& center,
                                 const PhysicalScales& scales, const SpatialGrid& grid) {
  return fock_state(0, a, argC0, S, center, scales, grid);
}

// Instantaneous eigenstate
//   psi_n = i^n (Omega/(hbar mu))^{1/4} e^{-i rho x^2/(2 hbar mu)} h_n(sqrt(Omega/(hbar mu)) x).
inline WaveFunction eigenstate(int n, const ParameterSet& R, const PhysicalScales& scales, const SpatialGrid& grid) {
  if (n < 0) throw ConfigError("Fock label must be non-negative");
  const auto f = derive_frequencies(R, scales);
  if (!(R.mu > 0.0)) throw LocalizationViolated("eigenstate needs mu > 0: " + R.describe());
  const double hb = scales.hbar;
  const double k = f.omega / (hb * R.mu);
  const double amp = std::pow(k, 0.25);
  const double scale = std::sqrt(k);
  const cplx in = i_pow(n);
  WaveFunction psi(grid);
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    const double x = grid.x(i);
    psi[i] = amp * in * std::polar(hermite_function(n, scale * x), -R.rho * x * x / (2.0 * hb * R.mu));
  }
  return psi;
}

inline double eigenvalue(int n, const ParameterSet& R, const PhysicalScales& scales) {
  const auto f = derive_frequencies(R, scales);
  return scales.hbar * (n + 0.5) * (scales.kappa_tilde * R.c * R.mu / (2.0 * f.omega) + f.omega);
}

// Raw moments m0 = Int |psi|^2, m1 = Int y |psi|^2, m2 = Int y^2 |psi|^2.
struct DensityMoments {
  double m0 = 0.0, m1 = 0.0, m2 = 0.0;
};

inline DensityMoments density_moments(const WaveFunction& psi) {
  DensityMoments m;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double y = psi.grid.x(i), r = std::norm(psi[i]);
    m.m0 += r;
    m.m1 += y * r;
    m.m2 += y * y * r;
  }
  const double h = psi.grid.dx();
  m.m0 *= h;
  m.m1 *= h;
  m.m2 *= h;
  return m;
}

// V_eff(x) = (kappa/2) [a x^2 m0 + 2 b x m1 + c m2].
inline std::vector<double> effective_potential(const WaveFunction& psi, const ParameterSet& R,
                                               const PhysicalScales& scales) {
  const auto m = density_moments(psi);
  std::vector<double> v(psi.size());
  const double k = 0.5 * scales.kappa;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double x = psi.grid.x(i);
    v[i] = k * (R.a * x * x * m.m0 + 2.0 * R.b * x * m.m1 + R.c * m.m2);
  }
  return v;
}

inline constexpr double default_resolution_tol = 1e-6;

// Throws GridTooCoarse when the estimated kinetic truncation error on psi
// exceeds tol.
inline double check_resolution(const WaveFunction& psi, double mu, const PhysicalScales& scales,
                               double tol = default_resolution_tol) {
  const double est = kinetic_truncation_estimate(psi.values, psi.grid.dx(), mu, scales.hbar);
  if (est > tol) {
    throw GridTooCoarse("kinetic truncation estimate " + std::to_string(est) + " exceeds " + std::to_string(tol) +
                        " (dx=" + std::to_string(psi.grid.dx()) + ")");
  }
  return est;
}

inline WaveFunction apply_linear_hamiltonian(const WaveFunction& psi, const ParameterSet& R,
                                             const PhysicalScales& scales) {
  const auto H = linear_hamiltonian(psi.grid, R, scales);
  WaveFunction out(psi.grid);
  out.center_x = psi.center_x;
  out.center_p = psi.center_p;
  H.apply(psi.values, out.values);
  return out;
}

// Full nonlocal Hamiltonian applied to psi.
inline WaveFunction apply_hamiltonian(const WaveFunction& psi, const ParameterSet& R, const PhysicalScales& scales,
                                      double resolution_tol = default_resolution_tol) {
  check_resolution(psi, R.mu, scales, resolution_tol);
  WaveFunction out = apply_linear_hamiltonian(psi, R, scales);
  const auto v = effective_potential(psi, R, scales);
  for (std::size_t i = 0; i < psi.size(); ++i) out[i] += v[i] * psi[i];
  return out;
}

inline double rayleigh_quotient(const WaveFunction& psi, const ParameterSet& R, const PhysicalScales& scales,
                                double resolution_tol = default_resolution_tol) {
  const auto Hpsi = apply_hamiltonian(psi, R, scales, resolution_tol);
  return inner_product(psi, Hpsi).real() / psi.norm_sq();
}

// ||H psi - E psi|| / ||psi||.
inline double eigen_residual(const WaveFunction& psi, double E, const ParameterSet& R, const PhysicalScales& scales,
                             double resolution_tol = default_resolution_tol) {
  const auto Hpsi = apply_hamiltonian(psi, R, scales, resolution_tol);
  double acc = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) acc += std::norm(Hpsi[i] - E * psi[i]);
  return std::sqrt(acc * psi.grid.dx()) / psi.norm();
}

// Means and centered second moments, with -i hbar d/dx by an 8th-order
// central difference and sigma_xp = Re <dx dp>.
inline MomentState quadrature_moments(const WaveFunction& psi, const PhysicalScales& scales,
                                      double resolution_tol = default_resolution_tol) {
  check_resolution(psi, 1.0, scales, resolution_tol);
  const double h = psi.grid.dx(), hb = scales.hbar;
  const auto d = derivative8(psi.values, h);
  double n0 = 0.0, mx = 0.0, mp = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double r = std::norm(psi[i]);
    n0 += r;
    mx += psi.grid.x(i) * r;
    mp += (std::conj(psi[i]) * (-I * hb * d[i])).real();
  }
  MomentState g;
  g.x = mx / n0;
  g.p = mp / n0;
  double sxx = 0.0, sxp = 0.0, spp = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double dx = psi.grid.x(i) - g.x;
    const cplx dp = -I * hb * d[i] - g.p * psi[i];
    sxx += dx * dx * std::norm(psi[i]);
    sxp += (std::conj(psi[i]) * dx * dp).real();
    spp += std::norm(dp);
  }
  g.sigma_xx = sxx / n0;
  g.sigma_xp = sxp / n0;
  g.sigma_pp = spp / n0;
  return g;
}

// Predicted Fock-state moments for germ Q:
//   s_xx = hbar (2n+1)/(2 Im Q), s_xp = Re Q s_xx, s_pp = |Q|^2 s_xx.
inline MomentState fock_moments(int n, cplx Q, const PhaseSpaceCenter& c, const PhysicalScales& scales) {
  MomentState g;
  g.p = c.P;
  g.x = c.X;
  g.sigma_xx = scales.hbar * (2.0 * n + 1.0) / (2.0 * Q.imag());
  g.sigma_xp = Q.real() * g.sigma_xx;
  g.sigma_pp = std::norm(Q) * g.sigma_xx;
  return g;
}

}  // namespace gpeberry
