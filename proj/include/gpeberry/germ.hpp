#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "gpeberry/hes.hpp"
#include "gpeberry/params.hpp"
#include "gpeberry/quadrature.hpp"

namespace gpeberry {

// Solution a = (B, C) of the system in variations a' = J H_zz a with
// J H_zz = [[-rho, -st], [mu, rho]].
struct GermState {
  cplx B{0.0, 0.0};
  cplx C{1.0, 0.0};
  double argC_unwrapped = 0.0;

  cplx Q() const { return B / C; }
};

// Skew product {u, v} = <u, J^t v> = u_B v_C - u_C v_B.
inline cplx skew(cplx uB, cplx uC, cplx vB, cplx vC) { return uB * vC - uC * vB; }

inline cplx skew_self(const GermState& a) { return skew(a.B, a.C, std::conj(a.B), std::conj(a.C)); }

// |{a, a*} - 2i|.
inline double skew_defect(const GermState& a) { return std::abs(skew_self(a) - 2.0 * I); }

inline GermState make_germ(cplx B, cplx C) { return {B, C, std::arg(C)}; }

// Floquet solution a(t) = e^{i Omega t} (-rho + i Omega, mu) / sqrt(Omega mu).
inline GermState floquet_solution(const ParameterSet& R, const PhysicalScales& scales, double t) {
  const auto f = derive_frequencies(R, scales);
  if (!(R.mu > 0.0)) throw LocalizationViolated("Floquet germ needs mu > 0: " + R.describe());
  const double om = f.omega;
  const cplx phase = std::polar(1.0, om * t);
  const double norm = 1.0 / std::sqrt(om * R.mu);
  GermState a;
  a.B = phase * cplx(-R.rho, om) * norm;
  a.C = phase * (R.mu * norm);
  a.argC_unwrapped = om * t;
  return a;
}

struct GermSample {
  double t = 0.0;
  GermState a;
  double skew_defect = 0.0;
};

namespace detail {

inline std::array<cplx, 2> variations_rhs(const std::array<cplx, 2>& a, const ParameterSet& R,
                                          const PhysicalScales& scales) {
  const double st = R.sigma + scales.kappa_tilde * R.a;
  return {-R.rho * a[0] - st * a[1], R.mu * a[0] + R.rho * a[1]};
}

inline std::array<cplx, 2> axpy(const std::array<cplx, 2>& y, double h, const std::array<cplx, 2>& k) {
  return {y[0] + h * k[0], y[1] + h * k[1]};
}

template <ParameterSource Source>
std::array<cplx, 2> rk4_step(const std::array<cplx, 2>& y, const Source& params, double t, double h,
                             const PhysicalScales& scales) {
  const ParameterSet R0 = params(t), Rm = params(t + 0.5 * h), R1 = params(t + h);
  const auto k1 = variations_rhs(y, R0, scales);
  const auto k2 = variations_rhs(axpy(y, 0.5 * h, k1), Rm, scales);
  const auto k3 = variations_rhs(axpy(y, 0.5 * h, k2), Rm, scales);
  const auto k4 = variations_rhs(axpy(y, h, k3), R1, scales);
  return {y[0] + (h / 6.0) * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
          y[1] + (h / 6.0) * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])};
}

inline double wrap_to_pi(double x) {
  x = std::remainder(x, two_pi);
  return x <= -std::numbers::pi ? x + two_pi : x;
}

}  // namespace detail

struct GermTrajectory {
  std::vector<GermSample> samples;
  double dt = 0.0;
  double max_skew_defect = 0.0;

  const GermSample& back() const { return samples.back(); }
};

inline constexpr double germ_min_abs_c = 1e-12;

// Fixed-step RK4 of the variations system. Arg C is continued from step to
// step by nearest continuation; a step whose Arg C increment reaches pi/4
// is subdivided. Im Q > 0 and |C| > 1e-12 are enforced at every sample.
template <ParameterSource Source>
GermTrajectory integrate_variations(const GermState& a0, const Source& params, double t0, double t1, double dt,
                                    const PhysicalScales& scales) {
  if (!(dt > 0.0)) throw ConfigError("integrate_variations: dt must be positive");
  const std::size_t n = std::max<std::size_t>(1, std::size_t(std::ceil((t1 - t0) / dt - 1e-9)));
  const double h = (t1 - t0) / double(n);
  GermTrajectory traj;
  traj.dt = h;
  traj.samples.reserve(n + 1);
  GermState a = a0;
  auto check = [](const GermState& g, double t) {
    if (std::abs(g.C) < germ_min_abs_c) throw GermDegenerate("|C| vanished at t=" + std::to_string(t));
    if (!(g.Q().imag() > 0.0)) throw GermDegenerate("Im Q <= 0 at t=" + std::to_string(t));
  };
  check(a, t0);
  traj.samples.push_back({t0, a, skew_defect(a)});
  traj.max_skew_defect = traj.samples.back().skew_defect;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = t0 + double(k) * h;
    std::array<cplx, 2> y{a.B, a.C};
    double arg = a.argC_unwrapped;
    double prev = std::arg(a.C);
    // Subdivide until every sub-step moves Arg C by less than pi/4.
    for (int level = 0;; ++level) {
      const int m = 1 << level;
      const double hs = h / double(m);
      std::array<cplx, 2> ys = y;
      double args = arg, prevs = prev;
      bool ok = true;
      for (int j = 0; j < m && ok; ++j) {
        ys = detail::rk4_step(ys, params, t + double(j) * hs, hs, scales);
        const double cur = std::arg(ys[1]);
        const double inc = detail::wrap_to_pi(cur - prevs);
        if (std::abs(inc) >= std::numbers::pi / 4.0) ok = false;
        args += inc;
        prevs = cur;
      }
      if (ok || level > 20) {
        y = ys;
        arg = args;
        break;
      }
    }
    a = {y[0], y[1], arg};
    check(a, t + h);
    const double defect = skew_defect(a);
    traj.max_skew_defect = std::max(traj.max_skew_defect, defect);
    traj.samples.push_back({t0 + double(k + 1) * h, a, defect});
  }
  return traj;
}

// Leading adiabatic germ a = e^{i(T Phi + phi)} (f0 + beta f0* / T) at slow time s.
struct AdiabaticGerm {
  double Phi = 0.0;       // Int_0^s Omega
  double phi_slow = 0.0;  // -Int_0^s (mu/2Om)(rho/mu)'
  std::array<cplx, 2> f0{};
  cplx beta{0.0, 0.0};
  cplx Q0{0.0, 0.0};
  cplx Q1{0.0, 0.0};

  // Germ at fast time T s, to first order in 1/T (alpha = 0).
  GermState state(double T) const {
    const cplx ph = std::polar(1.0, T * Phi + phi_slow);
    const cplx B = ph * (f0[0] + beta * std::conj(f0[0]) / T);
    const cplx C = ph * (f0[1] + beta * std::conj(f0[1]) / T);
    return {B, C, T * Phi + phi_slow + std::arg(C / ph)};
  }
};

// Local pieces at s (everything except the two cumulative phases).
inline AdiabaticGerm adiabatic_germ_local(const ParameterSet& R, const ParameterSet& dR, const PhysicalScales& scales) {
  const auto f = derive_frequencies(R, scales);
  const auto d = slow_derivatives(R, dR, scales);
  const double mu = R.mu, rho = R.rho, om = f.omega;
  AdiabaticGerm g;
  const double norm = 1.0 / std::sqrt(om * mu);
  g.f0 = {cplx(-rho, om) * norm, cplx(mu * norm, 0.0)};
  // ((rho - i Om)/mu)' and ((Om + i rho)/mu)'
  const cplx d_rmi = cplx(d.d_rho_over_mu, -d.d_omega_over_mu);
  const cplx d_opi = cplx(d.d_omega_over_mu, d.d_rho_over_mu);
  g.beta = mu / (4.0 * om * om) * d_rmi;
  g.Q0 = cplx(-rho, om) / mu;
  g.Q1 = -d_opi / (2.0 * om);
  return g;
}

inline double slow_phase_rate(const ParameterSet& R, const ParameterSet& dR, const PhysicalScales& scales) {
  const auto d = slow_derivatives(R, dR, scales);
  return -R.mu / (2.0 * d.omega) * d.d_rho_over_mu;
}

// Adiabatic germ at s; Phi and phi by composite Simpson over [0, s] with
// n_quad intervals.
inline AdiabaticGerm adiabatic_germ(const ParameterPath& path, double s, const PhysicalScales& scales,
                                    std::size_t n_quad = 1024) {
  AdiabaticGerm g = adiabatic_germ_local(path.at(s), path.derivative(s), scales);
  if (s != 0.0) {
    g.Phi = quad::simpson([&](double u) { return derive_frequencies(path.at(u), scales).omega; }, 0.0, s, n_quad);
    g.phi_slow = quad::simpson(
        [&](double u) { return slow_phase_rate(path.at(u), path.derivative(u), scales); }, 0.0, s, n_quad);
  }
  return g;
}

// CSV columns: t, Re B, Im B, Re C, Im C, argC_unwrapped, Re Q, Im Q, skew_defect.
inline void write_germ_csv(std::ostream& os, const GermTrajectory& traj) {
  const auto old = os.precision(17);
  os << "t,re_B,im_B,re_C,im_C,argC_unwrapped,re_Q,im_Q,skew_defect\n";
  for (const auto& s : traj.samples) {
    const cplx q = s.a.Q();
    os << s.t << ',' << s.a.B.real() << ',' << s.a.B.imag() << ',' << s.a.C.real() << ',' << s.a.C.imag() << ','
       << s.a.argC_unwrapped << ',' << q.real() << ',' << q.imag() << ',' << s.skew_defect << '\n';
  }
  os.precision(old);
}

}  // namespace gpeberry
