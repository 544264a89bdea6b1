#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <vector>

#include "gpeberry/grid.hpp"
#include "gpeberry/params.hpp"
#include "gpeberry/quadrature.hpp"

namespace gpeberry {

// Sign convention: a state carried once around the loop picks up
//   total = -delta_n + gamma_n,
// with delta_n = dynamic_phase() > 0 and gamma_n = berry_contour().

inline constexpr std::size_t default_loop_quad = 1024;
inline constexpr double contour_converge_tol = 1e-9;

inline double dynamic_rate(const ParameterSet& R, const PhysicalScales& scales) {
  const auto f = derive_frequencies(R, scales);
  return scales.kappa_tilde * R.c * R.mu / (2.0 * f.omega) + f.omega;
}

// delta_n = (n+1/2) T Int_0^1 (kt c mu/(2 Om) + Om) ds.
inline double dynamic_phase(int n, const ParameterPath& path, const PhysicalScales& scales,
                            std::size_t n_quad = default_loop_quad) {
  const double I =
      quad::simpson([&](double s) { return dynamic_rate(path.at(s), scales); }, 0.0, 1.0, n_quad);
  return (n + 0.5) * path.period() * I;
}

// Connection components; only mu and rho are nonzero.
struct GeometricPotential {
  double A_mu = 0.0;
  double A_sigma = 0.0;
  double A_rho = 0.0;
  double A_a = 0.0;
  double A_b = 0.0;
  double A_c = 0.0;

  double pair(const ParameterSet& dR) const {
    return A_mu * dR.mu + A_sigma * dR.sigma + A_rho * dR.rho + A_a * dR.a + A_b * dR.b + A_c * dR.c;
  }
};

// [1 - kt c mu/(2 Om^2)] / (2 Om).
inline double connection_weight(const ParameterSet& R, const PhysicalScales& scales) {
  const auto f = derive_frequencies(R, scales);
  const double om = f.omega;
  return (1.0 - scales.kappa_tilde * R.c * R.mu / (2.0 * om * om)) / (2.0 * om);
}

inline GeometricPotential geometric_potential(int n, const ParameterSet& R, const PhysicalScales& scales) {
  const double w = (n + 0.5) * connection_weight(R, scales);
  GeometricPotential A;
  A.A_mu = -w * R.rho / R.mu;
  A.A_rho = w;
  return A;
}

// Pullback of [1 - kt c mu/(2 Om^2)](1/(2 Om))(d rho - rho d mu/mu) at s.
inline double loop_form(const ParameterPath& path, double s, const PhysicalScales& scales) {
  const ParameterSet R = path.at(s), dR = path.derivative(s);
  return connection_weight(R, scales) * (dR.rho - R.rho * dR.mu / R.mu);
}

// Int over the loop of the connection form divided by (n+1/2), composite
// Simpson at n_quad intervals with mirrored pairing.
inline double loop_integral(const ParameterPath& path, const PhysicalScales& scales, std::size_t n_quad) {
  return quad::mirrored_simpson([&](double s) { return loop_form(path, s, scales); }, n_quad);
}

inline double berry_contour_fixed(int n, const ParameterPath& path, const PhysicalScales& scales,
                                  std::size_t n_quad) {
  return (n + 0.5) * loop_integral(path, scales, n_quad);
}

struct ContourResult {
  double value = 0.0;
  std::size_t quadrature_points = 0;
  double last_change = 0.0;
};

// Loop integral with doubling from n_quad until successive values agree to tol.
inline ContourResult converged_loop_integral(const ParameterPath& path, const PhysicalScales& scales,
                                             std::size_t n_quad = default_loop_quad,
                                             double tol = contour_converge_tol, std::size_t max_quad = 1u << 22) {
  path.validate(scales);
  ContourResult r;
  double prev = loop_integral(path, scales, n_quad);
  for (std::size_t m = 2 * n_quad; m <= max_quad; m *= 2) {
    const double cur = loop_integral(path, scales, m);
    r.last_change = std::abs(cur - prev);
    r.value = cur;
    r.quadrature_points = m;
    if (r.last_change <= tol) return r;
    prev = cur;
  }
  return r;
}

// gamma_n = (n+1/2) Loop [1 - kt c mu/(2 Om^2)](1/(2 Om))(d rho - rho d mu/mu).
inline double berry_contour(int n, const ParameterPath& path, const PhysicalScales& scales,
                            std::size_t n_quad = default_loop_quad) {
  return (n + 0.5) * converged_loop_integral(path, scales, n_quad).value;
}

// Theta = -Loop [1 - kt c mu/(2 Om^2)](1/(2 Om))(d rho - rho d mu/mu).
inline double hannay_angle(const ParameterPath& path, const PhysicalScales& scales,
                           std::size_t n_quad = default_loop_quad) {
  return -converged_loop_integral(path, scales, n_quad).value;
}

inline double hannay_angle_linear(const ParameterPath& path, const PhysicalScales& scales,
                                  std::size_t n_quad = default_loop_quad) {
  PhysicalScales lin = scales;
  lin.kappa = lin.kappa_tilde = 0.0;
  return hannay_angle(path, lin, n_quad);
}

// Loop (kt c mu/(4 Om^3))(d rho - rho d mu/mu): the nonlinear part of the
// Hannay angle, Theta_kappa - Theta_0 at equal Om.
inline double nonlinear_correction(const ParameterPath& path, const PhysicalScales& scales,
                                   std::size_t n_quad = default_loop_quad) {
  auto g = [&](double s) {
    const ParameterSet R = path.at(s), dR = path.derivative(s);
    const double om = derive_frequencies(R, scales).omega;
    return scales.kappa_tilde * R.c * R.mu / (4.0 * om * om * om) * (dR.rho - R.rho * dR.mu / R.mu);
  };
  double prev = quad::mirrored_simpson(g, n_quad);
  for (std::size_t m = 2 * n_quad; m <= (1u << 22); m *= 2) {
    const double cur = quad::mirrored_simpson(g, m);
    if (std::abs(cur - prev) <= contour_converge_tol) return cur;
    prev = cur;
  }
  return prev;
}

// Curvature two-form evaluated on tangent vectors u, v:
//   P = (1/(4 Om^3)) {sb drho^dmu + rho dmu^dsb + mu dsb^drho}
//     - (kt c/2)(3 mu/(4 Om^5)) {st drho^dmu + rho dmu^dst + mu dst^drho},
// which equals minus the exterior derivative of the loop form.
inline double curvature_form(const ParameterSet& R, const ParameterSet& u, const ParameterSet& v,
                             const PhysicalScales& scales) {
  const auto f = derive_frequencies(R, scales);
  const double k = scales.kappa_tilde, om = f.omega;
  auto wedge = [](double a1, double b1, double a2, double b2) { return a1 * b2 - a2 * b1; };
  const double dsb_u = u.sigma + k * (u.a + u.c), dsb_v = v.sigma + k * (v.a + v.c);
  const double dst_u = u.sigma + k * u.a, dst_v = v.sigma + k * v.a;
  const double rho_mu = wedge(u.rho, u.mu, v.rho, v.mu);
  const double p1 = f.sigma_bar * rho_mu + R.rho * wedge(u.mu, dsb_u, v.mu, dsb_v) +
                    R.mu * wedge(dsb_u, u.rho, dsb_v, v.rho);
  const double p2 = f.sigma_tilde * rho_mu + R.rho * wedge(u.mu, dst_u, v.mu, dst_v) +
                    R.mu * wedge(dst_u, u.rho, dst_v, v.rho);
  return p1 / (4.0 * om * om * om) - 0.5 * k * R.c * 3.0 * R.mu / (4.0 * std::pow(om, 5)) * p2;
}

// Spanning surface Pi(u, s), u in [0, 1], with Pi(1, s) = R(s) and the
// orientation (u, s).
struct SpanningSurface {
  std::function<ParameterSet(double, double)> at;
  std::function<ParameterSet(double, double)> d_u;
  std::function<ParameterSet(double, double)> d_s;
};

inline ParameterSet loop_centroid(const ParameterPath& path, std::size_t n = 1024) {
  ParameterSet c{0, 0, 0, 0, 0, 0};
  for (std::size_t i = 0; i < n; ++i) c = c + (1.0 / double(n)) * path.at(double(i) / double(n));
  return c;
}

// Radial cone from the loop centroid Rc: Pi = Rc + u (R(s) - Rc).
inline SpanningSurface cone_surface(const ParameterPath& path, std::optional<ParameterSet> apex = std::nullopt) {
  const ParameterSet Rc = apex ? *apex : loop_centroid(path);
  SpanningSurface S;
  S.at = [&path, Rc](double u, double s) { return Rc + u * (path.at(s) - Rc); };
  S.d_u = [&path, Rc](double, double s) { return path.at(s) - Rc; };
  S.d_s = [&path](double u, double s) { return u * path.derivative(s); };
  return S;
}

// gamma_n = -(n+1/2) Int P(d_u Pi, d_s Pi) du ds by the midpoint rule on an
// n_u x n_s mesh.
inline double berry_surface(int n, const SpanningSurface& S, const PhysicalScales& scales, std::size_t n_u = 256,
                            std::size_t n_s = 256) {
  const double hu = 1.0 / double(n_u), hs = 1.0 / double(n_s);
  double acc = 0.0;
  for (std::size_t j = 0; j < n_s; ++j) {
    const double s = (double(j) + 0.5) * hs;
    double row = 0.0;
    for (std::size_t i = 0; i < n_u; ++i) {
      const double u = (double(i) + 0.5) * hu;
      row += curvature_form(S.at(u, s), S.d_u(u, s), S.d_s(u, s), scales);
    }
    acc += row;
  }
  return -(n + 0.5) * acc * hu * hs;
}

inline double berry_surface(int n, const ParameterPath& path, const PhysicalScales& scales, std::size_t n_u = 256,
                            std::size_t n_s = 256) {
  return berry_surface(n, cone_surface(path), scales, n_u, n_s);
}

inline double wrap_phase(double x) {
  x = std::remainder(x, two_pi);
  return x <= -std::numbers::pi ? x + two_pi : x;
}

struct PhaseDecomposition {
  int n = 0;
  double total = 0.0;      // arg <psi_ref|psi_final> in (-pi, pi]
  double dynamic = 0.0;    // signed dynamic phase, -delta_n
  double geometric = 0.0;  // total - dynamic in (-pi, pi]
  double fidelity = 0.0;   // |<psi_ref|psi_final>|
  std::optional<long> winding;  // whole turns of the tracked total phase
  double tolerance = 0.0;
};

inline constexpr double adiabatic_overlap_min = 0.9;

inline PhaseDecomposition extract_geometric_phase(const WaveFunction& psi_final, const WaveFunction& psi_reference,
                                                  double dynamic, int n = 0) {
  const cplx ov = inner_product(psi_reference, psi_final) / std::sqrt(psi_reference.norm_sq() * psi_final.norm_sq());
  PhaseDecomposition d;
  d.n = n;
  d.fidelity = std::abs(ov);
  if (!(d.fidelity > adiabatic_overlap_min)) {
    throw AdiabaticityLost("overlap with reference " + std::to_string(d.fidelity) + " <= " +
                           std::to_string(adiabatic_overlap_min));
  }
  d.total = std::arg(ov);
  d.dynamic = dynamic;
  d.geometric = wrap_phase(d.total - dynamic);
  return d;
}

// Continuous arg <psi_ref|Psi(t)> over a sequence of snapshots.
class PhaseTracker {
 public:
  explicit PhaseTracker(WaveFunction reference) : ref_(std::move(reference)) {}

  double observe(const WaveFunction& psi) {
    const double a = std::arg(inner_product(ref_, psi));
    if (!started_) {
      unwrapped_ = a;
      started_ = true;
    } else {
      unwrapped_ += wrap_phase(a - last_);
    }
    last_ = a;
    return unwrapped_;
  }

  double unwrapped() const { return unwrapped_; }
  const WaveFunction& reference() const { return ref_; }

 private:
  WaveFunction ref_;
  double unwrapped_ = 0.0;
  double last_ = 0.0;
  bool started_ = false;
};

// Attaches the winding count from a tracked unwrapped total phase, which
// should start near 0 at t = 0.
inline void attach_winding(PhaseDecomposition& d, double unwrapped_total) {
  d.winding = std::lround((unwrapped_total - d.total) / two_pi);
}

}  // namespace gpeberry
