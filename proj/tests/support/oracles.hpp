#pragma once

// Test-side reference computations, written independently of the library's
// numerical paths.

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "gpeberry/params.hpp"

namespace oracle {

using cplx = std::complex<double>;

// Adaptive Gauss-Kronrod (7-15) with absolute tolerance tol.
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-13,
                        int depth = 0) {
  static constexpr std::array<double, 8> xk{0.991455371120812639, 0.949107912342758525, 0.864864423359769073,
                                            0.741531185599394440, 0.586087235467691130, 0.405845151377397167,
                                            0.207784955007898468, 0.0};
  static constexpr std::array<double, 8> wk{0.022935322010529225, 0.063092092629978553, 0.104790010322250184,
                                            0.140653259715525919, 0.169004726639267903, 0.190350578064785410,
                                            0.204432940075298892, 0.209482141084727828};
  static constexpr std::array<double, 4> wg{0.129484966168869693, 0.279705391489276668, 0.381830050505118945,
                                            0.417959183673469388};
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double k = wk[7] * f(c), g = wg[3] * f(c);
  for (int i = 0; i < 7; ++i) {
    const double fs = f(c - h * xk[std::size_t(i)]) + f(c + h * xk[std::size_t(i)]);
    k += wk[std::size_t(i)] * fs;
    if (i % 2 == 1) g += wg[std::size_t(i / 2)] * fs;
  }
  k *= h;
  g *= h;
  if (std::abs(k - g) <= tol || depth > 40) return k;
  return integrate(f, a, c, 0.5 * tol, depth + 1) + integrate(f, c, b, 0.5 * tol, depth + 1);
}

// Five-point central derivative with one Richardson step.
inline cplx derivative(const std::function<cplx(double)>& f, double x, double h = 1e-2) {
  auto d = [&](double hh) {
    return (f(x - 2 * hh) - 8.0 * f(x - hh) + 8.0 * f(x + hh) - f(x + 2 * hh)) / (12.0 * hh);
  };
  return (16.0 * d(0.5 * h) - d(h)) / 15.0;
}

inline cplx second_derivative(const std::function<cplx(double)>& f, double x, double h = 1e-2) {
  auto d = [&](double hh) {
    return (-f(x - 2 * hh) + 16.0 * f(x - hh) - 30.0 * f(x) + 16.0 * f(x + hh) - f(x + 2 * hh)) / (12.0 * hh * hh);
  };
  return (16.0 * d(0.5 * h) - d(h)) / 15.0;
}

// Physicists' Hermite polynomial by explicit power sum.
inline double hermite_H(int n, double x) {
  double acc = 0.0;
  for (int m = 0; m <= n / 2; ++m) {
    const double term = std::pow(-1.0, m) * std::tgamma(n + 1.0) / (std::tgamma(m + 1.0) * std::tgamma(n - 2.0 * m + 1.0)) *
                        std::pow(2.0 * x, n - 2 * m);
    acc += term;
  }
  return acc;
}

// Closed-form eigenfunction in the (1/(pi hbar))^{1/4}(Om/mu)^{1/4}(i/sqrt2)^n/sqrt(n!) H_n form.
inline cplx eigenfunction(int n, double mu, double rho, double omega, double hbar, double x) {
  const double pref = std::pow(1.0 / (std::numbers::pi * hbar), 0.25) * std::pow(omega / mu, 0.25) /
                      std::sqrt(std::tgamma(n + 1.0)) / std::pow(std::sqrt(2.0), n);
  const cplx in = std::pow(cplx(0.0, 1.0), n);
  const cplx gauss = std::exp(cplx(-omega / (2.0 * hbar * mu) * x * x, -rho / (2.0 * hbar * mu) * x * x));
  return pref * in * gauss * hermite_H(n, std::sqrt(omega / (hbar * mu)) * x);
}

// Moment flow matrix on (p, x, s_pp, s_xp, s_xx) for constant parameters.
inline Eigen::Matrix<double, 5, 5> hes_matrix(double mu, double rho, double s0, double st) {
  Eigen::Matrix<double, 5, 5> A = Eigen::Matrix<double, 5, 5>::Zero();
  A(0, 0) = -rho;
  A(0, 1) = -s0;
  A(1, 0) = mu;
  A(1, 1) = rho;
  A(2, 2) = -2.0 * rho;
  A(2, 3) = -2.0 * st;
  A(3, 2) = mu;
  A(3, 4) = -st;
  A(4, 3) = 2.0 * mu;
  A(4, 4) = 2.0 * rho;
  return A;
}

inline std::array<double, 5> hes_exact(const std::array<double, 5>& g0, double mu, double rho, double s0, double st,
                                       double t) {
  const Eigen::Matrix<double, 5, 5> E = (t * hes_matrix(mu, rho, s0, st)).exp();
  Eigen::Matrix<double, 5, 1> v;
  for (int i = 0; i < 5; ++i) v(i) = g0[std::size_t(i)];
  const Eigen::Matrix<double, 5, 1> r = E * v;
  return {r(0), r(1), r(2), r(3), r(4)};
}

inline std::array<cplx, 2> germ_exact(const std::array<cplx, 2>& a0, double mu, double rho, double st, double t) {
  Eigen::Matrix2d A;
  A << -rho, -st, mu, rho;
  const Eigen::Matrix2d E = (t * A).exp();
  return {E(0, 0) * a0[0] + E(0, 1) * a0[1], E(1, 0) * a0[0] + E(1, 1) * a0[1]};
}

// Direct O(N^2) sum of (kappa/2) Int (a x^2 + 2 b x y + c y^2) |psi(y)|^2 dy.
inline std::vector<double> kernel_double_sum(const std::vector<double>& x, const std::vector<cplx>& psi, double dx,
                                             double kappa, double a, double b, double c) {
  std::vector<double> v(x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j)
      acc += (a * x[i] * x[i] + 2.0 * b * x[i] * x[j] + c * x[j] * x[j]) * std::norm(psi[j]);
    v[i] = 0.5 * kappa * acc * dx;
  }
  return v;
}

// Random localization-respecting parameters with Omega = target.
inline gpeberry::ParameterSet random_parameters(std::mt19937& rng, double omega, double kappa_tilde) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  gpeberry::ParameterSet R;
  R.mu = 0.5 + 1.5 * u(rng);
  R.rho = -0.5 + u(rng);
  R.a = u(rng) - 0.5;
  R.b = u(rng);
  R.c = 2.0 * u(rng);
  const double st = (omega * omega + R.rho * R.rho) / R.mu;
  R.sigma = st - kappa_tilde * R.a;
  return R;
}

}  // namespace oracle
