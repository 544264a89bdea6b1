#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "gpeberry/errors.hpp"

namespace gpeberry {

using cplx = std::complex<double>;
inline constexpr cplx I{0.0, 1.0};
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// hbar, the raw coupling kappa and the norm-absorbed coupling
// kappa_tilde = kappa * ||Psi||^2.
struct PhysicalScales {
  double hbar = 1.0;
  double kappa = 0.0;
  double kappa_tilde = 0.0;

  // Scales for unit-norm working states, where kappa == kappa_tilde.
  static PhysicalScales unit_norm(double hbar, double kappa_tilde) {
    PhysicalScales s{hbar, kappa_tilde, kappa_tilde};
    s.validate();
    return s;
  }

  void validate() const {
    if (!(hbar > 0.0) || !std::isfinite(hbar)) throw ConfigError("hbar must be positive and finite");
    if (!std::isfinite(kappa) || !std::isfinite(kappa_tilde)) throw ConfigError("coupling must be finite");
  }

  // kappa_tilde must equal kappa * norm_sq of the state it is used with.
  bool consistent_with_norm(double norm_sq, double rel_tol = 1e-8) const {
    const double expected = kappa * norm_sq;
    return std::abs(expected - kappa_tilde) <= rel_tol * std::max(1.0, std::abs(kappa_tilde));
  }
};

// Instantaneous Hamiltonian coefficients
//   H = mu p^2/2 + sigma x^2/2 + rho (xp+px)/2
//       + (kappa/2) Int [a x^2 + 2 b x y + c y^2] |Psi(y)|^2 dy.
struct ParameterSet {
  double mu = 1.0;
  double sigma = 1.0;
  double rho = 0.0;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  static constexpr std::size_t size = 6;
  static constexpr std::array<const char*, 6> names{"mu", "sigma", "rho", "a", "b", "c"};

  double& operator[](std::size_t i) {
    switch (i) {
      case 0: return mu;
      case 1: return sigma;
      case 2: return rho;
      case 3: return a;
      case 4: return b;
      default: return c;
    }
  }
  double operator[](std::size_t i) const { return const_cast<ParameterSet&>(*this)[i]; }

  bool finite() const {
    for (std::size_t i = 0; i < size; ++i) {
      if (!std::isfinite((*this)[i])) return false;
    }
    return true;
  }

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    os << "mu=" << mu << " sigma=" << sigma << " rho=" << rho << " a=" << a << " b=" << b << " c=" << c;
    return os.str();
  }

  friend ParameterSet operator+(ParameterSet l, const ParameterSet& r) {
    for (std::size_t i = 0; i < size; ++i) l[i] += r[i];
    return l;
  }
  friend ParameterSet operator-(ParameterSet l, const ParameterSet& r) {
    for (std::size_t i = 0; i < size; ++i) l[i] -= r[i];
    return l;
  }
  friend ParameterSet operator*(double k, ParameterSet r) {
    for (std::size_t i = 0; i < size; ++i) r[i] *= k;
    return r;
  }
  friend bool operator==(const ParameterSet&, const ParameterSet&) = default;
};

struct DerivedFrequencies {
  double sigma0 = 0.0;       // sigma + kappa_tilde (a + b); drives first moments
  double sigma_tilde = 0.0;  // sigma + kappa_tilde a; drives second moments and the germ
  double sigma_bar = 0.0;    // sigma + kappa_tilde (a + c); enters the surface two-form
  double omega = 0.0;        // sqrt(sigma_tilde mu - rho^2)
  double omega_tilde = 0.0;  // sqrt(sigma0 mu - rho^2)
};

inline DerivedFrequencies derive_frequencies(const ParameterSet& R, const PhysicalScales& scales) {
  if (!R.finite()) throw LocalizationViolated("non-finite parameters: " + R.describe());
  DerivedFrequencies f;
  const double k = scales.kappa_tilde;
  f.sigma0 = R.sigma + k * (R.a + R.b);
  f.sigma_tilde = R.sigma + k * R.a;
  f.sigma_bar = R.sigma + k * (R.a + R.c);
  const double om2 = f.sigma_tilde * R.mu - R.rho * R.rho;
  const double omt2 = f.sigma0 * R.mu - R.rho * R.rho;
  if (!(om2 > 0.0) || !(omt2 > 0.0)) {
    std::ostringstream os;
    os.precision(17);
    os << "localization condition violated (sigma_tilde*mu-rho^2=" << om2 << ", sigma0*mu-rho^2=" << omt2
       << ") at " << R.describe() << " kappa_tilde=" << k;
    throw LocalizationViolated(os.str());
  }
  f.omega = std::sqrt(om2);
  f.omega_tilde = std::sqrt(omt2);
  return f;
}

// c0 + sum_k [cos_k cos(2 pi k s) + sin_k sin(2 pi k s)], k = 1..K.
struct FourierSeries {
  double constant = 0.0;
  std::vector<double> cos_coeffs;
  std::vector<double> sin_coeffs;

  double value(double s) const {
    double v = constant;
    for (std::size_t k = 0; k < cos_coeffs.size(); ++k) v += cos_coeffs[k] * std::cos(two_pi * double(k + 1) * s);
    for (std::size_t k = 0; k < sin_coeffs.size(); ++k) v += sin_coeffs[k] * std::sin(two_pi * double(k + 1) * s);
    return v;
  }

  double derivative(double s) const {
    double v = 0.0;
    for (std::size_t k = 0; k < cos_coeffs.size(); ++k) {
      const double w = two_pi * double(k + 1);
      v -= cos_coeffs[k] * w * std::sin(w * s);
    }
    for (std::size_t k = 0; k < sin_coeffs.size(); ++k) {
      const double w = two_pi * double(k + 1);
      v += sin_coeffs[k] * w * std::cos(w * s);
    }
    return v;
  }

  bool is_constant() const {
    auto zero = [](double x) { return x == 0.0; };
    return std::all_of(cos_coeffs.begin(), cos_coeffs.end(), zero) &&
           std::all_of(sin_coeffs.begin(), sin_coeffs.end(), zero);
  }

  // Trigonometric interpolant through N uniformly spaced periodic samples
  // f(j/N), j = 0..N-1. For even N the Nyquist mode is split symmetrically
  // (cosine part only), which keeps the interpolant real.
  static FourierSeries interpolate(const std::vector<double>& samples) {
    const std::size_t n = samples.size();
    if (n == 0) throw ConfigError("sampled coefficient needs at least one sample");
    FourierSeries fs;
    double mean = 0.0;
    for (double v : samples) mean += v;
    fs.constant = mean / double(n);
    const std::size_t kmax = n / 2;
    fs.cos_coeffs.assign(kmax, 0.0);
    fs.sin_coeffs.assign(kmax, 0.0);
    for (std::size_t k = 1; k <= kmax; ++k) {
      double re = 0.0, im = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double th = two_pi * double(k) * double(j) / double(n);
        re += samples[j] * std::cos(th);
        im += samples[j] * std::sin(th);
      }
      const bool nyquist = (n % 2 == 0) && (k == kmax);
      const double scale = nyquist ? 1.0 / double(n) : 2.0 / double(n);
      fs.cos_coeffs[k - 1] = scale * re;
      fs.sin_coeffs[k - 1] = nyquist ? 0.0 : scale * im;
    }
    return fs;
  }
};

// A T-periodic loop s in [0,1] -> R(s), one Fourier series per coefficient.
// An optional monotone warp u(s) = s - w sin(2 pi s)/(2 pi), 0 <= w <= 1,
// retraces the same geometric loop with a different speed profile; w = 1
// starts and ends the traversal at rest.
class ParameterPath {
 public:
  ParameterPath() = default;
  ParameterPath(std::array<FourierSeries, 6> coeffs, double period_T, double warp = 0.0, bool reversed = false)
      : coeffs_(std::move(coeffs)), period_T_(period_T), warp_(warp), reversed_(reversed) {
    if (!(period_T_ > 0.0) || !std::isfinite(period_T_)) throw ConfigError("period_T must be positive");
    if (!(warp_ >= 0.0 && warp_ <= 1.0)) throw ConfigError("warp must lie in [0, 1]");
  }

  static ParameterPath constant(const ParameterSet& R, double period_T) {
    std::array<FourierSeries, 6> c;
    for (std::size_t i = 0; i < 6; ++i) c[i].constant = R[i];
    return ParameterPath(std::move(c), period_T);
  }

  static ParameterPath from_samples(const std::array<std::vector<double>, 6>& samples, double period_T) {
    std::array<FourierSeries, 6> c;
    for (std::size_t i = 0; i < 6; ++i) c[i] = FourierSeries::interpolate(samples[i]);
    return ParameterPath(std::move(c), period_T);
  }

  double period() const { return period_T_; }
  double warp() const { return warp_; }
  bool is_reversed() const { return reversed_; }
  const std::array<FourierSeries, 6>& coefficients() const { return coeffs_; }

  ParameterPath with_period(double period_T) const { return ParameterPath(coeffs_, period_T, warp_, reversed_); }
  ParameterPath with_warp(double warp) const { return ParameterPath(coeffs_, period_T_, warp, reversed_); }
  // The same loop traversed backwards: R_rev(s) = R(1 - s).
  ParameterPath reversed() const { return ParameterPath(coeffs_, period_T_, warp_, !reversed_); }

  ParameterSet at(double s) const {
    const double u = reduce(warped(oriented(s)));
    ParameterSet R;
    for (std::size_t i = 0; i < 6; ++i) R[i] = coeffs_[i].value(u);
    return R;
  }

  // dR/ds including the warp's chain-rule factor.
  ParameterSet derivative(double s) const {
    const double sr = oriented(s);
    const double u = reduce(warped(sr));
    const double du = (reversed_ ? -1.0 : 1.0) * (1.0 - warp_ * std::cos(two_pi * sr));
    ParameterSet d;
    for (std::size_t i = 0; i < 6; ++i) d[i] = du * coeffs_[i].derivative(u);
    return d;
  }

  // Parameters at fast time t (s = t / T).
  ParameterSet at_time(double t) const { return at(t / period_T_); }

  // Rejects mu = 0 anywhere and any localization failure on a sampling of
  // the loop. Returns min Omega over the samples.
  double validate(const PhysicalScales& scales, std::size_t n_samples = 1024) const {
    double min_omega = INFINITY;
    for (std::size_t j = 0; j < n_samples; ++j) {
      const ParameterSet R = at(double(j) / double(n_samples));
      if (!(std::abs(R.mu) > 0.0)) throw LocalizationViolated("mu vanishes on the loop at " + R.describe());
      min_omega = std::min(min_omega, derive_frequencies(R, scales).omega);
    }
    return min_omega;
  }

  // Largest instantaneous frequency max(Omega, Omega_tilde, 2 Omega) seen on a sampling of the loop.
  double max_frequency(const PhysicalScales& scales, std::size_t n_samples = 1024) const {
    double m = 0.0;
    for (std::size_t j = 0; j < n_samples; ++j) {
      const auto f = derive_frequencies(at(double(j) / double(n_samples)), scales);
      m = std::max({m, f.omega_tilde, 2.0 * f.omega});
    }
    return m;
  }

  // max_i max_s |R_i'(s)| / max_s |R_i(s)|, skipping coefficients that
  // vanish identically. Reported only.
  double adiabaticity_ratio(std::size_t n_samples = 1024) const {
    std::array<double, 6> dmax{}, vmax{};
    for (std::size_t j = 0; j < n_samples; ++j) {
      const double s = double(j) / double(n_samples);
      const ParameterSet R = at(s), dR = derivative(s);
      for (std::size_t i = 0; i < 6; ++i) {
        dmax[i] = std::max(dmax[i], std::abs(dR[i]));
        vmax[i] = std::max(vmax[i], std::abs(R[i]));
      }
    }
    double r = 0.0;
    for (std::size_t i = 0; i < 6; ++i)
      if (vmax[i] > 0.0) r = std::max(r, dmax[i] / vmax[i]);
    return r;
  }

  // Rate of parameter change per fast oscillation: max_s |R'|/|R| / (T Omega).
  double adiabaticity_parameter(const PhysicalScales& scales, std::size_t n_samples = 1024) const {
    return adiabaticity_ratio(n_samples) / (period_T_ * validate(scales, n_samples));
  }

 private:
  static double reduce(double s) {
    double r = s - std::floor(s);
    return r >= 1.0 ? 0.0 : r;
  }
  double oriented(double s) const { return reversed_ ? reduce(1.0 - reduce(s)) : reduce(s); }
  double warped(double s) const { return warp_ == 0.0 ? s : s - warp_ * std::sin(two_pi * s) / two_pi; }

  std::array<FourierSeries, 6> coeffs_{};
  double period_T_ = 1.0;
  double warp_ = 0.0;
  bool reversed_ = false;
};

// dR/ds of the path.
inline ParameterSet path_derivative(const ParameterPath& path, double s) { return path.derivative(s); }

// Slow derivatives of the combinations the adiabatic formulas need.
struct SlowDerivatives {
  double omega = 0.0;
  double d_omega = 0.0;         // Omega'
  double d_rho_over_mu = 0.0;   // (rho/mu)'
  double d_mu_over_omega = 0.0; // (mu/Omega)'
  double d_rho_over_omega = 0.0;
  double d_omega_over_mu = 0.0;
  double d_sigma_tilde = 0.0;
};

inline SlowDerivatives slow_derivatives(const ParameterSet& R, const ParameterSet& dR, const PhysicalScales& scales) {
  const auto f = derive_frequencies(R, scales);
  SlowDerivatives d;
  d.omega = f.omega;
  d.d_sigma_tilde = dR.sigma + scales.kappa_tilde * dR.a;
  d.d_omega = (d.d_sigma_tilde * R.mu + f.sigma_tilde * dR.mu - 2.0 * R.rho * dR.rho) / (2.0 * f.omega);
  d.d_rho_over_mu = (dR.rho * R.mu - R.rho * dR.mu) / (R.mu * R.mu);
  d.d_mu_over_omega = (dR.mu * f.omega - R.mu * d.d_omega) / (f.omega * f.omega);
  d.d_rho_over_omega = (dR.rho * f.omega - R.rho * d.d_omega) / (f.omega * f.omega);
  d.d_omega_over_mu = (d.d_omega * R.mu - f.omega * dR.mu) / (R.mu * R.mu);
  return d;
}

}  // namespace gpeberry
