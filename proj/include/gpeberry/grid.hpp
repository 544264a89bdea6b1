#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "gpeberry/params.hpp"

namespace gpeberry {

// Uniform grid x_i = x_min + i dx, i = 0..n_points-1.
struct SpatialGrid {
  double x_min = -10.0;
  double x_max = 10.0;
  std::size_t n_points = 2048;

  double dx() const { return (x_max - x_min) / double(n_points - 1); }
  double x(std::size_t i) const { return x_min + double(i) * dx(); }
  double length() const { return x_max - x_min; }

  std::vector<double> points() const {
    std::vector<double> xs(n_points);
    for (std::size_t i = 0; i < n_points; ++i) xs[i] = x(i);
    return xs;
  }

  void validate() const {
    if (n_points < 16) throw ConfigError("grid needs at least 16 points");
    if (!(x_max > x_min) || !std::isfinite(x_min) || !std::isfinite(x_max))
      throw ConfigError("grid needs finite x_min < x_max");
  }

  friend bool operator==(const SpatialGrid&, const SpatialGrid&) = default;
};

struct GridOptions {
  std::size_t min_points = 2048;
  std::size_t max_points = std::size_t(1) << 16;
  double widths = 8.0;       // half-width in units of sqrt(hbar mu / Omega) sqrt(2 n_max + 1)
  double max_k_dx = 0.15;  // resolution budget on the rms wavenumber
};

// Grid covering the n <= n_max eigenstates at R around center. The
// half-width is widths * sqrt(hbar mu/Omega) * sqrt(2 n_max + 1); points
// start at min_points and double until dx times the rms wavenumber of the
// n_max state fits the budget.
inline SpatialGrid auto_grid(const ParameterSet& R, const PhysicalScales& scales, int n_max, double center = 0.0,
                             const GridOptions& opt = {}) {
  const auto f = derive_frequencies(R, scales);
  if (!(R.mu > 0.0)) throw LocalizationViolated("grid sizing needs mu > 0: " + R.describe());
  const double spread = std::sqrt(2.0 * n_max + 1.0);
  const double half = opt.widths * std::sqrt(scales.hbar * R.mu / f.omega) * spread;
  const double k_rms = std::sqrt(scales.hbar * f.sigma_tilde * (2.0 * n_max + 1.0) / (2.0 * f.omega)) / scales.hbar;
  SpatialGrid g{center - half, center + half, opt.min_points};
  while (g.dx() * k_rms * spread > opt.max_k_dx && g.n_points < opt.max_points) g.n_points *= 2;
  return g;
}

struct WaveFunction {
  SpatialGrid grid;
  std::vector<cplx> values;
  double center_x = 0.0;
  double center_p = 0.0;

  WaveFunction() = default;
  explicit WaveFunction(const SpatialGrid& g) : grid(g), values(g.n_points) {}
  WaveFunction(const SpatialGrid& g, std::vector<cplx> v, double cx = 0.0, double cp = 0.0)
      : grid(g), values(std::move(v)), center_x(cx), center_p(cp) {}

  std::size_t size() const { return values.size(); }
  cplx& operator[](std::size_t i) { return values[i]; }
  const cplx& operator[](std::size_t i) const { return values[i]; }

  double norm_sq() const {
    double acc = 0.0;
    for (const auto& v : values) acc += std::norm(v);
    return acc * grid.dx();
  }
  double norm() const { return std::sqrt(norm_sq()); }

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : values) m = std::max(m, std::abs(v));
    return m;
  }

  // Largest |psi| over the two end samples relative to max |psi|.
  double boundary_ratio() const {
    const double m = max_abs();
    if (m == 0.0) return 0.0;
    return std::max(std::abs(values.front()), std::abs(values.back())) / m;
  }

  bool localized(double tol = 1e-12) const { return boundary_ratio() < tol; }

  WaveFunction& operator*=(cplx k) {
    for (auto& v : values) v *= k;
    return *this;
  }
};

// <phi|psi> by the grid sum, which is the trapezoid rule for states that
// vanish at the ends.
inline cplx inner_product(const WaveFunction& phi, const WaveFunction& psi) {
  if (phi.size() != psi.size()) throw ConfigError("inner_product: grid size mismatch");
  cplx acc{};
  for (std::size_t i = 0; i < phi.size(); ++i) acc += std::conj(phi[i]) * psi[i];
  return acc * phi.grid.dx();
}

inline std::vector<std::vector<cplx>> gram_matrix(std::span<const WaveFunction> states) {
  const std::size_t n = states.size();
  std::vector<std::vector<cplx>> g(n, std::vector<cplx>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g[i][j] = inner_product(states[i], states[j]);
  return g;
}

// Largest entry of |G - 1|.
inline double gram_defect(std::span<const WaveFunction> states) {
  const auto g = gram_matrix(states);
  double m = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j) m = std::max(m, std::abs(g[i][j] - (i == j ? 1.0 : 0.0)));
  return m;
}

// CSV columns: x, Re psi, Im psi, |psi|^2.
inline void write_wavefunction_csv(std::ostream& os, const WaveFunction& psi) {
  const auto old = os.precision(17);
  os << "x,re_psi,im_psi,abs2_psi\n";
  for (std::size_t i = 0; i < psi.size(); ++i)
    os << psi.grid.x(i) << ',' << psi[i].real() << ',' << psi[i].imag() << ',' << std::norm(psi[i]) << '\n';
  os.precision(old);
}

// Binary layout, little-endian:
//   char[8] "GPEBWF01", u32 version, f64 x_min, f64 x_max, u64 n_points,
//   f64 center_x, f64 center_p, u64 count, then count (re, im) f64 pairs.
namespace detail {

inline constexpr char wf_magic[8] = {'G', 'P', 'E', 'B', 'W', 'F', '0', '1'};
inline constexpr std::uint32_t wf_version = 1;

template <typename T>
void put_le(std::ostream& os, T v) {
  static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  unsigned char buf[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof(T))) throw ConfigError("wavefunction file truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace detail

inline void write_wavefunction_binary(std::ostream& os, const WaveFunction& psi) {
  os.write(detail::wf_magic, 8);
  detail::put_le<std::uint32_t>(os, detail::wf_version);
  detail::put_le<double>(os, psi.grid.x_min);
  detail::put_le<double>(os, psi.grid.x_max);
  detail::put_le<std::uint64_t>(os, psi.grid.n_points);
  detail::put_le<double>(os, psi.center_x);
  detail::put_le<double>(os, psi.center_p);
  detail::put_le<std::uint64_t>(os, psi.size());
  for (const auto& v : psi.values) {
    detail::put_le<double>(os, v.real());
    detail::put_le<double>(os, v.imag());
  }
}

inline WaveFunction read_wavefunction_binary(std::istream& is) {
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, detail::wf_magic, 8) != 0)
    throw ConfigError("not a wavefunction file (bad magic)");
  if (detail::get_le<std::uint32_t>(is) != detail::wf_version) throw ConfigError("unsupported wavefunction version");
  WaveFunction psi;
  psi.grid.x_min = detail::get_le<double>(is);
  psi.grid.x_max = detail::get_le<double>(is);
  psi.grid.n_points = detail::get_le<std::uint64_t>(is);
  psi.center_x = detail::get_le<double>(is);
  psi.center_p = detail::get_le<double>(is);
  const auto count = detail::get_le<std::uint64_t>(is);
  if (count != psi.grid.n_points) throw ConfigError("wavefunction count does not match grid");
  psi.values.resize(count);
  for (auto& v : psi.values) {
    const double re = detail::get_le<double>(is);
    const double im = detail::get_le<double>(is);
    v = {re, im};
  }
  return psi;
}

}  // namespace gpeberry
