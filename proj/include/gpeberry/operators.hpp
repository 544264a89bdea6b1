#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "gpeberry/grid.hpp"
#include "gpeberry/params.hpp"

namespace gpeberry {

// Row-banded matrix with two sub- and two super-diagonals;
// rows[i][k] holds element (i, i + k - 2). Entries outside the grid are
// dropped (homogeneous Dirichlet boundary).
struct Pentadiagonal {
  std::vector<std::array<cplx, 5>> rows;

  explicit Pentadiagonal(std::size_t n = 0) : rows(n, std::array<cplx, 5>{}) {}

  std::size_t size() const { return rows.size(); }

  void apply(std::span<const cplx> in, std::span<cplx> out) const {
    const std::size_t n = rows.size();
    for (std::size_t i = 0; i < n; ++i) {
      cplx acc{};
      for (int k = 0; k < 5; ++k) {
        const std::ptrdiff_t j = std::ptrdiff_t(i) + k - 2;
        if (j >= 0 && j < std::ptrdiff_t(n)) acc += rows[i][k] * in[std::size_t(j)];
      }
      out[i] = acc;
    }
  }

  std::vector<cplx> operator*(std::span<const cplx> in) const {
    std::vector<cplx> out(in.size());
    apply(in, out);
    return out;
  }

  void add_diagonal(std::span<const double> d) {
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i][2] += d[i];
  }
};

// Gaussian elimination without pivoting, in place on a copy of A. Used for
// A = 1 + i tau H with H Hermitian, whose Hermitian part is the identity,
// so elimination without pivoting is stable.
inline void solve_banded(Pentadiagonal A, std::vector<cplx>& rhs) {
  const std::size_t n = A.size();
  auto& r = A.rows;
  for (std::size_t i = 0; i < n; ++i) {
    const cplx piv = r[i][2];
    for (std::size_t d = 1; d <= 2 && i + d < n; ++d) {
      // element (i+d, i) sits at column index 2 - d of row i+d
      const cplx m = r[i + d][2 - d] / piv;
      if (m == cplx{}) continue;
      for (std::size_t c = 0; c <= 2; ++c) {
        // subtract m * row i entry (i, i + c) from row i+d entry (i+d, i+c)
        const std::size_t kk = 2 - d + c;
        if (kk < 5) r[i + d][kk] -= m * r[i][2 + c];
      }
      rhs[i + d] -= m * rhs[i];
    }
  }
  for (std::size_t ii = n; ii-- > 0;) {
    cplx acc = rhs[ii];
    for (std::size_t c = 1; c <= 2 && ii + c < n; ++c) acc -= r[ii][2 + c] * rhs[ii + c];
    rhs[ii] = acc / r[ii][2];
  }
}

// Quadratic linear Hamiltonian mu p^2/2 + sigma x^2/2 + rho (xp + px)/2
// with fourth-order central differences: p^2 from the 5-point second
// derivative, x p + p x = -i hbar (X D + D X) with the 5-point first
// derivative D, which keeps the matrix Hermitian.
inline Pentadiagonal linear_hamiltonian(const SpatialGrid& grid, const ParameterSet& R, const PhysicalScales& scales,
                                        bool include_potential = true) {
  const std::size_t n = grid.n_points;
  const double h = grid.dx();
  const double hb = scales.hbar;
  Pentadiagonal H(n);
  const double kin = 0.5 * R.mu * hb * hb / (12.0 * h * h);
  const std::array<double, 5> d2{-1.0, 16.0, -30.0, 16.0, -1.0};
  const std::array<double, 5> d1{1.0, -8.0, 0.0, 8.0, -1.0};
  const cplx rterm = cplx(0.0, -0.5 * hb * R.rho) / (12.0 * h);
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = grid.x(i);
    for (int k = 0; k < 5; ++k) {
      const std::ptrdiff_t j = std::ptrdiff_t(i) + k - 2;
      if (j < 0 || j >= std::ptrdiff_t(n)) continue;
      const double xj = grid.x(std::size_t(j));
      H.rows[i][k] = -kin * d2[k] + rterm * (xi + xj) * d1[k];
    }
    if (include_potential) H.rows[i][2] += 0.5 * R.sigma * xi * xi;
  }
  return H;
}

// Central first derivative of order 8.
inline std::vector<cplx> derivative8(std::span<const cplx> f, double h) {
  static constexpr std::array<double, 4> w{4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
  const std::ptrdiff_t n = std::ptrdiff_t(f.size());
  std::vector<cplx> out(f.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    cplx acc{};
    for (std::ptrdiff_t k = 1; k <= 4; ++k) {
      const cplx fp = i + k < n ? f[std::size_t(i + k)] : cplx{};
      const cplx fm = i - k >= 0 ? f[std::size_t(i - k)] : cplx{};
      acc += w[std::size_t(k - 1)] * (fp - fm);
    }
    out[std::size_t(i)] = acc / h;
  }
  return out;
}

namespace detail {

template <std::size_t M>
std::vector<cplx> stencil_apply(std::span<const cplx> f, const std::array<double, M>& w, double scale) {
  const std::ptrdiff_t n = std::ptrdiff_t(f.size()), half = std::ptrdiff_t(M / 2);
  std::vector<cplx> out(f.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    cplx acc{};
    for (std::ptrdiff_t k = -half; k <= half; ++k) {
      const std::ptrdiff_t j = i + k;
      if (j >= 0 && j < n) acc += w[std::size_t(k + half)] * f[std::size_t(j)];
    }
    out[std::size_t(i)] = acc * scale;
  }
  return out;
}

}  // namespace detail

// Estimated truncation error of the 4th-order kinetic term on f, taken as
// (mu hbar^2/2) ||(D2_4 - D2_8) f|| / ||f||, with D2_8 the 9-point stencil.
inline double kinetic_truncation_estimate(std::span<const cplx> f, double h, double mu, double hbar) {
  static constexpr std::array<double, 5> w4{-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0};
  static constexpr std::array<double, 9> w8{-1.0 / 560.0, 8.0 / 315.0, -1.0 / 5.0,  8.0 / 5.0,    -205.0 / 72.0,
                                            8.0 / 5.0,    -1.0 / 5.0,  8.0 / 315.0, -1.0 / 560.0};
  const auto a = detail::stencil_apply(f, w4, 1.0 / (h * h));
  const auto b = detail::stencil_apply(f, w8, 1.0 / (h * h));
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(f[i]);
  }
  if (den == 0.0) return 0.0;
  return 0.5 * std::abs(mu) * hbar * hbar * std::sqrt(num / den);
}

}  // namespace gpeberry
