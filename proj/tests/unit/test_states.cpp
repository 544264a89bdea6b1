#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "gpeberry/states.hpp"
#include "oracles.hpp"

using namespace gpeberry;

namespace {

const SpatialGrid wide{-12.0, 12.0, 4097};

double max_pointwise(const WaveFunction& a, const WaveFunction& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST(HermiteFunctions, MatchExplicitPolynomials) {
  for (double xi : {-3.1, -0.4, 0.0, 0.9, 2.7}) {
    const auto h = hermite_functions(xi, 10);
    for (int n = 0; n <= 10; ++n) {
      const double ref = oracle::hermite_H(n, xi) * std::exp(-0.5 * xi * xi) /
                         std::sqrt(std::pow(2.0, n) * std::tgamma(n + 1.0) * std::sqrt(std::numbers::pi));
      EXPECT_NEAR(h[std::size_t(n)], ref, 1e-12 * std::max(1.0, std::abs(ref))) << "n=" << n << " xi=" << xi;
    }
  }
}

TEST(Eigenstate, MatchesClosedFormPointwise) {
  std::mt19937 rng(31);
  const auto sc = PhysicalScales::unit_norm(0.8, 0.25);
  const ParameterSet R = oracle::random_parameters(rng, 1.3, sc.kappa_tilde);
  const auto f = derive_frequencies(R, sc);
  for (int n : {0, 1, 4, 7}) {
    const auto psi = eigenstate(n, R, sc, wide);
    double worst = 0.0;
    for (std::size_t i = 0; i < wide.n_points; i += 37)
      worst = std::max(worst, std::abs(psi[i] - oracle::eigenfunction(n, R.mu, R.rho, f.omega, sc.hbar, wide.x(i))));
    EXPECT_LT(worst, 1e-12);
  }
}

TEST(Eigenstate, OrthonormalAndLocalized) {
  const ParameterSet R{1.0, 1.0, 0.4, 0.0, 0.0, 0.0};
  const auto sc = PhysicalScales::unit_norm(1.0, 0.0);
  std::vector<WaveFunction> v;
  for (int n = 0; n <= 6; ++n) v.push_back(eigenstate(n, R, sc, wide));
  EXPECT_LT(gram_defect(v), 1e-12);
  EXPECT_TRUE(v.back().localized());
}

TEST(Eigenvalue, ClosedFormValues) {
  const auto lin = PhysicalScales::unit_norm(1.0, 0.0);
  EXPECT_DOUBLE_EQ(eigenvalue(0, {1.0, 1.0, 0.0, 0.0, 0.0, 0.0}, lin), 0.5);
  EXPECT_DOUBLE_EQ(eigenvalue(3, {1.0, 1.0, 0.0, 0.0, 0.0, 0.0}, lin), 3.5);
  EXPECT_DOUBLE_EQ(eigenvalue(0, {1.0, 1.0, 0.0, 0.0, 0.0, 1.0}, PhysicalScales::unit_norm(1.0, 0.5)), 0.625);
  // Linear in (n + 1/2).
  const ParameterSet R{1.4, 0.9, 0.2, 0.1, 0.3, 0.7};
  const auto sc = PhysicalScales::unit_norm(0.6, 0.8);
  EXPECT_NEAR(eigenvalue(5, R, sc) / eigenvalue(0, R, sc), 11.0, 1e-13);
}

TEST(FockState, FloquetGermReproducesEigenstates) {
  const ParameterSet R{1.3, 0.9, 0.35, 0.2, 0.1, 0.5};
  const auto sc = PhysicalScales::unit_norm(1.0, 0.5);
  const GermState a = floquet_solution(R, sc, 0.0);
  for (int n = 0; n <= 5; ++n)
    EXPECT_LT(max_pointwise(fock_state(n, a, a.argC_unwrapped, 0.0, {}, sc, wide), eigenstate(n, R, sc, wide)),
              1e-13);
}

TEST(FockState, VacuumIsTheNormalizedGaussian) {
  const auto sc = PhysicalScales::unit_norm(1.0, 0.0);
  const GermState a = floquet_solution({1.0, 1.0, 0.0, 0.0, 0.0, 0.0}, sc, 0.0);
  const auto psi = vacuum_state(a, 0.0, 0.0, {}, sc, wide);
  for (std::size_t i = 0; i < wide.n_points; i += 101)
    EXPECT_NEAR(std::abs(psi[i]), std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * wide.x(i) * wide.x(i)), 1e-14);
  EXPECT_NEAR(psi.norm_sq(), 1.0, 1e-12);
}

TEST(FockState, ChirpOnlyChangesThePhase) {
  const auto sc = PhysicalScales::unit_norm(1.0, 0.0);
  const GermState a = floquet_solution({1.0, 1.0, 0.0, 0.0, 0.0, 0.0}, sc, 0.0);
  const GermState b = floquet_solution({1.0, 1.25, 0.5, 0.0, 0.0, 0.0}, sc, 0.0);
  const auto pa = vacuum_state(a, 0.0, 0.0, {}, sc, wide), pb = vacuum_state(b, 0.0, 0.0, {}, sc, wide);
  EXPECT_NEAR(b.Q().real(), -0.5, 1e-15);
  for (std::size_t i = 0; i < wide.n_points; i += 53) EXPECT_NEAR(std::abs(pa[i]), std::abs(pb[i]), 1e-14);
}

TEST(FockState, DisplacedChirpedMomentsMatchPrediction) {
  const ParameterSet R{1.2, 0.8, 0.45, 0.0, 0.0, 0.0};
  const auto sc = PhysicalScales::unit_norm(0.9, 0.0);
  const GermState a = floquet_solution(R, sc, 0.0);
  const PhaseSpaceCenter c{0.7, -1.1};
  const SpatialGrid g{-16.0, 16.0, 8193};
  double sxx0 = 0.0;
  for (int n = 0; n <= 5; ++n) {
    const auto m = quadrature_moments(fock_state(n, a, 0.0, 0.3, c, sc, g), sc);
    const auto ex = fock_moments(n, a.Q(), c, sc);
    EXPECT_NEAR(m.x, ex.x, 1e-10);
    EXPECT_NEAR(m.p, ex.p, 1e-9);
    EXPECT_NEAR(m.sigma_xp / m.sigma_xx, a.Q().real(), 1e-8);
    EXPECT_NEAR(m.sigma_pp / m.sigma_xx, std::norm(a.Q()), 1e-8);
    if (n == 0) sxx0 = m.sigma_xx;
    EXPECT_NEAR(m.sigma_xx / sxx0, 2.0 * n + 1.0, 1e-8);
    // The stationary HES moments of the same level.
    const MomentState st = closed_form_hes(stationary_constants(n, R, sc), R, sc, 0.0);
    EXPECT_NEAR(m.sigma_xx, st.sigma_xx, 1e-8);
    EXPECT_NEAR(m.sigma_xp, st.sigma_xp, 1e-8);
    EXPECT_NEAR(m.sigma_pp, st.sigma_pp, 1e-8);
  }
}

TEST(EffectivePotential, MatchesDirectKernelSum) {
  const ParameterSet R{1.0, 1.0, 0.1, 0.3, 0.4, 0.9};
  const auto sc = PhysicalScales::unit_norm(1.0, 0.7);
  const SpatialGrid g{-10.0, 10.0, 801};
  const GermState a = floquet_solution(R, sc, 0.0);
  const auto psi = fock_state(1, a, 0.0, 0.0, {0.2, 0.8}, sc, g);
  const auto v = effective_potential(psi, R, sc);
  const auto ref = oracle::kernel_double_sum(g.points(), psi.values, g.dx(), sc.kappa, R.a, R.b, R.c);
  for (std::size_t i = 0; i < g.n_points; ++i) EXPECT_NEAR(v[i], ref[i], 1e-10 * std::max(1.0, std::abs(ref[i])));
}

TEST(EffectivePotential, EvenDensityDropsTheLinearTerm) {
  const ParameterSet R{1.0, 1.0, 0.0, 0.3, 0.9, 0.5};
  const auto sc = PhysicalScales::unit_norm(1.0, 1.0);
  const SpatialGrid g{-10.0, 10.0, 2001};
  const auto v = effective_potential(eigenstate(2, R, sc, g), R, sc);
  for (std::size_t i = 0; i < g.n_points / 2; ++i) EXPECT_NEAR(v[i], v[g.n_points - 1 - i], 1e-12);
  const double m2 = density_moments(eigenstate(2, R, sc, g)).m2;
  EXPECT_NEAR(v[g.n_points / 2], 0.5 * R.c * m2, 1e-13);
  EXPECT_NEAR(m2, 2.5 * R.mu * sc.hbar / derive_frequencies(R, sc).omega, 1e-10);
}

TEST(Hamiltonian, OscillatorEigenpairs) {
  const ParameterSet R{1.0, 1.0, 0.0, 0.0, 0.0, 0.0};
  const auto sc = PhysicalScales::unit_norm(1.0, 0.0);
  const SpatialGrid g{-12.0, 12.0, 4096};
  for (int n = 0; n <= 5; ++n) {
    const auto psi = eigenstate(n, R, sc, g);
    EXPECT_LT(eigen_residual(psi, n + 0.5, R, sc), 1e-6);
    EXPECT_NEAR(rayleigh_quotient(psi, R, sc), n + 0.5, 1e-6);
  }
}

TEST(Hamiltonian, AgreesWithRichardsonDerivatives) {
  // H psi at interior points against a point-wise derivative oracle on the closed form.
  const ParameterSet R{1.4, 0.8, 0.3, 0.2, 0.1, 0.6};
  const auto sc = PhysicalScales::unit_norm(1.0, 0.5);
  const auto f = derive_frequencies(R, sc);
  const SpatialGrid g{-12.0, 12.0, 8192};
  const int n = 2;
  const auto psi = eigenstate(n, R, sc, g);
  const auto Hpsi = apply_hamiltonian(psi, R, sc);
  const auto m = density_moments(psi);
  auto fn = [&](double x) { return oracle::eigenfunction(n, R.mu, R.rho, f.omega, sc.hbar, x); };
  for (std::size_t i = 2000; i < 6000; i += 311) {
    const double x = g.x(i);
    const cplx d1 = oracle::derivative(fn, x, 1e-2), d2 = oracle::second_derivative(fn, x, 1e-2);
    const double hb = sc.hbar;
    const cplx ref = -0.5 * R.mu * hb * hb * d2 + 0.5 * R.sigma * x * x * fn(x) - I * hb * R.rho * (x * d1 + 0.5 * fn(x)) +
                     0.5 * sc.kappa * (R.a * x * x * m.m0 + 2 * R.b * x * m.m1 + R.c * m.m2) * fn(x);
    EXPECT_LT(std::abs(Hpsi[i] - ref), 1e-6) << "x=" << x;
    EXPECT_LT(std::abs(Hpsi[i] - eigenvalue(n, R, sc) * psi[i]), 1e-6);
  }
}

TEST(Hamiltonian, LinearPartIsHermitian) {
  const ParameterSet R{1.1, 0.9, 0.4, 0.0, 0.0, 0.0};
  const auto sc = PhysicalScales::unit_norm(1.0, 0.0);
  const SpatialGrid g{-10.0, 10.0, 1024};
  const GermState a = floquet_solution(R, sc, 0.0);
  const auto u = fock_state(1, a, 0.0, 0.0, {0.3, 0.5}, sc, g);
  const auto v = fock_state(3, a, 0.0, 0.0, {-0.2, -0.4}, sc, g);
  const cplx lhs = inner_product(u, apply_linear_hamiltonian(v, R, sc));
  const cplx rhs = std::conj(inner_product(v, apply_linear_hamiltonian(u, R, sc)));
  EXPECT_LT(std::abs(lhs - rhs), 1e-12);
}

TEST(Resolution, CoarseGridIsRejected) {
  const ParameterSet R{1.0, 1.0, 0.0, 0.0, 0.0, 0.0};
  const auto sc = PhysicalScales::unit_norm(1.0, 0.0);
  const SpatialGrid coarse{-30.0, 30.0, 128};
  const auto psi = eigenstate(5, R, sc, coarse);
  EXPECT_THROW(eigen_residual(psi, 5.5, R, sc), GridTooCoarse);
  EXPECT_THROW(quadrature_moments(psi, sc), GridTooCoarse);
  // The estimate tracks the true residual on resolved grids.
  const SpatialGrid fine{-12.0, 12.0, 2048};
  const auto ok = eigenstate(5, R, sc, fine);
  const double est = check_resolution(ok, R.mu, sc, 1.0);
  const double res = eigen_residual(ok, 5.5, R, sc, 1.0);
  EXPECT_GT(est, 0.2 * res);
  EXPECT_LT(est, 5.0 * res);
}

TEST(AutoGrid, ResolvesAndContainsTheRequestedLevels) {
  std::mt19937 rng(33);
  for (double kt : {0.0, 1.0}) {
    const auto sc = PhysicalScales::unit_norm(1.0, kt);
    const ParameterSet R = oracle::random_parameters(rng, 2.5, kt);
    const SpatialGrid g = auto_grid(R, sc, 5);
    const auto psi = eigenstate(5, R, sc, g);
    EXPECT_TRUE(psi.localized());
    EXPECT_LT(eigen_residual(psi, eigenvalue(5, R, sc), R, sc), 1e-6);
  }
}

TEST(WaveFunctionIo, BinaryRoundTripAndCsvHeader) {
  const auto sc = PhysicalScales::unit_norm(1.0, 0.0);
  const SpatialGrid g{-5.0, 5.0, 64};
  WaveFunction psi = fock_state(2, floquet_solution({1, 1, 0.3, 0, 0, 0}, sc, 0.0), 0.0, 0.1, {0.2, 0.1}, sc, g);
  std::stringstream bin;
  write_wavefunction_binary(bin, psi);
  EXPECT_EQ(bin.str().size(), 8u + 4u + 8u * 6u + 16u * 64u);
  const WaveFunction back = read_wavefunction_binary(bin);
  EXPECT_EQ(back.grid, psi.grid);
  EXPECT_EQ(back.values, psi.values);
  EXPECT_EQ(back.center_x, psi.center_x);
  std::stringstream bad("NOTAWAVE");
  EXPECT_THROW(read_wavefunction_binary(bad), ConfigError);
  std::ostringstream csv;
  write_wavefunction_csv(csv, psi);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "x,re_psi,im_psi,abs2_psi");
}
