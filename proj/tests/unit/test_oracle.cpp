#include <gtest/gtest.h>

#include "gpeberry/germ.hpp"
#include "gpeberry/hes.hpp"
#include "gpeberry/oracle.hpp"
#include "gpeberry/phases.hpp"
#include "oracles.hpp"

using namespace gpeberry;

namespace {

ParameterPath loop(double T) {
  std::array<FourierSeries, 6> c;
  c[0] = {1.5, {0.3}, {}};
  c[1] = {1.0, {}, {0.2}};
  c[2] = {0.1, {}, {0.3}};
  c[3] = {0.1, {}, {}};
  c[4] = {0.2, {0.1}, {}};
  c[5] = {1.0, {}, {}};
  return ParameterPath(c, T);
}

PropagatorConfig config_for(const SpatialGrid& g, double dt) {
  PropagatorConfig pc;
  pc.dt = dt;
  pc.grid = g;
  return pc;
}

// Phase error of a frozen eigenstate after time t, with no energy shift.
double frozen_phase_error(double dt, Scheme scheme = Scheme::implicit_midpoint) {
  const ParameterSet R{1.0, 1.0, 0.3, 0.2, 0.1, 1.0};
  const auto sc = PhysicalScales::unit_norm(1.0, 0.5);
  const SpatialGrid g = auto_grid(R, sc, 1);
  auto pc = config_for(g, dt);
  pc.scheme = scheme;
  const auto psi0 = eigenstate(0, R, sc, g);
  const double t = 10.0;
  const auto r = propagate(psi0, Frozen{R}, 0.0, t, pc, sc);
  const cplx ov = inner_product(psi0, r.final_state);
  return wrap_phase(std::arg(ov) + eigenvalue(0, R, sc) * t / sc.hbar);
}

}  // namespace

TEST(Propagate, FrozenEigenstateOnlyRotates) {
  const ParameterSet R{1.0, 1.0, 0.3, 0.2, 0.1, 1.0};
  const auto sc = PhysicalScales::unit_norm(1.0, 0.5);
  const SpatialGrid g = auto_grid(R, sc, 1);
  for (int n : {0, 1}) {
    const auto psi0 = eigenstate(n, R, sc, g);
    const double E = eigenvalue(n, R, sc);
    const auto r = propagate(psi0, Frozen{R}, 0.0, 10.0, config_for(g, 0.01), sc, {}, [&](double) { return E; });
    const auto d = extract_geometric_phase(r.final_state, psi0, -E * 10.0 / sc.hbar, n);
    EXPECT_GT(d.fidelity, 1.0 - 1e-9);
    EXPECT_LT(std::abs(d.geometric), 1e-6);
    EXPECT_LT(r.diagnostics.max_norm_drift, 1e-12);
  }
}

TEST(Propagate, PhaseErrorIsSecondOrderInDt) {
  const double e1 = frozen_phase_error(0.04), e2 = frozen_phase_error(0.02), e3 = frozen_phase_error(0.01);
  EXPECT_NEAR(e1 / e2, 4.0, 0.8);
  EXPECT_NEAR(e2 / e3, 4.0, 0.8);
}

TEST(Propagate, SplitSchemeIsSecondOrderAndAgrees) {
  const double e1 = frozen_phase_error(0.02, Scheme::split_quadratic);
  const double e2 = frozen_phase_error(0.01, Scheme::split_quadratic);
  EXPECT_NEAR(e1 / e2, 4.0, 0.8);
  EXPECT_LT(std::abs(e2), 1e-3);
}

TEST(Propagate, NormConservedOverTenThousandSteps) {
  const auto sc = PhysicalScales::unit_norm(1.0, 0.5);
  const auto path = loop(100.0);
  const SpatialGrid g = auto_grid_for_path(path, sc, 0);
  const auto psi0 = eigenstate(0, path.at(0.0), sc, g);
  const auto r = propagate(psi0, AlongPath{&path}, 0.0, 100.0, config_for(g, 0.01), sc);
  EXPECT_EQ(r.diagnostics.steps, 10000u);
  EXPECT_LT(r.diagnostics.max_norm_drift, 1e-6);
  EXPECT_LT(r.diagnostics.max_boundary_ratio, 1e-12);
}

TEST(Propagate, SelfConsistencySaturates) {
  const auto sc = PhysicalScales::unit_norm(1.0, 0.5);
  const auto path = loop(20.0);
  const SpatialGrid g = auto_grid_for_path(path, sc, 4);
  const GermState a = floquet_solution({1.2, 1.0, 0.0, 0.0, 0.0, 0.0}, sc, 0.0);
  const auto psi0 = fock_state(0, a, 0.0, 0.0, {0.3, 0.5}, sc, g);
  auto pc = config_for(g, 0.01);
  const auto r2 = propagate(psi0, AlongPath{&path}, 0.0, 20.0, pc, sc);
  pc.self_consistency_iters = 4;
  const auto r4 = propagate(psi0, AlongPath{&path}, 0.0, 20.0, pc, sc);
  double diff = 0.0;
  for (std::size_t i = 0; i < g.n_points; ++i) diff += std::norm(r2.final_state[i] - r4.final_state[i]);
  EXPECT_LT(std::sqrt(diff * g.dx()), 1e-8);
}

TEST(Propagate, MomentsFollowTheHesFlow) {
  // The residual is the scheme's O(dt^2) error.
  const auto sc = PhysicalScales::unit_norm(1.0, 0.5);
  const auto path = loop(10.0);
  const SpatialGrid g = auto_grid_for_path(path, sc, 3);
  const GermState a = floquet_solution({0.8, 1.4, -0.2, 0.0, 0.0, 0.0}, sc, 0.0);
  const auto psi0 = fock_state(0, a, 0.0, 0.0, {0.4, -0.6}, sc, g);
  const MomentState g0 = quadrature_moments(psi0, sc);
  const auto hes = integrate_hes(g0, AlongPath{&path}, 0.0, 5.0, 1e-3, sc);
  std::vector<double> worst;
  for (double dt : {0.01, 0.005}) {
    auto pc = config_for(g, dt);
    pc.observe_every = std::size_t(std::lround(1.0 / dt));
    double w = 0.0;
    const Observer obs = [&](double t, const WaveFunction& psi) {
      const std::size_t k = std::size_t(std::lround(t / hes.dt));
      w = std::max(w, max_abs_difference(quadrature_moments(psi, sc), hes.samples[k].g));
    };
    propagate(psi0, AlongPath{&path}, 0.0, 5.0, pc, sc, obs);
    worst.push_back(w);
  }
  EXPECT_LT(worst[1], 5e-4);
  EXPECT_NEAR(worst[0] / worst[1], 4.0, 0.8);
}

TEST(Propagate, GaussianAnsatzIsReproduced) {
  // Vacuum on the integrated germ, HES first moments and action S.
  const auto sc = PhysicalScales::unit_norm(1.0, 0.5);
  const auto path = loop(10.0);
  const SpatialGrid g = auto_grid_for_path(path, sc, 3);
  const GermState a0 = floquet_solution({0.8, 1.4, -0.2, 0.0, 0.0, 0.0}, sc, 0.0);
  const PhaseSpaceCenter c0{0.4, -0.6};
  const auto psi0 = vacuum_state(a0, a0.argC_unwrapped, 0.0, c0, sc, g);
  const double t_end = 6.0, h = 1e-3;
  const auto germ = integrate_variations(a0, AlongPath{&path}, 0.0, t_end, h, sc);
  const MomentState m0 = fock_moments(0, a0.Q(), c0, sc);
  const auto hes = integrate_hes(m0, AlongPath{&path}, 0.0, t_end, h, sc);
  const auto S = action_S(hes, AlongPath{&path}, sc);
  const auto& last = hes.back().g;
  const auto ansatz = vacuum_state(germ.back().a, a0.argC_unwrapped, S.back(), {last.p, last.x}, sc, g);
  const auto r = propagate(psi0, AlongPath{&path}, 0.0, t_end, config_for(g, 0.005), sc);
  const cplx ov = inner_product(ansatz, r.final_state);
  EXPECT_LT(std::abs(ov - 1.0), 1e-3);
}

TEST(Propagate, StabilityLostWhenTheStateReachesTheBoundary) {
  const ParameterSet R{1.0, 1.0, 0.0, 0.0, 0.0, 0.0};
  const auto sc = PhysicalScales::unit_norm(1.0, 0.0);
  const SpatialGrid g{-4.0, 4.0, 512};
  const auto psi0 = fock_state(0, floquet_solution(R, sc, 0.0), 0.0, 0.0, {0.0, 2.5}, sc, g);
  EXPECT_THROW(propagate(psi0, Frozen{R}, 0.0, 1.0, config_for(g, 0.01), sc), StabilityLost);
}

TEST(PropagatorConfig, RejectsCoarseTimeSteps) {
  auto pc = config_for({-5.0, 5.0, 128}, 0.2);
  EXPECT_THROW(pc.validate(1.0), ConfigError);
  pc.dt = 0.05;
  EXPECT_NO_THROW(pc.validate(1.0));
  EXPECT_THROW(parse_scheme("leapfrog"), ConfigError);
  EXPECT_EQ(parse_scheme(scheme_name(Scheme::split_quadratic)), Scheme::split_quadratic);
}

TEST(AutoGridForPath, CoversEveryPointOfTheLoop) {
  const auto sc = PhysicalScales::unit_norm(1.0, 0.5);
  const auto path = loop(10.0);
  const SpatialGrid g = auto_grid_for_path(path, sc, 2);
  for (double s : {0.0, 0.25, 0.5, 0.75}) {
    const auto psi = eigenstate(2, path.at(s), sc, g);
    EXPECT_TRUE(psi.localized());
    EXPECT_LT(eigen_residual(psi, eigenvalue(2, path.at(s), sc), path.at(s), sc), 1e-6);
  }
}
