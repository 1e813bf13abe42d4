#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "atomsim/dynamics.hpp"
#include "atomsim/errors.hpp"
#include "atomsim/ode.hpp"

using namespace atomsim;
using doctest::Approx;

namespace {

ComplexMatrix random_state(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  ComplexMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = {g(rng), g(rng)};
  ComplexMatrix rho = a * a.adjoint();
  return rho / rho.trace().real();
}

}  // namespace

TEST_CASE("dopri5 integrates exponential decay") {
  Eigen::VectorXcd y(1);
  y[0] = 1.0;
  OdeTolerances tol;
  tol.rtol = 1e-10;
  tol.atol = 1e-14;
  std::vector<double> seen;
  integrate_dopri5([](double, const Eigen::VectorXcd& v) -> Eigen::VectorXcd { return -2.0 * v; }, y, 0.0, 3.0, tol,
                   {1.0, 2.0}, [&](double t, const Eigen::VectorXcd&) { seen.push_back(t); },
                   [](double, Eigen::VectorXcd&) {});
  CHECK(std::abs(y[0] - std::exp(-6.0)) < 1e-11);
  REQUIRE(seen.size() == 2);
  CHECK(seen[0] == 1.0);
  CHECK(seen[1] == 2.0);
}

TEST_CASE("dopri5 reports step underflow") {
  Eigen::VectorXcd y(1);
  y[0] = 1.0;
  OdeTolerances tol;
  tol.min_step_fraction = 1e-3;
  auto blow_up = [](double t, const Eigen::VectorXcd& v) -> Eigen::VectorXcd { return v / std::pow(1.0 - t, 3); };
  CHECK_THROWS_AS(integrate_dopri5(blow_up, y, 0.0, 1.0, tol, {}, [](double, const Eigen::VectorXcd&) {},
                                   [](double, Eigen::VectorXcd&) {}),
                  SolverError);
}

TEST_CASE("lindblad generator preserves trace and hermiticity") {
  const auto s = build_level_scheme(SchemeConfig{});
  const auto pulse = PulseProfile::centered(2e9, 3e-9, 0);
  const ComplexMatrix rho = random_state(s.size(), 3);
  const ComplexMatrix d = lindblad_rhs(s, pulse, rho, pulse.center);
  CHECK(std::abs(d.trace()) < 1e-6 * d.norm());
  CHECK((d - d.adjoint()).norm() < 1e-9 * d.norm());
  CHECK_THROWS_AS(lindblad_rhs(s, pulse, ComplexMatrix::Identity(3, 3), 0.0), InputError);
}

TEST_CASE("hamiltonian is hermitian with the gaussian envelope") {
  const auto s = build_level_scheme(SchemeConfig{});
  const auto pulse = PulseProfile::centered(1e9, 2e-9, 0);
  const auto h = hamiltonian_at(s, pulse, pulse.center + 1e-9);
  CHECK((h - h.adjoint()).norm() == Approx(0.0));
  CHECK(pulse.envelope(pulse.center) == Approx(1e9));
  CHECK(pulse.envelope(pulse.center + pulse.width) == Approx(1e9 * std::exp(-0.5)));
}

TEST_CASE("undriven excited state decays as exp(-gamma t)") {
  const auto s = build_level_scheme(SchemeConfig{});
  const std::size_t e = s.index(Manifold::excited_f4, 2);
  PulseProfile off;
  off.omega_peak = 0.0;
  off.t_end = 100e-9;
  off.center = 50e-9;
  EvolveOptions o;
  for (int k = 1; k < 10; ++k) o.sample_times.push_back(k * 10e-9);
  const auto tr = evolve(s, off, DensityMatrix::pure(s.size(), e), 0.0, 100e-9, {}, o);
  for (std::size_t i = 0; i < tr.size(); ++i)
    CHECK(tr.population(e, i) == Approx(std::exp(-s.gamma() * tr.times[i])).epsilon(1e-6));
  // 7/12 of the f'=4 decay ends in the f=4 sink.
  CHECK(tr.final_state().population(s.sink()) == Approx(7.0 / 12.0 * (1.0 - std::exp(-s.gamma() * 100e-9))).epsilon(1e-6));
  CHECK(tr.invariants.max_trace_drift < 1e-10);
}

TEST_CASE("calibrated pi pulse inverts an isolated transition") {
  // Tiny linewidth and remote neighbours leave an effective two-level system.
  SchemeConfig c;
  c.gamma_rad_per_s = 1.0;
  c.offset_f3_rad_per_s = 1e11;
  c.offset_f4_rad_per_s = 2e11;
  const auto s = build_level_scheme(c);
  const double sigma = 2e-9;
  const auto cal = calibrate_pi(sigma, 0);
  CHECK(cal.cg_factor == Approx(std::sqrt(15.0) / 5.0));
  CHECK(calibrate_pi_pulse(s, sigma, 0) == Approx(cal.omega_peak));
  CHECK(cal.omega_driven * sigma * std::sqrt(2.0 * std::numbers::pi) == Approx(std::numbers::pi));
  const auto pulse = PulseProfile::centered(cal.omega_peak, sigma, 0);
  const std::size_t g = s.index(Manifold::ground_f3, 0);
  const auto tr = evolve(s, pulse, DensityMatrix::pure(s.size(), g), pulse.t_start, pulse.t_end);
  CHECK(tr.final_state().population(s.index(Manifold::excited_f2, 0)) == Approx(1.0).epsilon(1e-4));
  CHECK_THROWS_AS(calibrate_pi(sigma, 1), InputError);
}

TEST_CASE("state stays physical through a strong pulse") {
  const auto s = build_flagged_scheme(SchemeConfig{});
  const double sigma = 1e-9;
  const auto pulse = PulseProfile::centered(calibrate_pi_pulse(s, sigma, 0), sigma, 0);
  const auto tr =
      evolve(s, pulse, DensityMatrix::pure(s.size(), s.index(Manifold::ground_f3, 0)), pulse.t_start, pulse.t_end);
  CHECK(tr.invariants.max_trace_drift < 1e-8);
  CHECK(tr.invariants.max_hermiticity_defect < 1e-10);
  CHECK(tr.invariants.min_eigenvalue > -1e-8);
}

TEST_CASE("density matrix checks") {
  auto rho = DensityMatrix::pure(3, 1);
  CHECK(rho.trace() == 1.0);
  CHECK(rho.min_eigenvalue() == Approx(0.0));
  rho.data()(0, 1) = {0.1, 0.0};
  CHECK(rho.hermiticity_defect() == Approx(0.1));
  CHECK_THROWS_AS(rho.check(1e-3), SolverError);
  rho.symmetrize();
  CHECK(rho.hermiticity_defect() == 0.0);
  CHECK_THROWS_AS(rho.check(1e-6), SolverError);  // symmetrized coherence makes it non-positive
}
