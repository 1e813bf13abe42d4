#include <doctest.h>

#include <cmath>
#include <numbers>

#include "atomsim/collection.hpp"
#include "atomsim/errors.hpp"
#include "atomsim/quadrature.hpp"

using namespace atomsim;
using doctest::Approx;

TEST_CASE("quadrature rules integrate polynomials exactly") {
  const auto gl = gauss_legendre(6);
  double s = 0.0;
  for (std::size_t i = 0; i < gl.size(); ++i) s += gl.weights[i] * std::pow(gl.nodes[i], 10);
  CHECK(s == Approx(2.0 / 11.0).epsilon(1e-14));
  const auto gh = gauss_hermite_normal(5);
  double m4 = 0.0, w = 0.0;
  for (std::size_t i = 0; i < gh.size(); ++i) {
    m4 += gh.weights[i] * std::pow(gh.nodes[i], 4);
    w += gh.weights[i];
  }
  CHECK(w == Approx(1.0).epsilon(1e-14));
  CHECK(m4 == Approx(3.0).epsilon(1e-13));
  const auto lag = gauss_laguerre(4);
  double m3 = 0.0;
  for (std::size_t i = 0; i < lag.size(); ++i) m3 += lag.weights[i] * std::pow(lag.nodes[i], 3);
  CHECK(m3 == Approx(6.0).epsilon(1e-13));
}

TEST_CASE("cone collection: closed form, quadrature and limits") {
  // Reference values from scipy quadrature of the dipole patterns.
  CHECK(collection_efficiency_analytic(0.55, Polarization::sigma_plus) == Approx(0.11399733628317489).epsilon(1e-13));
  CHECK(collection_efficiency_analytic(0.55, Polarization::pi) == Approx(0.019258345796895296).epsilon(1e-12));
  for (auto p : {Polarization::sigma_plus, Polarization::sigma_minus, Polarization::pi}) {
    for (double na : {0.1, 0.55, 0.9}) {
      CHECK(std::abs(collection_efficiency_numeric(na, p) - collection_efficiency_analytic(na, p)) < 1e-6);
    }
    CHECK(collection_efficiency_analytic(1.0, p) == Approx(0.5).epsilon(1e-12));
    CHECK(collection_efficiency_numeric(1.0, p) == Approx(0.5).epsilon(1e-9));
    CHECK_THROWS_AS(collection_efficiency_analytic(1.01, p), InputError);
    CHECK(dipole_power_numeric(p) == Approx(1.0).epsilon(1e-10));
    CHECK(collection_efficiency_analytic(1e-4, p) < 1e-8);
    CHECK_THROWS_AS(collection_efficiency_analytic(0.0, p), InputError);
  }
}

TEST_CASE("collection grows with the numerical aperture") {
  double prev = 0.0;
  for (int i = 1; i <= 20; ++i) {
    const double v = collection_efficiency_analytic(0.05 * i, Polarization::sigma_plus);
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("fiber overlap of an atom at the focus") {
  const OpticalSystem optics;
  const auto s = fiber_overlap({0, 0, 0}, Polarization::sigma_plus, optics);
  // Regression value from an independent numpy evaluation of the same pupil integral.
  CHECK(s.total() == Approx(0.6817).epsilon(2e-4));
  CHECK(s.x == Approx(s.y).epsilon(1e-10));
  const auto p = fiber_overlap({0, 0, 0}, Polarization::pi, optics);
  CHECK(p.total() < 1e-20);
  // Displacements lower the overlap.
  CHECK(fiber_overlap({200e-9, 0, 0}, Polarization::sigma_plus, optics).total() < s.total());
  CHECK(fiber_overlap({0, 0, 1e-6}, Polarization::sigma_plus, optics).total() < s.total());
}

TEST_CASE("grid aliasing guard") {
  OpticalSystem optics;
  optics.grid = 64;
  CHECK_THROWS_AS(fiber_overlap({30e-6, 0, 0}, Polarization::sigma_plus, optics), InputError);
  CHECK(max_phase_step({30e-6, 0, 0}, optics) > 2.0 * std::numbers::pi / optics.min_samples_per_fringe);
}

TEST_CASE("trap frequencies and thermal widths") {
  const TrapGeometry trap;
  const auto f = trap_frequencies(trap);
  CHECK(f.omega_r == Approx(203375.20448874866).epsilon(1e-10));
  CHECK(f.omega_z == Approx(44277.39633109111).epsilon(1e-10));
  const auto w = thermal_widths(trap);
  CHECK(w.sigma_r == Approx(8.696263565463044e-08).epsilon(1e-10));
  CHECK(w.sigma_z == Approx(3.9943730378568033e-07).epsilon(1e-10));
}

TEST_CASE("thermal average: zero temperature and temperature dependence") {
  OpticalSystem optics;
  optics.grid = 256;
  TrapGeometry trap;
  ThermalOptions o;
  o.radial_order = 4;
  o.axial_order = 4;
  trap.atom_temperature = 0.0;
  const auto cold = thermal_average(optics, trap, collected_channels(), o);
  const double at_focus = collection_efficiency_analytic(optics.na, Polarization::sigma_plus) *
                          fiber_overlap({0, 0, 0}, Polarization::sigma_plus, optics).total() * (4.0 / 7.0);
  CHECK(cold.eta_cc == Approx(at_focus).epsilon(1e-12));
  trap.atom_temperature = 5e-6;
  const auto warm = thermal_average(optics, trap, collected_channels(), o);
  trap.atom_temperature = 20e-6;
  const auto hot = thermal_average(optics, trap, collected_channels(), o);
  CHECK(warm.eta_cc < cold.eta_cc);
  CHECK(hot.eta_cc < warm.eta_cc);
  CHECK(warm.convergence_estimate > 0.0);
}

TEST_CASE("axisymmetric and tensor hermite averages agree") {
  OpticalSystem optics;
  optics.grid = 192;
  const TrapGeometry trap;
  ThermalOptions a;
  a.radial_order = 5;
  a.axial_order = 6;
  ThermalOptions h;
  h.method = ThermalMethod::gauss_hermite;
  h.hermite_order = 6;
  const double ea = thermal_average(optics, trap, collected_channels(), a).eta_cc;
  const double eh = thermal_average(optics, trap, collected_channels(), h).eta_cc;
  CHECK(ea == Approx(eh).epsilon(1e-4));
}

TEST_CASE("loss chain") {
  CHECK(success_probability(0.04135, Losses{}) == Approx(0.0157096783545).epsilon(1e-10));
  Losses perfect{1.0, 1.0, 1.0, 1.0};
  CHECK(success_probability(0.04, perfect) == 0.04);
}

TEST_CASE("optical system validation") {
  OpticalSystem o;
  o.na = 1.2;
  CHECK_THROWS_AS(o.validate(), InputError);
  o = OpticalSystem{};
  CHECK(o.with_aperture(8e-3).aperture_radius() == Approx(8e-3));
  CHECK(polarization_from_string("sigma-") == Polarization::sigma_minus);
  CHECK_THROWS_AS(polarization_from_string("circular"), InputError);
}
