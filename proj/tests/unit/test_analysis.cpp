#include <doctest.h>

#include <cmath>
#include <numbers>

#include "atomsim/analysis.hpp"
#include "atomsim/errors.hpp"
#include "atomsim/synthetic.hpp"

using namespace atomsim;
using doctest::Approx;

TEST_CASE("g2 from counts") {
  const auto e = g2_from_counts(4564, 4564, 2, 1000000);
  CHECK(e.value == Approx(0.0960).epsilon(1e-3));
  CHECK(e.error == Approx(0.068).epsilon(0.02));
  CHECK(g2_from_counts(100, 100, 0, 10000).value == 0.0);
  CHECK_THROWS_AS(g2_from_counts(10, 10, 20, 1000), InputError);
  CHECK_THROWS_AS(g2_from_counts(0, 10, 0, 1000), InputError);
}

TEST_CASE("coincidences honour the window") {
  std::vector<TimeTagRecord> tags{{0, 0, 10}, {0, 1, 20}, {1, 0, 30}, {2, 1, 500}, {3, 0, 5}, {3, 0, 6}};
  const auto c = count_coincidences(tags, 0, 400);
  CHECK(c.n1 == 3);
  CHECK(c.n2 == 1);
  CHECK(c.n12 == 1);
}

TEST_CASE("independent synthetic clicks give g2 near 1") {
  std::mt19937_64 rng(11);
  const auto tags = synthesize_time_tags(400000, 0.01, 0.01, 50, rng);
  const auto c = count_coincidences(tags, 0, 400);
  const auto e = g2_from_counts(c.n1, c.n2, c.n12, 400000);
  CHECK(std::abs(e.value - 1.0) < 4 * e.error);
}

TEST_CASE("emg density is normalized and has the right gradient") {
  double s = 0.0;
  for (double t = -50; t < 900; t += 0.01) s += emg_density(t, 20.0, 2.0, 30.4) * 0.01;
  CHECK(s == Approx(1.0).epsilon(1e-6));
  double g[3];
  const double f = emg_density(35.0, 20.0, 2.0, 30.4, g);
  const double h = 1e-6;
  CHECK(g[0] == Approx((emg_density(35.0, 20.0 + h, 2.0, 30.4) - emg_density(35.0, 20.0 - h, 2.0, 30.4)) / (2 * h)).epsilon(1e-6));
  CHECK(g[1] == Approx((emg_density(35.0, 20.0, 2.0 + h, 30.4) - emg_density(35.0, 20.0, 2.0 - h, 30.4)) / (2 * h)).epsilon(1e-6));
  CHECK(g[2] == Approx((emg_density(35.0, 20.0, 2.0, 30.4 + h) - emg_density(35.0, 20.0, 2.0, 30.4 - h)) / (2 * h)).epsilon(1e-6));
  CHECK(f > 0.0);
  // Deep in the tail the scaled form must not overflow.
  CHECK(std::isfinite(emg_density(-200.0, 20.0, 0.5, 30.4)));
}

TEST_CASE("histogram fit recovers the lifetime") {
  std::mt19937_64 rng(3);
  const auto bins = synthesize_histogram(30.4, 20.0, 2.0, 10000, 1.0, 0.0, 250.0, rng);
  const auto f = fit_arrival_histogram(bins);
  CHECK(std::abs(f.tau - 30.4) < 4 * f.tau_err);
  CHECK(f.tau_err > 0.1);
  CHECK(f.tau_err < 1.0);
  std::vector<HistogramBin> few(bins.begin(), bins.begin() + 10);
  CHECK_THROWS_AS(fit_arrival_histogram(few), InputError);
}

TEST_CASE("histogram from tags") {
  std::vector<TimeTagRecord> tags{{0, 0, 1}, {1, 1, 1}, {2, 0, 3}, {3, 0, 99}};
  const auto h = histogram_from_tags(tags, 2.0, 0.0, 10.0);
  REQUIRE(h.size() == 5);
  CHECK(h[0].t_ns == 1.0);
  CHECK(h[0].count == 2.0);
  CHECK(h[1].count == 1.0);
}

TEST_CASE("parity fit and correlation") {
  std::mt19937_64 rng(21);
  const auto d = synthesize_parity(Basis::Z, 0.5, 0.47, 0.4, linspace(0.0, 90.0, 13), 2000, rng);
  const auto fit = fit_parity(d);
  const auto c = correlation_from_fit(fit);
  CHECK(std::abs(c.value - 0.94) < 4 * c.error);
  CHECK(c.value >= -1.0);
  CHECK(c.value <= 1.0);
  CHECK(std::abs(std::remainder(fit.even.phase() - 0.4, 2 * std::numbers::pi)) < 4 * fit.even.phase_err());
  // Even and odd fractions are complementary, so their fits mirror each other.
  CHECK(fit.even.offset() + fit.odd.offset() == Approx(1.0).epsilon(1e-6));
}

TEST_CASE("parity needs enough angles") {
  ParityDataset d;
  for (double th : {0.0, 10.0, 20.0}) d.points.push_back({th, 50, 50, 100});
  CHECK_THROWS_AS(fit_parity(d), InputError);
}

TEST_CASE("bell fidelity arithmetic") {
  CHECK(bell_fidelity({0.909, 0.039, 0.919, 0.032, 0.939, 0.034}).value == Approx(0.94175).epsilon(1e-15));
  CHECK(bell_fidelity({1, 0, 1, 0, 1, 0}).value == 1.0);
  CHECK(bell_fidelity({0, 0, 0, 0, 0, 0}).value == 0.25);
  const auto e = bell_fidelity({-1, 0, -1, 0, -1, 0});
  CHECK(e.value == 0.0);
  CHECK(e.clipped);
  CHECK_THROWS_AS(bell_fidelity({1.2, 0, 1, 0, 1, 0}), InputError);
  const auto f = bell_fidelity({0.909, 0.039, 0.919, 0.032, 0.939, 0.034});
  CHECK(f.error == Approx(std::sqrt(0.039 * 0.039 + 0.032 * 0.032 + 0.034 * 0.034) / 4.0));
}

TEST_CASE("fidelity lower bound arithmetic") {
  DiagonalPopulations ideal{0.5, 0.5, 0.0, 0.0};
  CHECK(fidelity_lower_bound(ideal, ideal).value == 1.0);
  DiagonalPopulations mixed{0.25, 0.25, 0.25, 0.25};
  CHECK(fidelity_lower_bound(mixed, mixed).value == 0.0);
  const double ez = 0.0305, ey = 0.0385;
  DiagonalPopulations z{(1 - ez) / 2, (1 - ez) / 2, ez / 2, ez / 2};
  DiagonalPopulations y{(1 - ey) / 2, (1 - ey) / 2, ey / 2, ey / 2};
  CHECK(fidelity_lower_bound(z, y).value == Approx(0.931).epsilon(1e-12));
  DiagonalPopulations bad{0.6, 0.6, 0.0, 0.0};
  CHECK_THROWS_AS(fidelity_lower_bound(bad, ideal), InputError);
}

TEST_CASE("ramsey fits at both coherence scales") {
  std::mt19937_64 rng(8);
  auto d = synthesize_ramsey(0.45, 130e-6, 20e3, 0.3, linspace(0, 400e-6, 41), 100, Envelope::exponential, rng);
  auto f = fit_ramsey(d);
  CHECK(std::abs(f.t2 - 130e-6) < 4 * f.t2_err);
  CHECK(std::abs(f.frequency - 20e3) < 4 * f.frequency_err);
  CHECK_FALSE(f.t2_is_lower_bound);
  d = synthesize_ramsey(0.45, 14e-3, 500, 0.3, linspace(0, 30e-3, 41), 100, Envelope::exponential, rng);
  f = fit_ramsey(d);
  CHECK(std::abs(f.t2 - 14e-3) < 4 * f.t2_err);
}

TEST_CASE("ramsey window much shorter than the decay gives a lower bound") {
  std::mt19937_64 rng(9);
  const auto d = synthesize_ramsey(0.45, 1.0, 500, 0.3, linspace(0, 20e-3, 41), 100, Envelope::exponential, rng);
  const auto f = fit_ramsey(d);
  CHECK(f.t2_is_lower_bound);
  CHECK(f.t2_lower_bound > 20e-3);
}

TEST_CASE("rabi fits and the two-photon relation") {
  std::mt19937_64 rng(10);
  const double w = 2 * std::numbers::pi * 2.497e3;
  const auto d = synthesize_rabi(w, 0.48, 0.5, linspace(0, 1.2e-3, 61), 100, rng);
  const auto f = fit_rabi(d);
  CHECK(std::abs(f.omega - w) < 4 * f.omega_err);
  const auto short_scan = synthesize_rabi(w, 0.48, 0.5, linspace(0, 0.2e-3, 61), 100, rng);
  CHECK_THROWS_AS(fit_rabi(short_scan), InputError);
  // Omega_rf = 2 Delta Omega_eff / Omega_mw.
  // 2.497 kHz effective, 13.5 kHz microwave, 125 kHz detuning.
  const double rf = rf_rabi_from_effective(2.497e3, 13.5e3, 125e3);
  CHECK(rf == Approx(46.24e3).epsilon(1e-4));
  CHECK(two_photon_rabi(13.5e3, rf, 125e3) == Approx(2.497e3));
  CHECK_THROWS_AS(two_photon_rabi(13.5e3, rf, 0.0), InputError);
}
