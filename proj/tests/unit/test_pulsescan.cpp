#include <doctest.h>

#include <cmath>
#include <sstream>

#include "atomsim/errors.hpp"
#include "atomsim/pulsescan.hpp"

using namespace atomsim;
using doctest::Approx;

namespace {

ScanConfig flagged_config() {
  ScanConfig c;
  c.scheme.flagged = true;
  return c;
}

double sum_of(const PopulationMap& m) {
  double s = 0.0;
  for (const auto& [label, p] : m) s += p;
  return s;
}

}  // namespace

TEST_CASE("duration conventions map to sigma") {
  ScanConfig c;
  CHECK(c.sigma_for(12e-9) == Approx(12e-9 / (2.0 * std::sqrt(2.0 * std::log(2.0)))));
  c.convention = DurationConvention::sigma;
  CHECK(c.sigma_for(12e-9) == 12e-9);
  const auto p = c.pulse_for(12e-9);
  CHECK(p.t_end - p.t_start == Approx(2.0 * c.window_sigmas * 12e-9));
  c.q = 1;
  CHECK_THROWS_AS(c.validate(), InputError);
  CHECK_THROWS_AS(evaluate_scan_point(-1e-9, flagged_config()), InputError);
}

TEST_CASE("decomposition accounts for the whole trace") {
  const auto c = flagged_config();
  for (double t : {8e-9, 30e-9}) {
    const auto p = evaluate_scan_point(t, c);
    CHECK(p.leakage_error + p.double_excitation_error + p.bell_channel + p.never_excited == Approx(1.0).epsilon(1e-8));
    CHECK(p.total_error == Approx(p.leakage_error + p.double_excitation_error));
    CHECK(p.leakage_error >= 0.0);
    CHECK(p.double_excitation_error >= 0.0);
    CHECK(sum_of(p.final_populations) == Approx(1.0).epsilon(1e-8));
    CHECK(p.invariants.max_trace_drift < 1e-8);
    CHECK(p.invariants.min_eigenvalue > -1e-8);
  }
}

TEST_CASE("scan point at 12 ns") {
  // Frozen after agreement with an independent scipy DOP853 integration of the
  // same 41-level master equation (2.07e-4 and 4.9065e-2).
  const auto p = evaluate_scan_point(12e-9, flagged_config());
  CHECK(p.leakage_error == Approx(2.072177664e-4).epsilon(1e-5));
  CHECK(p.double_excitation_error == Approx(4.906482203e-2).epsilon(1e-5));
  CHECK(p.never_excited == Approx(7.142893748e-3).epsilon(1e-4));
  CHECK(leakage_error(12e-9, flagged_config()) == Approx(p.leakage_error));
  CHECK(double_excitation_error(12e-9, flagged_config()) == Approx(p.double_excitation_error));
}

TEST_CASE("longer pulses trade leakage for double excitation") {
  const auto pts = scan_pulse_duration({8e-9, 12e-9, 30e-9}, flagged_config(), 1);
  REQUIRE(pts.size() == 3);
  CHECK(pts[0].t_pi == 8e-9);
  CHECK(pts[2].t_pi == 30e-9);
  CHECK(pts[0].leakage_error > pts[1].leakage_error);
  CHECK(pts[1].leakage_error > pts[2].leakage_error);
  CHECK(pts[0].double_excitation_error < pts[1].double_excitation_error);
  CHECK(pts[1].double_excitation_error < pts[2].double_excitation_error);
  CHECK(argmin_total(pts) == 0);

  std::ostringstream csv;
  write_scan_csv(csv, pts);
  std::string header;
  std::getline(std::istringstream(csv.str()) >> std::ws, header);
  CHECK(header.rfind("t_pi_ns,leakage,double_excitation,total", 0) == 0);
}

TEST_CASE("final populations are symmetric under m -> -m for a pi pulse") {
  const auto pops = final_populations(12e-9, flagged_config());
  auto find = [&](const std::string& label) {
    for (const auto& [l, p] : pops)
      if (l == label) return p;
    FAIL("missing label " << label);
    return 0.0;
  };
  CHECK(find("g3d_m-1") == Approx(find("g3d_m+1")).epsilon(1e-8));
  CHECK(find("g3d_m-2") == Approx(find("g3d_m+2")).epsilon(1e-8));
  CHECK(find("sink") == Approx(2.072177664e-4).epsilon(1e-5));
}

TEST_CASE("trajectory unraveling agrees with the master equation") {
  const auto c = flagged_config();
  const auto u = unravel_trajectories(12e-9, c, 2000, 7, 1);
  const auto p = evaluate_scan_point(12e-9, c);
  CHECK(u.trajectories == 2000);
  CHECK(std::abs(u.double_excitation - p.double_excitation_error) < 4.0 * u.double_excitation_stderr);
  CHECK(u.leakage + u.double_excitation + u.bell_channel + u.never_excited == Approx(1.0).epsilon(1e-8));
  // Same seed, same answer.
  const auto v = unravel_trajectories(12e-9, c, 2000, 7, 1);
  CHECK(v.double_excitation == u.double_excitation);
  CHECK_THROWS_AS(unravel_trajectories(12e-9, c, 0, 7, 1), InputError);
}
