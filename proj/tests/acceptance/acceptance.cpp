// Acceptance suite: one PASS/FAIL line per criterion, tolerances fixed here.
// Exits 1 if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "atomsim/analysis.hpp"
#include "atomsim/budget.hpp"
#include "atomsim/collection.hpp"
#include "atomsim/config.hpp"
#include "atomsim/pulsescan.hpp"
#include "atomsim/reproduce.hpp"

using namespace atomsim;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Tolerances.
constexpr double kOptimumLo = 6e-9, kOptimumHi = 10e-9;
constexpr double kScanRuntimeS = 120.0;
constexpr double kTotal12 = 0.017, kTotal12Tol = 0.005;
constexpr double kTotal30 = 0.035, kTotal30Tol = 0.010;
constexpr double kTrajectorySigmas = 3.0;
constexpr std::size_t kTrajectories = 100000;
constexpr double kTraceDrift = 1e-8, kHermiticity = 1e-10, kMinEigen = -1e-8, kFreeDecay = 1e-5;
constexpr double kQuadrature = 1e-6, kHemisphere = 1e-9;
constexpr double kEtaCC = 0.04135, kEtaCCTol = 0.004, kThermalRuntimeS = 300.0;
constexpr double kPs = 0.0156, kPsTol = 0.0010;
constexpr double kFidelity = 0.94175;
constexpr double kLowerBound = 0.931, kLowerBoundTol = 0.001;
constexpr double kCoherence = 0.939, kCoherenceTol = 0.001, kDephasing = 0.0305, kDephasingTol = 0.0005;
constexpr double kInferred = 0.962, kInferredTol = 0.001, kInferredErr = 0.026, kInferredErrTol = 0.002;
constexpr std::size_t kRoundTrips = 200;
constexpr double kRecovered = 0.95;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!detail.str().empty()) detail << "; ";
    detail << what << (ok ? "" : " [fail]");
    pass = pass && ok;
  }
};

std::string num(double x, int digits = 6) {
  std::ostringstream s;
  s.precision(digits);
  s << x;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const ScanPoint* find_point(const std::vector<ScanPoint>& pts, double t_pi) {
  for (const auto& p : pts)
    if (std::abs(p.t_pi - t_pi) < 1e-15) return &p;
  return nullptr;
}

}  // namespace

int main() {
  const RunConfig cfg = default_run_config();
  const ScanConfig scan_cfg = cfg.scan_config();
  int failures = 0;

  auto report = [&](int id, const std::string& name, const std::function<void(Outcome&)>& body) {
    Outcome o;
    try {
      body(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("threw: ") + e.what());
    }
    if (!o.pass) ++failures;
    std::printf("%s criterion %2d %-26s %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.str().c_str());
    std::fflush(stdout);
  };

  const auto t_scan = std::chrono::steady_clock::now();
  const auto scan = scan_pulse_duration(cfg.pulse.t_pi_grid, scan_cfg, cfg.threads);
  const double scan_seconds = seconds_since(t_scan);

  report(1, "pulse_scan_optimum", [&](Outcome& o) {
    const double opt = scan.at(argmin_total(scan)).t_pi;
    o.require(opt >= kOptimumLo && opt <= kOptimumHi,
              "argmin " + num(opt * 1e9) + " ns in [6, 10] ns");
    o.require(scan.size() == 30, std::to_string(scan.size()) + " grid points");
    o.require(scan_seconds < kScanRuntimeS, "runtime " + num(scan_seconds, 3) + " s < 120 s");
  });

  report(2, "pulse_total_error", [&](Outcome& o) {
    const ScanPoint* p12 = find_point(scan, 12e-9);
    const ScanPoint* p30 = find_point(scan, 30e-9);
    const double e12 = p12 ? p12->total_error : evaluate_scan_point(12e-9, scan_cfg).total_error;
    const double e30 = p30 ? p30->total_error : evaluate_scan_point(30e-9, scan_cfg).total_error;
    o.require(std::abs(e12 - kTotal12) <= kTotal12Tol, "12 ns " + num(e12) + " vs 0.017 +- 0.005");
    o.require(std::abs(e30 - kTotal30) <= kTotal30Tol, "30 ns " + num(e30) + " vs 0.035 +- 0.010");
  });

  report(3, "trajectory_oracle", [&](Outcome& o) {
    for (double t : {8e-9, 12e-9, 30e-9}) {
      const ScanPoint* p = find_point(scan, t);
      const ScanPoint me = p ? *p : evaluate_scan_point(t, scan_cfg);
      const auto mc = unravel_trajectories(t, scan_cfg, kTrajectories, cfg.seeds.front(), cfg.threads);
      const double zl = std::abs(mc.leakage - me.leakage_error) / mc.leakage_stderr;
      const double zd = std::abs(mc.double_excitation - me.double_excitation_error) / mc.double_excitation_stderr;
      const std::string at = num(t * 1e9) + " ns";
      o.require(std::isfinite(zl) && zl <= kTrajectorySigmas, at + " leakage z=" + num(zl, 3));
      o.require(std::isfinite(zd) && zd <= kTrajectorySigmas, at + " double z=" + num(zd, 3));
    }
  });

  report(4, "lindblad_properties", [&](Outcome& o) {
    double drift = 0.0, herm = 0.0, eig = 0.0;
    for (const auto& p : scan) {
      drift = std::max(drift, p.invariants.max_trace_drift);
      herm = std::max(herm, p.invariants.max_hermiticity_defect);
      eig = std::min(eig, p.invariants.min_eigenvalue);
    }
    o.require(drift < kTraceDrift, "trace drift " + num(drift, 3));
    o.require(herm < kHermiticity, "hermiticity " + num(herm, 3));
    o.require(eig > kMinEigen, "min eigenvalue " + num(eig, 3));
    const auto fd = free_decay_check(cfg.scheme, cfg.pulse.tolerances);
    o.require(fd.max_relative_error < kFreeDecay, "free decay rel " + num(fd.max_relative_error, 3));
  });

  report(5, "analytic_collection", [&](Outcome& o) {
    for (auto p : {Polarization::sigma_plus, Polarization::pi}) {
      const double d = std::abs(collection_efficiency_analytic(0.55, p) - collection_efficiency_numeric(0.55, p));
      o.require(d < kQuadrature, to_string(p) + " |analytic - quadrature| " + num(d, 3));
      const double a = std::abs(collection_efficiency_analytic(1.0, p) - 0.5);
      const double q = std::abs(collection_efficiency_numeric(1.0, p) - 0.5);
      o.require(a < kHemisphere && q < kHemisphere, to_string(p) + " hemisphere " + num(std::max(a, q), 3));
    }
  });

  ThermalResult thermal;
  report(6, "eta_cc", [&](Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    thermal = thermal_average(cfg.optics, cfg.trap, collected_channels(), cfg.thermal);
    ThermalOptions doubled = cfg.thermal;
    doubled.radial_order *= 2;
    doubled.axial_order *= 2;
    doubled.hermite_order *= 2;
    doubled.tolerance = 0.0;
    const auto d = thermal_average(cfg.optics, cfg.trap, collected_channels(), doubled);
    const double secs = seconds_since(t0);
    const double change = std::abs(d.eta_cc - thermal.eta_cc);
    o.require(std::abs(thermal.eta_cc - kEtaCC) <= kEtaCCTol, "eta_cc " + num(thermal.eta_cc) + " vs 0.04135 +- 0.004");
    o.require(change <= thermal.convergence_estimate,
              "doubled-order change " + num(change, 3) + " <= estimate " + num(thermal.convergence_estimate, 3));
    o.require(secs < kThermalRuntimeS, "runtime " + num(secs, 3) + " s < 300 s");
  });

  report(7, "success_probability", [&](Outcome& o) {
    const double ps = success_probability(thermal.eta_cc, cfg.losses.value_or(Losses{}));
    o.require(std::abs(ps - kPs) <= kPsTol, "P_s " + num(ps) + " vs 0.0156 +- 0.0010");
  });

  report(8, "fidelity_arithmetic", [&](Outcome& o) {
    const double f = bell_fidelity({0.909, 0.0, 0.919, 0.0, 0.939, 0.0}).value;
    o.require(std::abs(f - kFidelity) < 1e-12, "F " + num(f, 12));
    o.require(bell_fidelity({1, 0, 1, 0, 1, 0}).value == 1.0, "ideal 1");
    o.require(bell_fidelity({0, 0, 0, 0, 0, 0}).value == 0.25, "mixed 0.25");
  });

  report(9, "lower_bound_arithmetic", [&](Outcome& o) {
    const double ideal = fidelity_lower_bound({0.5, 0.5, 0, 0}, {0.5, 0.5, 0, 0}).value;
    const double mixed = fidelity_lower_bound({0.25, 0.25, 0.25, 0.25}, {0.25, 0.25, 0.25, 0.25}).value;
    const double ez = 0.0305, ey = 0.0385;
    const double lb = fidelity_lower_bound({(1 - ez) / 2, (1 - ez) / 2, ez / 2, ez / 2},
                                           {(1 - ey) / 2, (1 - ey) / 2, ey / 2, ey / 2})
                          .value;
    o.require(ideal == 1.0, "ideal " + num(ideal, 12));
    o.require(mixed == 0.0, "mixed " + num(mixed, 12));
    o.require(std::abs(lb - kLowerBound) <= kLowerBoundTol, "constructed " + num(lb) + " vs 0.931 +- 0.001");
  });

  report(10, "dephasing", [&](Outcome& o) {
    const auto d = dephasing_error(CoherenceInputs{});
    o.require(std::abs(d.coherence - kCoherence) <= kCoherenceTol, "C " + num(d.coherence));
    o.require(std::abs(d.entry.value - kDephasing) <= kDephasingTol, "eps " + num(d.entry.value));
  });

  report(11, "inferred_fidelity", [&](Outcome& o) {
    const auto f = inferred_fidelity(0.942, 0.016, 0.02, 0.02);
    o.require(std::abs(f.value - kInferred) <= kInferredTol, "F_inf " + num(f.value));
    o.require(std::abs(f.error - kInferredErr) <= kInferredErrTol, "error " + num(f.error));
  });

  report(12, "fit_round_trips", [&](Outcome& o) {
    const std::uint64_t s = cfg.seeds.front();
    for (const auto& r : {round_trip_histogram(kRoundTrips, s), round_trip_ramsey(130e-6, kRoundTrips, s),
                          round_trip_ramsey(14e-3, kRoundTrips, s), round_trip_rabi(kTwoPi * 109e3, kRoundTrips, s),
                          round_trip_rabi(kTwoPi * 2.497e3, kRoundTrips, s), round_trip_parity(kRoundTrips, s)}) {
      o.require(r.datasets == kRoundTrips && r.fraction() >= kRecovered,
                r.name + " " + std::to_string(r.recovered) + "/" + std::to_string(r.datasets));
    }
  });

  std::printf("SKIP criterion 13 raw_data                   measured counts are unpublished; covered by synthetic round trips\n");
  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
