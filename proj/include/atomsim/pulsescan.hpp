#pragma once

// Leakage and double-excitation error of the excitation pulse versus pulse
// duration at fixed pulse area, using the flagged 41-level scheme.
//
// Error decomposition at the end of the pulse window, with X the integrated
// decay flux out of flagged excited levels:
//   double     = P(flagged excited) + X
//   leakage    = P(sink) + b(4<-f') P(unflagged f'=3,4)
//   bell       = P(flagged ground) - X + P(unflagged f'=2) + b(3<-f') P(unflagged f'=3,4)
//   never      = P(unflagged ground)
// The four add up to the trace. Residual excited population is projected
// through the branching ratios instead of being integrated out.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "atomsim/dynamics.hpp"
#include "atomsim/level_scheme.hpp"

namespace atomsim {

enum class DurationConvention {
  fwhm,   // t_pi is the FWHM of Omega(t): sigma = t_pi / (2 sqrt(2 ln 2))
  sigma,  // t_pi is sigma itself
};

struct ScanConfig {
  SchemeConfig scheme;
  Tolerances tolerances;
  DurationConvention convention = DurationConvention::fwhm;
  double window_sigmas = 8.0;  // pulse window is center +- window_sigmas * sigma
  int q = 0;
  double drive_scale = 1.0;    // multiplies the calibrated peak Rabi frequency

  double sigma_for(double t_pi) const;
  PulseProfile pulse_for(double t_pi) const;
  void validate() const;
};

using PopulationMap = std::vector<std::pair<std::string, double>>;

struct ScanPoint {
  double t_pi = 0.0;
  double leakage_error = 0.0;
  double double_excitation_error = 0.0;
  double total_error = 0.0;
  double bell_channel = 0.0;
  double never_excited = 0.0;
  PopulationMap final_populations;
  InvariantReport invariants;
};

ScanPoint evaluate_scan_point(double t_pi, const ScanConfig& config);

double leakage_error(double t_pi, const ScanConfig& config);
double double_excitation_error(double t_pi, const ScanConfig& config);

// One point per duration, in input order; points run in parallel.
std::vector<ScanPoint> scan_pulse_duration(const std::vector<double>& t_pi_list, const ScanConfig& config,
                                           std::size_t threads = 0);

// Populations of the non-excited levels at pulse end after projecting the
// residual excited population through the branching ratios.
PopulationMap final_populations(double t_pi, const ScanConfig& config);

// t_pi_ns, leakage, double_excitation, total, then one column per level.
void write_scan_csv(std::ostream& out, const std::vector<ScanPoint>& points);

// Index of the smallest total error.
std::size_t argmin_total(const std::vector<ScanPoint>& points);

// Monte-Carlo wavefunction unraveling of the same flagged scheme, scored
// with the same decomposition.
struct UnravelingResult {
  double t_pi = 0.0;
  std::size_t trajectories = 0;
  double leakage = 0.0;
  double leakage_stderr = 0.0;
  double double_excitation = 0.0;
  double double_excitation_stderr = 0.0;
  double bell_channel = 0.0;
  double never_excited = 0.0;
};

UnravelingResult unravel_trajectories(double t_pi, const ScanConfig& config, std::size_t trajectories,
                                      std::uint64_t seed, std::size_t threads = 0);

}  // namespace atomsim
