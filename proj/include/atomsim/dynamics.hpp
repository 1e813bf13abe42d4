#pragma once

// Lindblad evolution of a LevelScheme under a Gaussian drive, in the frame
// rotating at the laser frequency (RWA), with hbar divided out.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "atomsim/density_matrix.hpp"
#include "atomsim/level_scheme.hpp"
#include "atomsim/ode.hpp"

namespace atomsim {

struct PulseProfile {
  double omega_peak = 0.0;  // rad/s, stretched-transition convention
  double center = 0.0;      // s
  double width = 1e-9;      // sigma, s
  int q = 0;
  double t_start = 0.0;
  double t_end = 0.0;

  double envelope(double t) const;
  void validate() const;

  // Window [0, 2*half_width_sigmas*sigma] centered on the Gaussian.
  static PulseProfile centered(double omega_peak, double sigma, int q, double half_width_sigmas = 8.0);
};

struct JumpOperator {
  double rate = 0.0;
  std::size_t from = 0;
  std::size_t to = 0;
};

std::vector<JumpOperator> jump_operators(const LevelScheme& scheme);

ComplexMatrix hamiltonian_at(const LevelScheme& scheme, const PulseProfile& pulse, double t);

ComplexMatrix lindblad_rhs(const LevelScheme& scheme, const PulseProfile& pulse, const ComplexMatrix& rho, double t);

struct Tolerances {
  double rtol = 1e-8;
  double atol = 1e-10;
  // Invariant violations beyond this abort the run.
  double invariant_limit = 1e-6;
};

struct EvolveOptions {
  // Extra times at which to record the state; t0 and t1 are always recorded.
  std::vector<double> sample_times;
  // Integrated decay flux sum_i gamma_i * rho_ii over these levels is tracked.
  std::vector<std::size_t> flux_levels;
  // Check the smallest eigenvalue at each sample.
  bool check_positivity = true;
};

struct InvariantReport {
  double max_trace_drift = 0.0;
  double max_hermiticity_defect = 0.0;
  double min_eigenvalue = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  std::vector<double> flux;  // cumulative tracked decay flux at each time
  std::vector<std::string> labels;
  InvariantReport invariants;
  OdeStats stats;

  std::size_t size() const { return times.size(); }
  double population(std::size_t level, std::size_t sample) const { return states.at(sample).population(level); }
  const DensityMatrix& final_state() const { return states.back(); }
  double final_flux() const { return flux.empty() ? 0.0 : flux.back(); }

  // time_s, one column per level, trace.
  void write_csv(std::ostream& out) const;
};

Trajectory evolve(const LevelScheme& scheme, const PulseProfile& pulse, const DensityMatrix& rho0, double t0,
                  double t1, const Tolerances& tolerances = {}, const EvolveOptions& options = {});

struct PiCalibration {
  double omega_peak = 0.0;     // stretched convention, enters the Hamiltonian
  double omega_driven = 0.0;   // omega_peak * |C| on |3,0> -> |2',0>
  double cg_factor = 0.0;      // C
};

// Omega_p such that (Omega_p |C|) sigma sqrt(2 pi) = pi on |3,0> -> |2',0>.
PiCalibration calibrate_pi(double width_sigma, int q);
double calibrate_pi_pulse(const LevelScheme& scheme, double width_sigma, int q);

}  // namespace atomsim
