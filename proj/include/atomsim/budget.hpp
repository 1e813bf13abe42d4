#pragma once

// Infidelity budget: dephasing during the analysis sequence, bound entries,
// composition and consistency with a measured fidelity.

#include <iosfwd>
#include <string>
#include <vector>

#include "atomsim/analysis.hpp"

namespace atomsim {

enum class EntryKind { measured, bound, modeled };
std::string to_string(EntryKind k);
EntryKind entry_kind_from_string(const std::string& s);

struct BudgetEntry {
  std::string name;
  double value = 0.0;        // for bounds: the upper limit
  double uncertainty = 0.0;
  EntryKind kind = EntryKind::measured;
};

struct CoherenceInputs {
  double t_pre = 7e-6;          // s, in the sensitive basis
  double tau_sens = 130e-6;
  double tau_sens_err = 7e-6;
  double t_post = 125e-6;       // s, in the mapped basis
  double tau_map = 14e-3;
  double tau_map_err = 1e-3;

  void validate() const;
};

struct DephasingResult {
  double coherence = 0.0;
  double coherence_err = 0.0;
  BudgetEntry entry;  // epsilon = (1 - C) / 2
};

// C = exp(-t_pre/tau_sens) exp(-t_post/tau_map); only the X and Y parities
// dephase, hence the factor 1/2.
DephasingResult dephasing_error(const CoherenceInputs& in);

// 1/extinction + sin^2(tilt).
BudgetEntry polarization_error_bound(double extinction_ratio, double tilt_rms_deg);

// gate * dark rate / herald probability.
BudgetEntry detection_noise_bound(double gate_ns, double dark_rate_hz, double herald_prob);

struct BudgetReport {
  std::vector<BudgetEntry> entries;
  double central_total = 0.0;     // non-bound entries
  double central_uncertainty = 0.0;
  double bound_total = 0.0;       // bound entries at their limits
  double predicted_fidelity = 0.0;      // 1 - central_total
  double predicted_fidelity_low = 0.0;  // 1 - central_total - bound_total
  bool has_measurement = false;
  double measured_fidelity = 0.0;
  double measured_uncertainty = 0.0;
  double combined_uncertainty = 0.0;
  double sigma_limit = 2.0;
  bool consistent = true;
  std::string verdict;     // "pass", "inconsistent" or "no measurement"
  std::string diagnostic;
};

BudgetReport compose_budget(const std::vector<BudgetEntry>& entries);
// Adds the consistency check: the interval [predicted_low, predicted] must
// come within sigma_limit combined standard deviations of the measurement.
BudgetReport compose_budget(const std::vector<BudgetEntry>& entries, double measured_fidelity,
                            double measured_uncertainty, double sigma_limit = 2.0);

void write_budget_table(std::ostream& out, const BudgetReport& report);

// F + epsilon_state, errors in quadrature; above 1 is clipped with a warning.
Estimate inferred_fidelity(double f_measured, double f_err, double epsilon_state, double epsilon_err);

// The error-budget rows in their conventional order.
std::vector<BudgetEntry> default_budget_entries();

}  // namespace atomsim
