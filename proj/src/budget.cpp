#include "atomsim/budget.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include "atomsim/errors.hpp"

namespace atomsim {

std::string to_string(EntryKind k) {
  switch (k) {
    case EntryKind::measured: return "measured";
    case EntryKind::bound: return "bound";
    case EntryKind::modeled: return "modeled";
  }
  return "?";
}

EntryKind entry_kind_from_string(const std::string& s) {
  if (s == "measured") return EntryKind::measured;
  if (s == "bound") return EntryKind::bound;
  if (s == "modeled") return EntryKind::modeled;
  throw InputError("unknown budget entry kind '" + s + "'");
}

void CoherenceInputs::validate() const {
  if (!(t_pre >= 0.0) || !(t_post >= 0.0)) throw InputError("dephasing intervals must be non-negative");
  if (!(tau_sens > 0.0) || !(tau_map > 0.0)) throw InputError("coherence times must be positive");
  if (!(tau_sens_err >= 0.0) || !(tau_map_err >= 0.0)) throw InputError("coherence-time errors must be non-negative");
}

DephasingResult dephasing_error(const CoherenceInputs& in) {
  in.validate();
  const double a = std::isinf(in.tau_sens) ? 1.0 : std::exp(-in.t_pre / in.tau_sens);
  const double b = std::isinf(in.tau_map) ? 1.0 : std::exp(-in.t_post / in.tau_map);
  DephasingResult r;
  r.coherence = a * b;
  const double d_sens = std::isinf(in.tau_sens) ? 0.0 : r.coherence * in.t_pre / (in.tau_sens * in.tau_sens);
  const double d_map = std::isinf(in.tau_map) ? 0.0 : r.coherence * in.t_post / (in.tau_map * in.tau_map);
  r.coherence_err = std::hypot(d_sens * in.tau_sens_err, d_map * in.tau_map_err);
  r.entry = {"atom dephasing", 0.5 * (1.0 - r.coherence), 0.5 * r.coherence_err, EntryKind::modeled};
  return r;
}

BudgetEntry polarization_error_bound(double extinction_ratio, double tilt_rms_deg) {
  if (!(extinction_ratio > 1.0)) throw InputError("extinction ratio must exceed 1");
  if (!std::isfinite(tilt_rms_deg)) throw InputError("tilt must be finite");
  const double s = std::sin(tilt_rms_deg * std::numbers::pi / 180.0);
  const double direct = std::isinf(extinction_ratio) ? 0.0 : 1.0 / extinction_ratio;
  return {"excitation polarization", direct + s * s, 0.0, EntryKind::bound};
}

BudgetEntry detection_noise_bound(double gate_ns, double dark_rate_hz, double herald_prob) {
  if (!(gate_ns > 0.0) || !(dark_rate_hz >= 0.0)) throw InputError("gate must be positive and dark rate non-negative");
  if (!(herald_prob > 0.0 && herald_prob <= 1.0)) throw InputError("herald probability must lie in (0, 1]");
  return {"photon detection noise", gate_ns * 1e-9 * dark_rate_hz / herald_prob, 0.0, EntryKind::bound};
}

BudgetReport compose_budget(const std::vector<BudgetEntry>& entries) {
  if (entries.empty()) throw InputError("budget has no entries");
  BudgetReport r;
  r.entries = entries;
  double var = 0.0;
  for (const auto& e : entries) {
    if (!(e.value >= 0.0) || !std::isfinite(e.value)) throw InputError("budget entry '" + e.name + "' must be >= 0");
    if (!(e.uncertainty >= 0.0)) throw InputError("budget entry '" + e.name + "' has a negative uncertainty");
    if (e.kind == EntryKind::bound) {
      r.bound_total += e.value;
    } else {
      r.central_total += e.value;
      var += e.uncertainty * e.uncertainty;
    }
  }
  r.central_uncertainty = std::sqrt(var);
  r.predicted_fidelity = 1.0 - r.central_total;
  r.predicted_fidelity_low = 1.0 - r.central_total - r.bound_total;
  r.verdict = "no measurement";
  if (r.central_total + r.bound_total > 1.0) {
    r.consistent = false;
    r.verdict = "inconsistent";
    std::ostringstream msg;
    msg << "contributions sum to " << r.central_total + r.bound_total << ", above 1";
    r.diagnostic = msg.str();
  }
  return r;
}

BudgetReport compose_budget(const std::vector<BudgetEntry>& entries, double measured_fidelity,
                            double measured_uncertainty, double sigma_limit) {
  if (!(measured_fidelity >= 0.0 && measured_fidelity <= 1.0)) throw InputError("measured fidelity must lie in [0, 1]");
  if (!(measured_uncertainty >= 0.0)) throw InputError("measured uncertainty must be non-negative");
  BudgetReport r = compose_budget(entries);
  r.has_measurement = true;
  r.measured_fidelity = measured_fidelity;
  r.measured_uncertainty = measured_uncertainty;
  r.sigma_limit = sigma_limit;
  r.combined_uncertainty = std::hypot(r.central_uncertainty, measured_uncertainty);
  if (!r.consistent) return r;
  double gap = 0.0;
  if (measured_fidelity > r.predicted_fidelity)
    gap = measured_fidelity - r.predicted_fidelity;
  else if (measured_fidelity < r.predicted_fidelity_low)
    gap = r.predicted_fidelity_low - measured_fidelity;
  std::ostringstream msg;
  msg << std::setprecision(4) << "predicted " << r.predicted_fidelity_low << ".." << r.predicted_fidelity << " vs measured "
      << measured_fidelity << " +- " << measured_uncertainty << ": gap " << gap << " = "
      << (r.combined_uncertainty > 0.0 ? gap / r.combined_uncertainty : (gap > 0.0 ? INFINITY : 0.0))
      << " combined sigma";
  r.diagnostic = msg.str();
  r.consistent = gap <= sigma_limit * r.combined_uncertainty;
  r.verdict = r.consistent ? "pass" : "inconsistent";
  return r;
}

void write_budget_table(std::ostream& out, const BudgetReport& r) {
  std::size_t width = 15;
  for (const auto& e : r.entries) width = std::max(width, e.name.size());
  out << std::left << std::setw(static_cast<int>(width)) << "source of error" << "  contribution\n";
  for (const auto& e : r.entries) {
    std::ostringstream v;
    if (e.kind == EntryKind::bound)
      v << "< " << std::setprecision(2) << e.value;
    else if (e.uncertainty > 0.0)
      v << std::setprecision(4) << e.value << " +- " << std::setprecision(2) << e.uncertainty;
    else
      v << "~ " << std::setprecision(4) << e.value;
    out << std::left << std::setw(static_cast<int>(width)) << e.name << "  " << v.str() << '\n';
  }
  out << std::left << std::setw(static_cast<int>(width)) << "total" << "  " << std::setprecision(4) << r.central_total
      << " +- " << std::setprecision(2) << r.central_uncertainty << " (+ up to " << std::setprecision(3) << r.bound_total
      << " from bounds)\n";
  out << "verdict: " << r.verdict;
  if (!r.diagnostic.empty()) out << " (" << r.diagnostic << ")";
  out << '\n';
}

Estimate inferred_fidelity(double f_measured, double f_err, double epsilon_state, double epsilon_err) {
  if (!(f_measured >= 0.0 && f_measured <= 1.0) || !(epsilon_state >= 0.0 && epsilon_state <= 1.0))
    throw InputError("fidelity and state error must lie in [0, 1]");
  if (!(f_err >= 0.0) || !(epsilon_err >= 0.0)) throw InputError("uncertainties must be non-negative");
  Estimate e;
  e.value = f_measured + epsilon_state;
  e.error = std::hypot(f_err, epsilon_err);
  if (e.value > 1.0) {
    e.value = 1.0;
    e.clipped = true;
    e.warning = "inferred fidelity above 1 clipped to 1";
  }
  return e;
}

std::vector<BudgetEntry> default_budget_entries() {
  return {
      {"atom dephasing", 0.0305, 0.0015, EntryKind::modeled},
      {"atomic state measurement", 0.02, 0.02, EntryKind::measured},
      {"imperfect optical pumping", 0.009, 0.007, EntryKind::measured},
      {"leakage during excitation", 0.017, 0.0, EntryKind::modeled},
      {"photon detection noise", 3e-3, 0.0, EntryKind::bound},
      {"atom basis preparation", 3e-3, 0.0, EntryKind::bound},
      {"waveplate rotation error", 3e-3, 0.0, EntryKind::bound},
      {"excitation polarization", 1e-4, 0.0, EntryKind::bound},
  };
}

}  // namespace atomsim
