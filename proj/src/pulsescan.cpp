#include "atomsim/pulsescan.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "atomsim/angular.hpp"
#include "atomsim/errors.hpp"
#include "atomsim/parallel.hpp"

namespace atomsim {

double ScanConfig::sigma_for(double t_pi) const {
  if (!(t_pi > 0.0) || !std::isfinite(t_pi)) throw InputError("pulse duration must be positive");
  switch (convention) {
    case DurationConvention::fwhm: return t_pi / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    case DurationConvention::sigma: return t_pi;
  }
  return t_pi;
}

PulseProfile ScanConfig::pulse_for(double t_pi) const {
  const double sigma = sigma_for(t_pi);
  const double omega = calibrate_pi(sigma, q).omega_peak * drive_scale;
  return PulseProfile::centered(omega, sigma, q, window_sigmas);
}

void ScanConfig::validate() const {
  scheme.validate();
  if (!(window_sigmas > 0.0)) throw InputError("window_sigmas must be positive");
  if (!(drive_scale >= 0.0) || !std::isfinite(drive_scale)) throw InputError("drive_scale must be >= 0");
  if (q != 0) throw InputError("pulse q must be 0: the pulse area is calibrated on |3,0> -> |2',0>");
  if (!(tolerances.rtol > 0.0) || !(tolerances.atol > 0.0)) throw InputError("tolerances must be positive");
}

namespace {

double to_f3_share(const Level& l) { return branching_ratio(AngularMomentum::integer(3), l.f); }

}  // namespace

ScanPoint evaluate_scan_point(double t_pi, const ScanConfig& config) {
  config.validate();
  const LevelScheme scheme = build_flagged_scheme(config.scheme);
  const PulseProfile pulse = config.pulse_for(t_pi);

  EvolveOptions opts;
  for (std::size_t i = 0; i < scheme.size(); ++i)
    if (scheme.level(i).excited() && scheme.level(i).decayed) opts.flux_levels.push_back(i);

  const auto rho0 = DensityMatrix::pure(scheme.size(), scheme.index(Manifold::ground_f3, 0));
  Trajectory traj;
  try {
    traj = evolve(scheme, pulse, rho0, pulse.t_start, pulse.t_end, config.tolerances, opts);
  } catch (const SolverError& e) {
    std::ostringstream msg;
    msg << "t_pi=" << t_pi * 1e9 << " ns: " << e.what();
    throw SolverError(msg.str());
  }
  const std::vector<double> pop = traj.final_state().populations();
  const double x = traj.final_flux();

  ScanPoint pt;
  pt.t_pi = t_pi;
  pt.invariants = traj.invariants;
  double flagged_ground = 0.0;
  for (std::size_t i = 0; i < scheme.size(); ++i) {
    const Level& l = scheme.level(i);
    const double p = pop[i];
    if (l.manifold == Manifold::ground_f4_sink) {
      pt.leakage_error += p;
    } else if (!l.excited()) {
      if (l.decayed)
        flagged_ground += p;
      else
        pt.never_excited += p;
    } else if (l.decayed) {
      pt.double_excitation_error += p;
    } else {
      const double b3 = to_f3_share(l);
      pt.bell_channel += b3 * p;
      pt.leakage_error += (1.0 - b3) * p;
    }
  }
  pt.double_excitation_error += x;
  pt.bell_channel += flagged_ground - x;
  pt.total_error = pt.leakage_error + pt.double_excitation_error;

  std::vector<double> proj = pop;
  const std::vector<double> gamma = scheme.total_decay_rates();
  for (const auto& d : scheme.decays()) proj[d.to] += pop[d.from] * d.rate / gamma[d.from];
  for (std::size_t i = 0; i < scheme.size(); ++i) {
    if (scheme.level(i).excited()) continue;
    pt.final_populations.emplace_back(scheme.level(i).label(), proj[i]);
  }
  return pt;
}

double leakage_error(double t_pi, const ScanConfig& config) { return evaluate_scan_point(t_pi, config).leakage_error; }

double double_excitation_error(double t_pi, const ScanConfig& config) {
  return evaluate_scan_point(t_pi, config).double_excitation_error;
}

std::vector<ScanPoint> scan_pulse_duration(const std::vector<double>& t_pi_list, const ScanConfig& config,
                                           std::size_t threads) {
  config.validate();
  for (double t : t_pi_list)
    if (!(t > 0.0) || !std::isfinite(t)) throw InputError("pulse durations must be positive");
  std::vector<ScanPoint> out(t_pi_list.size());
  parallel_for(
      t_pi_list.size(), [&](std::size_t i) { out[i] = evaluate_scan_point(t_pi_list[i], config); }, threads);
  return out;
}

PopulationMap final_populations(double t_pi, const ScanConfig& config) {
  return evaluate_scan_point(t_pi, config).final_populations;
}

void write_scan_csv(std::ostream& out, const std::vector<ScanPoint>& points) {
  const auto old_precision = out.precision(12);
  out << "t_pi_ns,leakage,double_excitation,total";
  if (!points.empty())
    for (const auto& [label, p] : points.front().final_populations) out << ',' << label;
  out << '\n';
  for (const auto& pt : points) {
    out << pt.t_pi * 1e9 << ',' << pt.leakage_error << ',' << pt.double_excitation_error << ',' << pt.total_error;
    for (const auto& [label, p] : pt.final_populations) out << ',' << p;
    out << '\n';
  }
  out.precision(old_precision);
}

std::size_t argmin_total(const std::vector<ScanPoint>& points) {
  if (points.empty()) throw InputError("empty scan");
  std::size_t best = 0;
  for (std::size_t i = 1; i < points.size(); ++i)
    if (points[i].total_error < points[best].total_error) best = i;
  return best;
}

}  // namespace atomsim
