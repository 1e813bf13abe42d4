#include "atomsim/reproduce.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>

#include "atomsim/errors.hpp"
#include "atomsim/synthetic.hpp"

namespace atomsim {

using nlohmann::json;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool within(double x, double truth, double err) { return std::isfinite(err) && std::abs(x - truth) <= 3.0 * err; }

double angle_diff(double a, double b) { return std::remainder(a - b, kTwoPi); }

// Lazily computed intermediate results shared by several checks.
class Context {
 public:
  explicit Context(const RunConfig& c) : cfg(c) {}

  const std::vector<ScanPoint>& scan() {
    if (!scan_) scan_ = scan_pulse_duration(cfg.pulse.t_pi_grid, cfg.scan_config(), cfg.threads);
    return *scan_;
  }

  const ScanPoint& point(double t_pi) {
    auto it = points_.find(t_pi);
    if (it != points_.end()) return it->second;
    for (const auto& p : scan())
      if (std::abs(p.t_pi - t_pi) < 1e-15) return points_.emplace(t_pi, p).first->second;
    return points_.emplace(t_pi, evaluate_scan_point(t_pi, cfg.scan_config())).first->second;
  }

  const ThermalResult& thermal() {
    if (!thermal_) thermal_ = thermal_average(cfg.optics, cfg.trap, collected_channels(), cfg.thermal);
    return *thermal_;
  }

  const std::vector<RoundTripStats>& round_trips() {
    if (!round_trips_) {
      const std::uint64_t s = cfg.seeds.front();
      round_trips_ = std::vector<RoundTripStats>{
          round_trip_histogram(200, s),
          round_trip_ramsey(130e-6, 200, s),
          round_trip_ramsey(14e-3, 200, s),
          round_trip_rabi(kTwoPi * 109e3, 200, s),
          round_trip_rabi(kTwoPi * 2.497e3, 200, s),
          round_trip_parity(200, s),
      };
    }
    return *round_trips_;
  }

  const RunConfig& cfg;

 private:
  std::optional<std::vector<ScanPoint>> scan_;
  std::map<double, ScanPoint> points_;
  std::optional<ThermalResult> thermal_;
  std::optional<std::vector<RoundTripStats>> round_trips_;
};

struct Measurement {
  double value = 0.0;
  std::string detail;
};

struct Check {
  CheckInfo info;
  std::function<Measurement(Context&)> run;
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

Measurement round_trip_measure(Context& ctx, std::size_t k) {
  const auto& r = ctx.round_trips().at(k);
  return {r.fraction(), std::to_string(r.recovered) + "/" + std::to_string(r.datasets) + " recovered, " +
                            std::to_string(r.failed) + " fits failed"};
}

std::vector<Check> make_checks() {
  std::vector<Check> c;
  c.push_back({{"pulse_optimum_ns", "argmin of total excitation error over the pulse-duration grid"}, [](Context& x) {
                 const auto& s = x.scan();
                 if (s.empty()) throw InputError("pulse.t_pi_grid_ns is empty");
                 const auto& p = s[argmin_total(s)];
                 return Measurement{p.t_pi * 1e9, "total " + fmt(p.total_error)};
               }});
  c.push_back({{"pulse_total_12ns", "leakage + double excitation at t_pi = 12 ns"}, [](Context& x) {
                 const auto& p = x.point(12e-9);
                 return Measurement{p.total_error, "leakage " + fmt(p.leakage_error) + ", double " +
                                                       fmt(p.double_excitation_error)};
               }});
  c.push_back({{"pulse_total_30ns", "leakage + double excitation at t_pi = 30 ns"}, [](Context& x) {
                 const auto& p = x.point(30e-9);
                 return Measurement{p.total_error, "leakage " + fmt(p.leakage_error) + ", double " +
                                                       fmt(p.double_excitation_error)};
               }});
  c.push_back({{"unraveling_max_z", "largest |density matrix - trajectories| / stderr over the oracle durations"},
               [](Context& x) {
                 double worst = 0.0;
                 std::ostringstream d;
                 std::uint64_t seed = x.cfg.seeds.front();
                 for (double t : x.cfg.unraveling.t_pi) {
                   const auto& p = x.point(t);
                   const auto u = unravel_trajectories(t, x.cfg.scan_config(), x.cfg.unraveling.trajectories, seed++,
                                                       x.cfg.threads);
                   const double zl = std::abs(u.leakage - p.leakage_error) / std::max(u.leakage_stderr, 1e-300);
                   const double zd = std::abs(u.double_excitation - p.double_excitation_error) /
                                     std::max(u.double_excitation_stderr, 1e-300);
                   worst = std::max({worst, zl, zd});
                   d << fmt(t * 1e9) << " ns: z_leak " << fmt(zl) << " z_double " << fmt(zd) << "; ";
                 }
                 return Measurement{worst, d.str()};
               }});
  c.push_back({{"lindblad_trace_drift", "max |tr rho - 1| over the default scan"}, [](Context& x) {
                 double v = 0.0;
                 for (const auto& p : x.scan()) v = std::max(v, p.invariants.max_trace_drift);
                 return Measurement{v, ""};
               }});
  c.push_back({{"lindblad_hermiticity", "max ||rho - rho^dagger|| over the default scan"}, [](Context& x) {
                 double v = 0.0;
                 for (const auto& p : x.scan()) v = std::max(v, p.invariants.max_hermiticity_defect);
                 return Measurement{v, ""};
               }});
  c.push_back({{"lindblad_min_eigenvalue", "smallest eigenvalue of rho over the default scan"}, [](Context& x) {
                 double v = 0.0;
                 for (const auto& p : x.scan()) v = std::min(v, p.invariants.min_eigenvalue);
                 return Measurement{v, ""};
               }});
  c.push_back({{"free_decay_relative_error", "undriven excited population against exp(-Gamma t)"}, [](Context& x) {
                 const auto r = free_decay_check(x.cfg.scheme, x.cfg.pulse.tolerances);
                 return Measurement{r.max_relative_error, "over " + fmt(r.horizon * 1e9) + " ns"};
               }});
  c.push_back({{"collection_sigma_quadrature", "|analytic - cone quadrature| for sigma emission at the lens NA"},
               [](Context& x) {
                 const double a = collection_efficiency_analytic(x.cfg.optics.na, Polarization::sigma_plus);
                 const double n = collection_efficiency_numeric(x.cfg.optics.na, Polarization::sigma_plus);
                 return Measurement{std::abs(a - n), "analytic " + fmt(a)};
               }});
  c.push_back({{"collection_pi_quadrature", "|analytic - cone quadrature| for pi emission at the lens NA"},
               [](Context& x) {
                 const double a = collection_efficiency_analytic(x.cfg.optics.na, Polarization::pi);
                 const double n = collection_efficiency_numeric(x.cfg.optics.na, Polarization::pi);
                 return Measurement{std::abs(a - n), "analytic " + fmt(a)};
               }});
  c.push_back({{"collection_hemisphere", "collected fraction as NA -> 1"}, [](Context&) {
                 const double s = collection_efficiency_analytic(1.0, Polarization::sigma_plus);
                 const double p = collection_efficiency_analytic(1.0, Polarization::pi);
                 return Measurement{std::abs(s - 0.5) > std::abs(p - 0.5) ? s : p, "sigma " + fmt(s) + ", pi " + fmt(p)};
               }});
  c.push_back({{"eta_cc", "thermally averaged collection and fiber coupling efficiency"}, [](Context& x) {
                 const auto& t = x.thermal();
                 return Measurement{t.eta_cc, "convergence estimate " + fmt(t.convergence_estimate)};
               }});
  c.push_back({{"eta_cc_convergence", "|eta(doubled order) - eta| / convergence estimate"}, [](Context& x) {
                 const auto& t = x.thermal();
                 ThermalOptions o = x.cfg.thermal;
                 o.radial_order *= 2;
                 o.axial_order *= 2;
                 o.hermite_order *= 2;
                 o.samples *= 2;
                 o.tolerance = 0.0;
                 const auto d = thermal_average(x.cfg.optics, x.cfg.trap, collected_channels(), o);
                 const double change = std::abs(d.eta_cc - t.eta_cc);
                 return Measurement{change / t.convergence_estimate,
                                    "change " + fmt(change) + ", estimate " + fmt(t.convergence_estimate)};
               }});
  c.push_back({{"success_probability", "P_s from eta_cc and the loss chain"}, [](Context& x) {
                 const Losses l = x.cfg.losses.value_or(Losses{});
                 return Measurement{success_probability(x.thermal().eta_cc, l), ""};
               }});
  c.push_back({{"g2_estimator", "g2(0) from counts consistent with the quoted value"}, [](Context&) {
                 const auto e = g2_from_counts(4564, 4564, 2, 1000000);
                 return Measurement{e.value, "error " + fmt(e.error)};
               }});
  c.push_back({{"fidelity_arithmetic", "(1 + XX - YY + ZZ) / 4 for (0.909, 0.919, 0.939)"}, [](Context&) {
                 CorrelationSet s{0.909, 0.039, 0.919, 0.032, 0.939, 0.034};
                 const auto e = bell_fidelity(s);
                 return Measurement{e.value, "error " + fmt(e.error)};
               }});
  c.push_back({{"fidelity_lower_bound", "lower bound from populations with 3.05% Z and 3.85% Y errors"}, [](Context&) {
                 const double ez = 0.0305, ey = 0.0385;
                 DiagonalPopulations z{(1 - ez) / 2, (1 - ez) / 2, ez / 2, ez / 2};
                 DiagonalPopulations y{(1 - ey) / 2, (1 - ey) / 2, ey / 2, ey / 2};
                 return Measurement{fidelity_lower_bound(z, y).value, ""};
               }});
  c.push_back({{"dephasing_coherence", "C = exp(-t_pre/tau_sens) exp(-t_post/tau_map)"}, [](Context& x) {
                 const auto d = dephasing_error(x.cfg.coherence);
                 return Measurement{d.coherence, "error " + fmt(d.coherence_err)};
               }});
  c.push_back({{"dephasing_error", "(1 - C) / 2"}, [](Context& x) {
                 const auto d = dephasing_error(x.cfg.coherence);
                 return Measurement{d.entry.value, "error " + fmt(d.entry.uncertainty)};
               }});
  c.push_back({{"inferred_fidelity", "F + state-measurement error"}, [](Context&) {
                 return Measurement{inferred_fidelity(0.942, 0.016, 0.02, 0.02).value, ""};
               }});
  c.push_back({{"inferred_fidelity_error", "quadrature uncertainty of the inferred fidelity"}, [](Context&) {
                 return Measurement{inferred_fidelity(0.942, 0.016, 0.02, 0.02).error, ""};
               }});
  c.push_back({{"budget_consistency", "gap between budget prediction and F = 0.942(16), in combined sigma"},
               [](Context&) {
                 const auto r = compose_budget(default_budget_entries(), 0.942, 0.016);
                 const double gap =
                     std::max({0.0, r.measured_fidelity - r.predicted_fidelity, r.predicted_fidelity_low - r.measured_fidelity});
                 return Measurement{gap / r.combined_uncertainty, r.diagnostic};
               }});
  const char* rt_names[] = {"roundtrip_histogram", "roundtrip_ramsey_130us", "roundtrip_ramsey_14ms",
                            "roundtrip_rabi_109kHz", "roundtrip_rabi_2497Hz", "roundtrip_parity"};
  const char* rt_desc[] = {"arrival histogram, tau = 30.4 ns", "Ramsey, T2* = 130 us", "Ramsey, T2* = 14 ms",
                           "Rabi, 2pi x 109 kHz", "Rabi, 2pi x 2.497 kHz", "parity, contrast 0.94"};
  for (std::size_t k = 0; k < 6; ++k)
    c.push_back({{rt_names[k], std::string("fraction of 200 synthetic fits recovering truth: ") + rt_desc[k]},
                 [k](Context& x) { return round_trip_measure(x, k); }});
  return c;
}

// Returns (passed, expectation text); throws InputError for a malformed entry.
std::pair<bool, std::string> compare(double v, const json& g) {
  if (!g.is_object()) throw InputError("golden entry is not an object");
  if (g.contains("value")) {
    if (!g.at("value").is_number() || !g.contains("tolerance") || !g.at("tolerance").is_number())
      throw InputError("golden entry needs numeric value and tolerance");
    const double e = g.at("value").get<double>(), tol = g.at("tolerance").get<double>();
    if (!(tol >= 0.0)) throw InputError("golden tolerance must be non-negative");
    return {std::abs(v - e) <= tol, fmt(e) + " +- " + fmt(tol)};
  }
  if (!g.contains("min") && !g.contains("max")) throw InputError("golden entry needs value/tolerance or min/max");
  double lo = -INFINITY, hi = INFINITY;
  if (g.contains("min")) {
    if (!g.at("min").is_number()) throw InputError("golden min must be a number");
    lo = g.at("min").get<double>();
  }
  if (g.contains("max")) {
    if (!g.at("max").is_number()) throw InputError("golden max must be a number");
    hi = g.at("max").get<double>();
  }
  return {v >= lo && v <= hi, "[" + fmt(lo) + ", " + fmt(hi) + "]"};
}

}  // namespace

bool Manifest::all_passed() const { return failures() == 0; }

std::size_t Manifest::failures() const {
  std::size_t n = 0;
  for (const auto& c : checks) n += !c.passed;
  return n;
}

json Manifest::to_json() const {
  json list = json::array();
  for (const auto& c : checks)
    list.push_back({{"name", c.name},
                    {"description", c.description},
                    {"passed", c.passed},
                    {"measured", c.measured},
                    {"expected", c.expected},
                    {"detail", c.detail}});
  return {{"checks", list}, {"total", checks.size()}, {"failures", failures()}, {"passed", all_passed()}};
}

std::vector<CheckInfo> golden_checks() {
  std::vector<CheckInfo> out;
  for (const auto& c : make_checks()) out.push_back(c.info);
  return out;
}

Manifest reproduce_all(const RunConfig& config, const json& golden,
                       const std::function<void(const CheckResult&)>& on_result) {
  Context ctx(config);
  const json* entries = nullptr;
  if (golden.is_object() && golden.contains("checks") && golden.at("checks").is_object()) entries = &golden.at("checks");
  Manifest m;
  for (const auto& chk : make_checks()) {
    CheckResult r;
    r.name = chk.info.name;
    r.description = chk.info.description;
    if (!entries || !entries->contains(r.name)) {
      r.detail = "no golden entry for this check";
    } else {
      const json& g = entries->at(r.name);
      try {
        compare(0.0, g);  // validate before spending time on the computation
        const Measurement meas = chk.run(ctx);
        r.measured = meas.value;
        r.detail = meas.detail;
        auto [ok, expected] = compare(meas.value, g);
        r.passed = ok && std::isfinite(meas.value);
        r.expected = expected;
      } catch (const InputError& e) {
        r.detail = std::string("golden or input error: ") + e.what();
      } catch (const std::exception& e) {
        r.detail = std::string("computation failed: ") + e.what();
      }
    }
    if (on_result) on_result(r);
    m.checks.push_back(std::move(r));
  }
  return m;
}

FreeDecayResult free_decay_check(const SchemeConfig& scheme_config, const Tolerances& tolerances) {
  SchemeConfig sc = scheme_config;
  sc.flagged = false;
  const LevelScheme scheme = build_level_scheme(sc);
  const std::size_t e = scheme.index(Manifold::excited_f2, 0);
  const double gamma = scheme.total_decay_rates().at(e);
  const double horizon = 5.0 / gamma;
  PulseProfile off;
  off.omega_peak = 0.0;
  off.width = horizon;
  off.center = 0.5 * horizon;
  off.t_start = 0.0;
  off.t_end = horizon;
  EvolveOptions opts;
  for (int k = 1; k < 50; ++k) opts.sample_times.push_back(horizon * k / 50.0);
  const auto traj = evolve(scheme, off, DensityMatrix::pure(scheme.size(), e), 0.0, horizon, tolerances, opts);
  FreeDecayResult r;
  r.horizon = horizon;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double expected = std::exp(-scheme.gamma() * traj.times[i]);
    r.max_relative_error = std::max(r.max_relative_error, std::abs(traj.population(e, i) - expected) / expected);
  }
  return r;
}

RoundTripStats round_trip_histogram(std::size_t datasets, std::uint64_t seed) {
  RoundTripStats s{"histogram"};
  const double tau = 30.4, t0 = 20.0, sigma = 2.0;
  const std::size_t events = 10000;
  for (std::size_t k = 0; k < datasets; ++k) {
    std::mt19937_64 rng(seed + k);
    ++s.datasets;
    try {
      const auto f = fit_arrival_histogram(synthesize_histogram(tau, t0, sigma, events, 1.0, 0.0, 250.0, rng));
      s.recovered += within(f.tau, tau, f.tau_err) && within(f.t0, t0, f.t0_err) && within(f.sigma, sigma, f.sigma_err);
    } catch (const std::exception&) {
      ++s.failed;
    }
  }
  return s;
}

RoundTripStats round_trip_ramsey(double t2, std::size_t datasets, std::uint64_t seed) {
  RoundTripStats s{"ramsey"};
  const double amp = 0.45, phase = 0.3;
  // About 2.6 fringes per T2* and a window of roughly 2-3 T2*.
  const double freq = t2 < 1e-3 ? 20e3 : 500.0;
  const double window = t2 < 1e-3 ? 400e-6 : 30e-3;
  const auto times = linspace(0.0, window, 41);
  for (std::size_t k = 0; k < datasets; ++k) {
    std::mt19937_64 rng(seed + k);
    ++s.datasets;
    try {
      const auto f = fit_ramsey(synthesize_ramsey(amp, t2, freq, phase, times, 100, Envelope::exponential, rng));
      s.recovered += within(f.gamma, 1.0 / t2, f.gamma_err) && within(f.amplitude, amp, f.amplitude_err) &&
                     within(f.frequency, freq, f.frequency_err) && std::abs(angle_diff(f.phase, phase)) <= 3 * f.phase_err;
    } catch (const std::exception&) {
      ++s.failed;
    }
  }
  return s;
}

RoundTripStats round_trip_rabi(double omega, std::size_t datasets, std::uint64_t seed) {
  RoundTripStats s{"rabi"};
  const double amp = 0.48, offset = 0.5;
  // About 3.3 oscillations in the window.
  const double window = 3.3 * kTwoPi / omega;
  const auto times = linspace(0.0, window, 61);
  for (std::size_t k = 0; k < datasets; ++k) {
    std::mt19937_64 rng(seed + k);
    ++s.datasets;
    try {
      const auto f = fit_rabi(synthesize_rabi(omega, amp, offset, times, 100, rng));
      s.recovered += within(f.omega, omega, f.omega_err) && within(f.amplitude, amp, f.amplitude_err) &&
                     within(f.offset, offset, f.offset_err);
    } catch (const std::exception&) {
      ++s.failed;
    }
  }
  return s;
}

RoundTripStats round_trip_parity(std::size_t datasets, std::uint64_t seed) {
  RoundTripStats s{"parity"};
  const double a = 0.5, b = 0.47, phi = 0.4;
  const auto angles = linspace(0.0, 90.0, 13);
  for (std::size_t k = 0; k < datasets; ++k) {
    std::mt19937_64 rng(seed + k);
    ++s.datasets;
    try {
      const auto fit = fit_parity(synthesize_parity(Basis::Z, a, b, phi, angles, 100, rng));
      const auto corr = correlation_from_fit(fit);
      const auto& e = fit.even;
      s.recovered += within(e.offset(), a, std::sqrt(e.covariance(0, 0))) && within(e.amplitude(), b, e.amplitude_err()) &&
                     std::abs(angle_diff(e.phase(), phi)) <= 3 * e.phase_err() &&
                     within(corr.value, 2.0 * (a + b) - 1.0, corr.error);
    } catch (const std::exception&) {
      ++s.failed;
    }
  }
  return s;
}

}  // namespace atomsim
