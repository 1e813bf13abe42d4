// atomsim command-line driver.
//
// Exit codes: 0 success, 1 computational failure, 2 usage or schema error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <utility>
#include <numbers>
#include <sstream>

#include "atomsim/analysis.hpp"
#include "atomsim/budget.hpp"
#include "atomsim/collection.hpp"
#include "atomsim/config.hpp"
#include "atomsim/csv.hpp"
#include "atomsim/errors.hpp"
#include "atomsim/pulsescan.hpp"
#include "atomsim/reproduce.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace atomsim;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

struct Globals {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> grid;
  bool list = false;
};

std::string data_file(const char* name) { return std::string(ATOMSIM_DATA_DIR) + "/" + name; }

RunConfig resolve_config(const Globals& g) {
  RunConfig c = g.config_path.empty() ? load_run_config(data_file("defaults.json")) : load_run_config(g.config_path);
  if (!g.out_dir.empty()) c.output_dir = g.out_dir;
  if (g.seed) c.seeds = {*g.seed};
  return c;
}

fs::path output_dir(const RunConfig& c) {
  fs::path p(c.output_dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw InputError("cannot create output directory '" + c.output_dir + "': " + ec.message());
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw SolverError("write failed for '" + path.string() + "'");
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json estimate_json(const Estimate& e) {
  json j{{"value", e.value}, {"error", e.error}, {"clipped", e.clipped}};
  if (!e.warning.empty()) j["warning"] = e.warning;
  return j;
}

json residual_summary(const std::vector<double>& r) {
  double chi2 = 0.0, worst = 0.0;
  for (double x : r) {
    chi2 += x * x;
    worst = std::max(worst, std::abs(x));
  }
  return {{"count", r.size()}, {"sum_sq", chi2}, {"max_abs", worst}, {"values", r}};
}

json golden_entry(const json& golden, const std::string& name) {
  if (golden.contains("checks") && golden["checks"].contains(name)) return golden["checks"][name];
  return nullptr;
}

json judge(const json& g, double v) {
  if (g.is_null()) return {{"measured", v}, {"passed", nullptr}};
  bool ok;
  if (g.contains("value"))
    ok = std::abs(v - g["value"].get<double>()) <= g["tolerance"].get<double>();
  else
    ok = v >= g.value("min", -INFINITY) && v <= g.value("max", INFINITY);
  return {{"measured", v}, {"expected", g}, {"passed", ok}};
}

// ---------------------------------------------------------------- pulse-scan

int cmd_pulse_scan(const Globals& g, bool unravel) {
  RunConfig c = resolve_config(g);
  if (g.grid) {
    const auto ns = parse_grid(*g.grid);
    c.pulse.t_pi_grid.clear();
    for (double t : ns) c.pulse.t_pi_grid.push_back(t * 1e-9);
  }
  if (c.pulse.t_pi_grid.empty()) throw InputError("pulse-scan needs a non-empty t_pi grid");
  c.validate();
  const ScanConfig sc = c.scan_config();
  const auto points = scan_pulse_duration(c.pulse.t_pi_grid, sc, c.threads);
  const auto dir = output_dir(c);

  std::ostringstream csv;
  write_scan_csv(csv, points);
  write_text(dir / "pulse_scan.csv", csv.str());

  auto at = [&](double t) -> const ScanPoint* {
    for (const auto& p : points)
      if (std::abs(p.t_pi - t) < 1e-13) return &p;
    return nullptr;
  };
  const auto& best = points[argmin_total(points)];
  json golden = json::object();
  try {
    golden = parse_json_file(data_file("golden.json"));
  } catch (const InputError&) {
  }
  json summary;
  summary["optimum"] = {{"t_pi_ns", best.t_pi * 1e9},
                        {"total", best.total_error},
                        {"leakage", best.leakage_error},
                        {"double_excitation", best.double_excitation_error}};
  json checks = json::object();
  if (points.size() > 1) checks["pulse_optimum_ns"] = judge(golden_entry(golden, "pulse_optimum_ns"), best.t_pi * 1e9);
  for (double t : {12e-9, 30e-9}) {
    const ScanPoint* p = at(t);
    const std::string key = t < 20e-9 ? "12ns" : "30ns";
    if (p) {
      summary["at_" + key] = {{"total", p->total_error},
                              {"leakage", p->leakage_error},
                              {"double_excitation", p->double_excitation_error}};
      checks["pulse_total_" + key] = judge(golden_entry(golden, "pulse_total_" + key), p->total_error);
    }
  }
  InvariantReport inv;
  for (const auto& p : points) {
    inv.max_trace_drift = std::max(inv.max_trace_drift, p.invariants.max_trace_drift);
    inv.max_hermiticity_defect = std::max(inv.max_hermiticity_defect, p.invariants.max_hermiticity_defect);
    inv.min_eigenvalue = std::min(inv.min_eigenvalue, p.invariants.min_eigenvalue);
  }
  summary["invariants"] = {{"max_trace_drift", inv.max_trace_drift},
                           {"max_hermiticity_defect", inv.max_hermiticity_defect},
                           {"min_eigenvalue", inv.min_eigenvalue}};
  json rows = json::array();
  for (const auto& p : points)
    rows.push_back({{"t_pi_ns", p.t_pi * 1e9},
                    {"leakage", p.leakage_error},
                    {"double_excitation", p.double_excitation_error},
                    {"total", p.total_error},
                    {"bell_channel", p.bell_channel},
                    {"never_excited", p.never_excited}});
  summary["points"] = rows;
  if (unravel) {
    json mc = json::array();
    std::uint64_t seed = c.seeds.front();
    for (double t : c.unraveling.t_pi) {
      const auto u = unravel_trajectories(t, sc, c.unraveling.trajectories, seed++, c.threads);
      mc.push_back({{"t_pi_ns", t * 1e9},
                    {"trajectories", u.trajectories},
                    {"leakage", u.leakage},
                    {"leakage_stderr", u.leakage_stderr},
                    {"double_excitation", u.double_excitation},
                    {"double_excitation_stderr", u.double_excitation_stderr}});
    }
    summary["unraveling"] = mc;
  }
  summary["golden"] = checks;
  summary["config"] = to_json(c);
  write_json(dir / "pulse_scan.json", summary);

  std::printf("optimum t_pi = %.3g ns, total error %.5f\n", best.t_pi * 1e9, best.total_error);
  for (auto it = checks.begin(); it != checks.end(); ++it) {
    const auto& v = it.value()["passed"];
    std::printf("%-18s %s (measured %.6g)\n", it.key().c_str(),
                v.is_null() ? "n/a" : (v.get<bool>() ? "PASS" : "FAIL"), it.value()["measured"].get<double>());
  }
  std::printf("wrote %s\n", (dir / "pulse_scan.csv").string().c_str());
  return kOk;
}

// ---------------------------------------------------------------- collection

int cmd_collection(const Globals& g) {
  RunConfig c = resolve_config(g);
  const auto dir = output_dir(c);
  const auto channels = collected_channels();
  const auto result = thermal_average(c.optics, c.trap, channels, c.thermal);
  const auto freq = trap_frequencies(c.trap);

  json j;
  j["eta_cc"] = result.eta_cc;
  j["convergence_estimate"] = result.convergence_estimate;
  j["evaluations"] = result.evaluations;
  json overlaps = json::object();
  for (const auto& [pol, v] : result.mean_overlap) overlaps[to_string(pol)] = v;
  j["mean_fiber_overlap"] = overlaps;
  j["eta_col"] = {{"sigma", collection_efficiency_analytic(c.optics.na, Polarization::sigma_plus)},
                  {"pi", collection_efficiency_analytic(c.optics.na, Polarization::pi)}};
  j["trap"] = {{"omega_r_rad_per_s", freq.omega_r},
               {"omega_z_rad_per_s", freq.omega_z},
               {"sigma_r_nm", result.widths.sigma_r * 1e9},
               {"sigma_z_nm", result.widths.sigma_z * 1e9}};
  j["aperture_radius_mm"] = c.optics.aperture_radius() * 1e3;
  if (c.losses) j["success_probability"] = success_probability(result.eta_cc, *c.losses);
  if (!c.sweep.r_eff.empty() || !c.sweep.temperatures.empty()) {
    auto r_list = c.sweep.r_eff.empty() ? std::vector<double>{c.optics.aperture_radius()} : c.sweep.r_eff;
    auto t_list = c.sweep.temperatures.empty() ? std::vector<double>{c.trap.atom_temperature} : c.sweep.temperatures;
    const auto rows = efficiency_vs_aperture(c.optics, c.trap, r_list, t_list, c.thermal);
    std::ostringstream csv;
    csv << "r_eff_mm,temperature_uK,eta_cc\n";
    csv.precision(10);
    for (const auto& r : rows) csv << r.r_eff * 1e3 << ',' << r.temperature * 1e6 << ',' << r.eta_cc << '\n';
    write_text(dir / "collection_sweep.csv", csv.str());
    json sweep = json::array();
    for (const auto& r : rows)
      sweep.push_back({{"r_eff_mm", r.r_eff * 1e3},
                       {"temperature_uK", r.temperature * 1e6},
                       {"eta_cc", r.eta_cc},
                       {"convergence_estimate", r.convergence_estimate}});
    j["sweep"] = sweep;
  }
  j["config"] = to_json(c);
  write_json(dir / "collection.json", j);
  std::printf("eta_cc = %.6f (convergence estimate %.2e)\n", result.eta_cc, result.convergence_estimate);
  if (c.losses) std::printf("P_s    = %.6f\n", j["success_probability"].get<double>());
  return kOk;
}

// ---------------------------------------------------------------- analyze

struct AnalyzeArgs {
  std::vector<std::string> inputs;
  std::string correlations;
  std::int64_t window_start_ns = 0;
  std::int64_t window_end_ns = 400;
  std::int64_t attempts = 0;
  std::string envelope = "exponential";
  bool free_period = false;
  std::string name = "report";
};

json sinusoid_json(const SinusoidFit& f) {
  return {{"offset", f.offset()},
          {"offset_err", std::sqrt(f.covariance(0, 0))},
          {"amplitude", f.amplitude()},
          {"amplitude_err", f.amplitude_err()},
          {"phase_rad", f.phase()},
          {"phase_err", f.phase_err()},
          {"period_deg", f.period()},
          {"visibility", f.visibility()},
          {"chi2", f.chi2},
          {"dof", f.dof}};
}

std::map<Basis, ParityDataset> load_parity_files(const std::vector<std::string>& files) {
  std::map<Basis, ParityDataset> all;
  for (const auto& f : files)
    for (auto& [b, d] : read_parity(f)) {
      if (all.count(b)) throw InputError(f + ": basis " + to_string(b) + " appears in more than one input");
      all[b] = d;
    }
  return all;
}

std::pair<json, CorrelationEstimate> analyze_parity_set(const ParityDataset& d, const ParityOptions& o) {
  const auto fit = fit_parity(d, o);
  const auto corr = correlation_from_fit(fit);
  json j{{"basis", to_string(d.basis)},
         {"even", sinusoid_json(fit.even)},
         {"odd", sinusoid_json(fit.odd)},
         {"correlation", corr.value},
         {"correlation_err", corr.error},
         {"theta_star_deg", corr.theta_star_deg}};
  return {j, corr};
}

DiagonalPopulations populations_from_json(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_object()) throw InputError(std::string("bound input needs an object '") + key + "'");
  const json& p = j.at(key);
  auto get = [&](const char* name) {
    if (!p.contains(name) || !p.at(name).is_number())
      throw InputError(std::string("'") + key + "." + name + "' must be a number");
    return p.at(name).get<double>();
  };
  auto opt = [&](const char* name) { return p.contains(name) ? p.at(name).get<double>() : 0.0; };
  DiagonalPopulations d;
  d.down_h = get("down_h");
  d.up_v = get("up_v");
  d.down_v = get("down_v");
  d.up_h = get("up_h");
  d.down_h_err = opt("down_h_err");
  d.up_v_err = opt("up_v_err");
  d.down_v_err = opt("down_v_err");
  d.up_h_err = opt("up_h_err");
  return d;
}

int cmd_analyze(const Globals& g, const std::string& what, const AnalyzeArgs& a) {
  RunConfig c = resolve_config(g);
  const auto dir = output_dir(c);
  json j;
  j["analysis"] = what;
  j["inputs"] = a.inputs;

  auto need_one = [&] {
    if (a.inputs.size() != 1) throw InputError("analyze " + what + " takes exactly one --input file");
    return a.inputs.front();
  };

  if (what == "g2") {
    const auto tags = read_time_tags(need_one());
    const auto counts = count_coincidences(tags, a.window_start_ns, a.window_end_ns);
    // Trials without any tag are absent from the file, so unless given the
    // attempt count is the highest trial id + 1.
    std::int64_t attempts = a.attempts;
    if (attempts <= 0)
      for (const auto& t : tags) attempts = std::max(attempts, t.trial_id + 1);
    const auto e = g2_from_counts(counts.n1, counts.n2, counts.n12, static_cast<std::uint64_t>(attempts));
    j["window_ns"] = {a.window_start_ns, a.window_end_ns};
    j["counts"] = {{"n1", counts.n1}, {"n2", counts.n2}, {"n12", counts.n12}, {"attempts", attempts}};
    j["g2"] = estimate_json(e);
    std::printf("g2(0) = %.4f +- %.4f\n", e.value, e.error);
  } else if (what == "histogram") {
    const auto f = fit_arrival_histogram(read_histogram(need_one()));
    j["fit"] = {{"amplitude", f.amplitude}, {"amplitude_err", f.amplitude_err}, {"t0_ns", f.t0},
                {"t0_err_ns", f.t0_err},    {"sigma_ns", f.sigma},            {"sigma_err_ns", f.sigma_err},
                {"tau_ns", f.tau},          {"tau_err_ns", f.tau_err},        {"chi2", f.fit.chi2},
                {"dof", f.fit.dof}};
    j["residuals"] = residual_summary(f.fit.residuals);
    std::printf("tau = %.3f +- %.3f ns\n", f.tau, f.tau_err);
  } else if (what == "parity") {
    ParityOptions o;
    o.free_period = a.free_period;
    json sets = json::array();
    for (const auto& [b, d] : load_parity_files(a.inputs)) {
      auto [pj, corr] = analyze_parity_set(d, o);
      sets.push_back(pj);
      std::printf("%s: correlation %.4f +- %.4f\n", to_string(b).c_str(), corr.value, corr.error);
    }
    j["bases"] = sets;
  } else if (what == "fidelity") {
    CorrelationSet cs;
    if (!a.correlations.empty()) {
      if (!a.inputs.empty()) throw InputError("give either parity --input files or --correlations, not both");
      const json cj = parse_json_file(a.correlations);
      auto get = [&](const char* k) {
        if (!cj.contains(k) || !cj.at(k).is_number()) throw InputError(a.correlations + ": '" + k + "' must be a number");
        return cj.at(k).get<double>();
      };
      cs = {get("xx"), get("xx_err"), get("minus_yy"), get("minus_yy_err"), get("zz"), get("zz_err")};
      j["inputs"] = {a.correlations};
    } else {
      if (a.inputs.empty()) throw InputError("analyze fidelity needs parity --input files or --correlations");
      const auto sets = load_parity_files(a.inputs);
      json per = json::array();
      std::map<Basis, CorrelationEstimate> corr;
      for (Basis b : {Basis::X, Basis::Y, Basis::Z}) {
        if (!sets.count(b)) throw InputError("fidelity needs X, Y and Z parity data; basis " + to_string(b) + " missing");
        auto [pj, ce] = analyze_parity_set(sets.at(b), ParityOptions{a.free_period, 90.0});
        per.push_back(pj);
        corr[b] = ce;
      }
      j["bases"] = per;
      cs = {corr[Basis::X].value, corr[Basis::X].error, corr[Basis::Y].value,
            corr[Basis::Y].error, corr[Basis::Z].value, corr[Basis::Z].error};
    }
    const auto f = bell_fidelity(cs);
    j["correlations"] = {{"xx", cs.xx}, {"xx_err", cs.xx_err}, {"minus_yy", cs.minus_yy},
                         {"minus_yy_err", cs.minus_yy_err}, {"zz", cs.zz}, {"zz_err", cs.zz_err}};
    j["fidelity"] = estimate_json(f);
    std::printf("F = %.5f +- %.5f%s\n", f.value, f.error, f.clipped ? " (clipped)" : "");
  } else if (what == "bound") {
    const json pj = parse_json_file(need_one());
    const auto e = fidelity_lower_bound(populations_from_json(pj, "z"), populations_from_json(pj, "y"));
    j["lower_bound"] = estimate_json(e);
    std::printf("F_low = %.5f +- %.5f\n", e.value, e.error);
  } else if (what == "ramsey") {
    Envelope env;
    if (a.envelope == "exponential")
      env = Envelope::exponential;
    else if (a.envelope == "gaussian")
      env = Envelope::gaussian;
    else
      throw InputError("--envelope must be exponential or gaussian");
    const auto f = fit_ramsey(read_time_series(need_one()), env);
    j["fit"] = {{"envelope", a.envelope},
                {"amplitude", f.amplitude},
                {"amplitude_err", f.amplitude_err},
                {"frequency_hz", f.frequency},
                {"frequency_err_hz", f.frequency_err},
                {"phase_rad", f.phase},
                {"phase_err", f.phase_err},
                {"gamma_per_s", f.gamma},
                {"gamma_err_per_s", f.gamma_err},
                {"chi2", f.chi2},
                {"dof", f.dof}};
    if (f.t2_is_lower_bound) {
      j["fit"]["t2_lower_bound_us"] = f.t2_lower_bound * 1e6;
      std::printf("T2* > %.4g us (decay not resolved in the window)\n", f.t2_lower_bound * 1e6);
    } else {
      j["fit"]["t2_us"] = f.t2 * 1e6;
      j["fit"]["t2_err_us"] = f.t2_err * 1e6;
      std::printf("T2* = %.4g +- %.2g us\n", f.t2 * 1e6, f.t2_err * 1e6);
    }
    j["residuals"] = residual_summary(f.residuals);
  } else if (what == "rabi") {
    const auto f = fit_rabi(read_time_series(need_one()));
    j["fit"] = {{"omega_rad_per_s", f.omega},
                {"omega_err_rad_per_s", f.omega_err},
                {"frequency_hz", f.omega / (2.0 * std::numbers::pi)},
                {"amplitude", f.amplitude},
                {"amplitude_err", f.amplitude_err},
                {"offset", f.offset},
                {"offset_err", f.offset_err},
                {"chi2", f.chi2},
                {"dof", f.dof}};
    j["residuals"] = residual_summary(f.residuals);
    std::printf("Omega = 2pi x %.5g +- %.2g Hz\n", f.omega / (2.0 * std::numbers::pi), f.omega_err / (2.0 * std::numbers::pi));
  } else {
    throw InputError("unknown analysis '" + what + "'");
  }
  j["config"] = to_json(c);
  write_json(dir / ("analyze_" + what + ".json"), j);
  return kOk;
}

// ---------------------------------------------------------------- budget

int cmd_budget(const Globals& g, const std::string& entries_path, std::optional<double> fidelity, double fidelity_err) {
  RunConfig c = resolve_config(g);
  const std::string path = entries_path.empty() ? data_file("budget_entries.json") : entries_path;
  std::vector<BudgetEntry> entries;
  try {
    entries = parse_budget_entries(parse_json_file(path));
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
  const auto report = fidelity ? compose_budget(entries, *fidelity, fidelity_err) : compose_budget(entries);
  write_budget_table(std::cout, report);
  const auto dephasing = dephasing_error(c.coherence);
  json j;
  json rows = json::array();
  for (const auto& e : report.entries) rows.push_back(to_json(e));
  j["entries"] = rows;
  j["central_total"] = report.central_total;
  j["central_uncertainty"] = report.central_uncertainty;
  j["bound_total"] = report.bound_total;
  j["predicted_fidelity"] = report.predicted_fidelity;
  j["predicted_fidelity_low"] = report.predicted_fidelity_low;
  if (report.has_measurement) {
    j["measured_fidelity"] = report.measured_fidelity;
    j["measured_uncertainty"] = report.measured_uncertainty;
    j["combined_uncertainty"] = report.combined_uncertainty;
    const auto inferred = inferred_fidelity(report.measured_fidelity, report.measured_uncertainty, 0.02, 0.02);
    j["inferred_fidelity"] = estimate_json(inferred);
  }
  j["verdict"] = report.verdict;
  j["diagnostic"] = report.diagnostic;
  j["dephasing_from_coherence"] = {{"coherence", dephasing.coherence},
                                   {"coherence_err", dephasing.coherence_err},
                                   {"epsilon", dephasing.entry.value},
                                   {"epsilon_err", dephasing.entry.uncertainty}};
  j["entries_file"] = path;
  j["config"] = to_json(c);
  write_json(output_dir(c) / "budget.json", j);
  return kOk;
}

// ---------------------------------------------------------------- reproduce-all

int cmd_reproduce_all(const Globals& g, const std::string& golden_path) {
  if (g.list) {
    for (const auto& c : golden_checks()) std::printf("%-28s %s\n", c.name.c_str(), c.description.c_str());
    return kOk;
  }
  RunConfig c = resolve_config(g);
  const std::string path = golden_path.empty() ? data_file("golden.json") : golden_path;
  json golden;
  try {
    golden = parse_json_file(path);
  } catch (const InputError& e) {
    // Unreadable golden data fails every check by name rather than aborting.
    std::fprintf(stderr, "warning: %s\n", e.what());
    golden = json::object();
  }
  const auto manifest = reproduce_all(c, golden, [](const CheckResult& r) {
    std::printf("%s %-28s measured %-12.6g expected %s%s%s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.measured,
                r.expected.empty() ? "-" : r.expected.c_str(), r.detail.empty() ? "" : "  ", r.detail.c_str());
    std::fflush(stdout);
  });
  json j = manifest.to_json();
  j["golden_file"] = path;
  j["config"] = to_json(c);
  write_json(output_dir(c) / "manifest.json", j);
  std::printf("%zu checks, %zu failed\n", manifest.checks.size(), manifest.failures());
  return manifest.all_passed() ? kOk : kFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"atomsim: excitation dynamics, photon collection and entanglement analysis"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config_path, "run configuration JSON (default: shipped defaults)");
  app.add_option("--out", g.out_dir, "output directory (overrides output_dir)");
  auto* seed_opt = app.add_option("--seed", seed, "seed for stochastic steps (overrides seeds)");
  app.set_help_all_flag("--help-all", "show help for all subcommands");

  bool unravel = false;
  std::string grid;
  auto* scan = app.add_subcommand("pulse-scan", "leakage and double-excitation error versus pulse duration");
  auto* grid_opt = scan->add_option("--grid", grid, "t_pi list in ns: '2,4,8' or start:stop:step");
  scan->add_flag("--unravel", unravel, "also run the trajectory oracle at the configured durations");
  scan->fallthrough();

  auto* coll = app.add_subcommand("collection", "thermally averaged collection and fiber coupling");
  coll->fallthrough();

  AnalyzeArgs aa;
  auto* analyze = app.add_subcommand("analyze", "estimators on measured or synthetic data");
  analyze->require_subcommand(1);
  analyze->fallthrough();
  std::map<std::string, CLI::App*> analyses;
  const std::pair<const char*, const char*> kinds[] = {
      {"g2", "zero-delay correlation from time tags"},
      {"histogram", "lifetime fit of an arrival-time histogram"},
      {"parity", "parity oscillation fit and correlation per basis"},
      {"ramsey", "Ramsey fringe fit: frequency and coherence time"},
      {"rabi", "Rabi oscillation fit"},
      {"fidelity", "Bell-state fidelity from X, Y, Z parity files"},
      {"bound", "fidelity lower bound from Z and Y populations"},
  };
  for (const auto& [name, help] : kinds) {
    auto* s = analyze->add_subcommand(name, help);
    s->add_option("--input,-i", aa.inputs, "input file(s)");
    s->fallthrough();
    analyses[name] = s;
  }
  analyses["g2"]->add_option("--window-start", aa.window_start_ns, "collection window start, ns");
  analyses["g2"]->add_option("--window-end", aa.window_end_ns, "collection window end, ns");
  analyses["g2"]->add_option("--attempts", aa.attempts, "number of heralding attempts (default: max trial_id + 1)");
  analyses["ramsey"]->add_option("--envelope", aa.envelope, "exponential or gaussian");
  analyses["parity"]->add_flag("--free-period", aa.free_period, "fit the fringe period");
  analyses["fidelity"]->add_flag("--free-period", aa.free_period, "fit the fringe period");
  analyses["fidelity"]->add_option("--correlations", aa.correlations, "CorrelationSet JSON instead of parity files");

  std::string entries;
  double fidelity = 0.0, fidelity_err = 0.0;
  auto* budget = app.add_subcommand("budget", "compose the infidelity budget");
  budget->add_option("--entries", entries, "budget entries JSON (default: shipped entries)");
  auto* f_opt = budget->add_option("--fidelity", fidelity, "measured fidelity for the consistency check");
  budget->add_option("--fidelity-err", fidelity_err, "its standard error");
  budget->fallthrough();

  std::string golden;
  auto* repro = app.add_subcommand("reproduce-all", "run every golden-number check");
  repro->add_option("--golden", golden, "golden expectations JSON");
  repro->add_flag("--list", g.list, "list the checks without running them");
  repro->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  if (*seed_opt) g.seed = seed;
  if (*grid_opt) g.grid = grid;

  try {
    if (*scan) return cmd_pulse_scan(g, unravel);
    if (*coll) return cmd_collection(g);
    if (*analyze)
      for (const auto& [name, s] : analyses)
        if (*s) return cmd_analyze(g, name, aa);
    if (*budget) return cmd_budget(g, entries, *f_opt ? std::optional<double>(fidelity) : std::nullopt, fidelity_err);
    if (*repro) return cmd_reproduce_all(g, golden);
  } catch (const InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failure: %s\n", e.what());
    return kFailure;
  }
  return kUsage;
}
