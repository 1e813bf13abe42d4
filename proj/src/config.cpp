#include "atomsim/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "atomsim/errors.hpp"

namespace atomsim {

using nlohmann::json;

namespace {

constexpr double kAmu = 1.66053906660e-27;

// Reads the keys of one JSON object and rejects anything it did not consume.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw InputError(where() + " must be an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  void number(const std::string& key, double& out, double scale = 1.0) {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_number()) throw InputError(where(key) + " must be a number");
    out = v.get<double>() * scale;
  }

  template <class Int>
  void integer(const std::string& key, Int& out) {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_number_integer()) throw InputError(where(key) + " must be an integer");
    const auto x = v.get<long long>();
    if (std::is_unsigned_v<Int> && x < 0) throw InputError(where(key) + " must be non-negative");
    out = static_cast<Int>(x);
  }

  void boolean(const std::string& key, bool& out) {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_boolean()) throw InputError(where(key) + " must be true or false");
    out = v.get<bool>();
  }

  void string(const std::string& key, std::string& out) {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_string()) throw InputError(where(key) + " must be a string");
    out = v.get<std::string>();
  }

  void numbers(const std::string& key, std::vector<double>& out, double scale = 1.0) {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_array()) throw InputError(where(key) + " must be an array of numbers");
    out.clear();
    for (const auto& x : v) {
      if (!x.is_number()) throw InputError(where(key) + " must be an array of numbers");
      out.push_back(x.get<double>() * scale);
    }
  }

  const json* object(const std::string& key) {
    if (!has(key)) return nullptr;
    return &j_.at(key);
  }

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw InputError("unknown config key '" + child(it.key()) + "'");
  }

 private:
  std::string where() const { return path_.empty() ? "config" : "'" + path_ + "'"; }
  std::string where(const std::string& key) const { return "'" + child(key) + "'"; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string to_string(DurationConvention c) { return c == DurationConvention::fwhm ? "fwhm" : "sigma"; }

DurationConvention convention_from_string(const std::string& s) {
  if (s == "fwhm") return DurationConvention::fwhm;
  if (s == "sigma") return DurationConvention::sigma;
  throw InputError("pulse.duration_convention must be 'fwhm' or 'sigma', got '" + s + "'");
}

std::string to_string(ThermalMethod m) {
  switch (m) {
    case ThermalMethod::axisymmetric: return "axisymmetric";
    case ThermalMethod::gauss_hermite: return "gauss_hermite";
    case ThermalMethod::monte_carlo: return "monte_carlo";
  }
  return "?";
}

ThermalMethod thermal_method_from_string(const std::string& s) {
  if (s == "axisymmetric") return ThermalMethod::axisymmetric;
  if (s == "gauss_hermite") return ThermalMethod::gauss_hermite;
  if (s == "monte_carlo") return ThermalMethod::monte_carlo;
  throw InputError("thermal.method must be axisymmetric, gauss_hermite or monte_carlo, got '" + s + "'");
}

json scaled(const std::vector<double>& v, double scale) {
  json a = json::array();
  for (double x : v) a.push_back(x / scale);
  return a;
}

}  // namespace

ScanConfig RunConfig::scan_config() const {
  ScanConfig c;
  c.scheme = scheme;
  c.scheme.flagged = true;
  c.tolerances = pulse.tolerances;
  c.convention = pulse.convention;
  c.window_sigmas = pulse.window_sigmas;
  c.q = pulse.q;
  c.drive_scale = pulse.drive_scale;
  return c;
}

void RunConfig::validate() const {
  scheme.validate();
  scan_config().validate();
  for (double t : pulse.t_pi_grid)
    if (!(t > 0.0) || !std::isfinite(t)) throw InputError("pulse.t_pi_grid_ns entries must be positive");
  for (double t : unraveling.t_pi)
    if (!(t > 0.0)) throw InputError("unraveling.t_pi_ns entries must be positive");
  optics.validate();
  trap.validate();
  if (thermal.radial_order < 2 || thermal.axial_order < 2 || thermal.hermite_order < 2)
    throw InputError("thermal quadrature orders must be at least 2");
  if (losses) {
    for (double f : {losses->transmission, losses->detection, losses->pumping, losses->excitation})
      if (!(f >= 0.0 && f <= 1.0)) throw InputError("loss factors must lie in [0, 1]");
  }
  for (double r : sweep.r_eff)
    if (!(r > 0.0)) throw InputError("sweep.r_eff_mm entries must be positive");
  for (double t : sweep.temperatures)
    if (!(t >= 0.0)) throw InputError("sweep.temperature_uK entries must be non-negative");
  coherence.validate();
  if (seeds.empty()) throw InputError("seeds must not be empty");
}

RunConfig default_run_config() {
  RunConfig c;
  for (int t = 2; t <= 60; t += 2) c.pulse.t_pi_grid.push_back(t * 1e-9);
  c.unraveling.t_pi = {8e-9, 12e-9, 30e-9};
  c.losses = Losses{};
  return c;
}

RunConfig parse_run_config(const json& j, const RunConfig& base) {
  RunConfig c = base;
  ObjectReader top(j, "");

  if (const json* s = top.object("scheme")) {
    ObjectReader r(*s, "scheme");
    r.number("gamma_rad_per_s", c.scheme.gamma_rad_per_s);
    r.number("detuning_rad_per_s", c.scheme.detuning_rad_per_s);
    r.number("offset_f3_rad_per_s", c.scheme.offset_f3_rad_per_s);
    r.number("offset_f4_rad_per_s", c.scheme.offset_f4_rad_per_s);
    r.boolean("flagged", c.scheme.flagged);
    if (const json* extra = r.object("extra_offsets_rad_per_s")) {
      if (!extra->is_object()) throw InputError("'scheme.extra_offsets_rad_per_s' must be an object");
      c.scheme.extra_offsets.clear();
      for (auto it = extra->begin(); it != extra->end(); ++it) {
        if (!it->is_number()) throw InputError("'scheme.extra_offsets_rad_per_s." + it.key() + "' must be a number");
        c.scheme.extra_offsets.emplace_back(it.key(), it->get<double>());
      }
    }
    r.finish();
  }

  if (const json* p = top.object("pulse")) {
    ObjectReader r(*p, "pulse");
    std::string conv = to_string(c.pulse.convention);
    r.string("duration_convention", conv);
    c.pulse.convention = convention_from_string(conv);
    r.number("window_sigmas", c.pulse.window_sigmas);
    r.integer("q", c.pulse.q);
    r.number("drive_scale", c.pulse.drive_scale);
    r.number("rtol", c.pulse.tolerances.rtol);
    r.number("atol", c.pulse.tolerances.atol);
    r.number("invariant_limit", c.pulse.tolerances.invariant_limit);
    r.numbers("t_pi_grid_ns", c.pulse.t_pi_grid, 1e-9);
    r.finish();
  }

  if (const json* u = top.object("unraveling")) {
    ObjectReader r(*u, "unraveling");
    r.integer("trajectories", c.unraveling.trajectories);
    r.numbers("t_pi_ns", c.unraveling.t_pi, 1e-9);
    r.finish();
  }

  if (const json* o = top.object("optics")) {
    ObjectReader r(*o, "optics");
    r.number("na", c.optics.na);
    r.number("focal_length_mm", c.optics.focal_length, 1e-3);
    r.number("pupil_mode_waist_mm", c.optics.pupil_mode_waist, 1e-3);
    r.number("wavelength_nm", c.optics.wavelength, 1e-9);
    r.integer("grid", c.optics.grid);
    r.number("min_samples_per_fringe", c.optics.min_samples_per_fringe);
    r.finish();
  }

  if (const json* t = top.object("trap")) {
    ObjectReader r(*t, "trap");
    r.number("trap_depth_uK", c.trap.trap_depth, 1e-6);
    r.number("trap_waist_um", c.trap.trap_waist, 1e-6);
    r.number("trap_wavelength_nm", c.trap.trap_wavelength, 1e-9);
    r.number("atom_temperature_uK", c.trap.atom_temperature, 1e-6);
    r.number("atom_mass_amu", c.trap.atom_mass, kAmu);
    r.number("input_waist_mm", c.trap.input_waist, 1e-3);
    r.finish();
  }

  if (const json* t = top.object("thermal")) {
    ObjectReader r(*t, "thermal");
    std::string method = to_string(c.thermal.method);
    r.string("method", method);
    c.thermal.method = thermal_method_from_string(method);
    r.integer("radial_order", c.thermal.radial_order);
    r.integer("axial_order", c.thermal.axial_order);
    r.integer("hermite_order", c.thermal.hermite_order);
    r.integer("samples", c.thermal.samples);
    r.number("tolerance", c.thermal.tolerance);
    r.finish();
  }

  if (top.has("losses")) {
    const json& l = j.at("losses");
    if (l.is_null()) {
      c.losses.reset();
    } else {
      Losses v = c.losses.value_or(Losses{});
      ObjectReader r(l, "losses");
      r.number("transmission", v.transmission);
      r.number("detection", v.detection);
      r.number("pumping", v.pumping);
      r.number("excitation", v.excitation);
      r.finish();
      c.losses = v;
    }
  }

  if (const json* s = top.object("sweep")) {
    ObjectReader r(*s, "sweep");
    r.numbers("r_eff_mm", c.sweep.r_eff, 1e-3);
    r.numbers("temperature_uK", c.sweep.temperatures, 1e-6);
    r.finish();
  }

  if (const json* d = top.object("coherence")) {
    ObjectReader r(*d, "coherence");
    r.number("t_pre_us", c.coherence.t_pre, 1e-6);
    r.number("tau_sens_us", c.coherence.tau_sens, 1e-6);
    r.number("tau_sens_err_us", c.coherence.tau_sens_err, 1e-6);
    r.number("t_post_us", c.coherence.t_post, 1e-6);
    r.number("tau_map_us", c.coherence.tau_map, 1e-6);
    r.number("tau_map_err_us", c.coherence.tau_map_err, 1e-6);
    r.finish();
  }

  if (top.has("seeds")) {
    const json& s = j.at("seeds");
    if (!s.is_array()) throw InputError("'seeds' must be an array of non-negative integers");
    c.seeds.clear();
    for (const auto& x : s) {
      if (!x.is_number_integer() || x.get<long long>() < 0)
        throw InputError("'seeds' must be an array of non-negative integers");
      c.seeds.push_back(x.get<std::uint64_t>());
    }
  }
  top.string("output_dir", c.output_dir);
  top.integer("threads", c.threads);
  top.finish();
  c.validate();
  return c;
}

json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    // Byte offset to line/column for the diagnostic.
    std::ifstream again(path);
    std::string text((std::istreambuf_iterator<char>(again)), std::istreambuf_iterator<char>());
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw InputError(path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON");
  }
}

RunConfig load_run_config(const std::string& path) {
  const json j = parse_json_file(path);
  try {
    return parse_run_config(j);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

json to_json(const RunConfig& c) {
  json j;
  json extra = json::object();
  for (const auto& [label, v] : c.scheme.extra_offsets) extra[label] = v;
  j["scheme"] = {{"gamma_rad_per_s", c.scheme.gamma_rad_per_s},
                 {"detuning_rad_per_s", c.scheme.detuning_rad_per_s},
                 {"offset_f3_rad_per_s", c.scheme.offset_f3_rad_per_s},
                 {"offset_f4_rad_per_s", c.scheme.offset_f4_rad_per_s},
                 {"flagged", c.scheme.flagged},
                 {"extra_offsets_rad_per_s", extra}};
  j["pulse"] = {{"duration_convention", to_string(c.pulse.convention)},
                {"window_sigmas", c.pulse.window_sigmas},
                {"q", c.pulse.q},
                {"drive_scale", c.pulse.drive_scale},
                {"rtol", c.pulse.tolerances.rtol},
                {"atol", c.pulse.tolerances.atol},
                {"invariant_limit", c.pulse.tolerances.invariant_limit},
                {"t_pi_grid_ns", scaled(c.pulse.t_pi_grid, 1e-9)}};
  j["unraveling"] = {{"trajectories", c.unraveling.trajectories}, {"t_pi_ns", scaled(c.unraveling.t_pi, 1e-9)}};
  j["optics"] = {{"na", c.optics.na},
                 {"focal_length_mm", c.optics.focal_length / 1e-3},
                 {"pupil_mode_waist_mm", c.optics.pupil_mode_waist / 1e-3},
                 {"wavelength_nm", c.optics.wavelength / 1e-9},
                 {"grid", c.optics.grid},
                 {"min_samples_per_fringe", c.optics.min_samples_per_fringe}};
  j["trap"] = {{"trap_depth_uK", c.trap.trap_depth / 1e-6},
               {"trap_waist_um", c.trap.trap_waist / 1e-6},
               {"trap_wavelength_nm", c.trap.trap_wavelength / 1e-9},
               {"atom_temperature_uK", c.trap.atom_temperature / 1e-6},
               {"atom_mass_amu", c.trap.atom_mass / kAmu},
               {"input_waist_mm", c.trap.input_waist / 1e-3}};
  j["thermal"] = {{"method", to_string(c.thermal.method)},
                  {"radial_order", c.thermal.radial_order},
                  {"axial_order", c.thermal.axial_order},
                  {"hermite_order", c.thermal.hermite_order},
                  {"samples", c.thermal.samples},
                  {"tolerance", c.thermal.tolerance}};
  if (c.losses)
    j["losses"] = {{"transmission", c.losses->transmission},
                   {"detection", c.losses->detection},
                   {"pumping", c.losses->pumping},
                   {"excitation", c.losses->excitation}};
  else
    j["losses"] = nullptr;
  j["sweep"] = {{"r_eff_mm", scaled(c.sweep.r_eff, 1e-3)}, {"temperature_uK", scaled(c.sweep.temperatures, 1e-6)}};
  j["coherence"] = {{"t_pre_us", c.coherence.t_pre / 1e-6},
                    {"tau_sens_us", c.coherence.tau_sens / 1e-6},
                    {"tau_sens_err_us", c.coherence.tau_sens_err / 1e-6},
                    {"t_post_us", c.coherence.t_post / 1e-6},
                    {"tau_map_us", c.coherence.tau_map / 1e-6},
                    {"tau_map_err_us", c.coherence.tau_map_err / 1e-6}};
  j["seeds"] = c.seeds;
  j["output_dir"] = c.output_dir;
  j["threads"] = c.threads;
  return j;
}

std::vector<BudgetEntry> parse_budget_entries(const json& j) {
  const json* list = &j;
  if (j.is_object()) {
    if (!j.contains("entries")) throw InputError("budget file needs an 'entries' array");
    list = &j.at("entries");
  }
  if (!list->is_array()) throw InputError("budget entries must be an array");
  std::vector<BudgetEntry> out;
  std::size_t k = 0;
  for (const auto& e : *list) {
    ObjectReader r(e, "entries[" + std::to_string(k++) + "]");
    BudgetEntry b;
    if (!r.has("name") || !r.has("value")) throw InputError("budget entry " + std::to_string(k - 1) + " needs name and value");
    r.string("name", b.name);
    r.number("value", b.value);
    r.number("uncertainty", b.uncertainty);
    std::string kind = "measured";
    r.string("kind", kind);
    b.kind = entry_kind_from_string(kind);
    r.finish();
    if (!(b.value >= 0.0)) throw InputError("budget entry '" + b.name + "' must have value >= 0");
    if (!(b.uncertainty >= 0.0)) throw InputError("budget entry '" + b.name + "' must have uncertainty >= 0");
    out.push_back(b);
  }
  if (out.empty()) throw InputError("budget has no entries");
  return out;
}

json to_json(const BudgetEntry& e) {
  return {{"name", e.name}, {"value", e.value}, {"uncertainty", e.uncertainty}, {"kind", to_string(e.kind)}};
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  auto num = [&](const std::string& s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != s.size() || !std::isfinite(v)) throw InputError("bad grid value '" + s + "'");
    return v;
  };
  if (text.find(':') != std::string::npos) {
    std::stringstream ss(text);
    std::string a, b, c;
    std::getline(ss, a, ':');
    std::getline(ss, b, ':');
    std::getline(ss, c);
    const double lo = num(a), hi = num(b), step = num(c);
    if (!(step > 0.0) || hi < lo) throw InputError("grid range needs start <= stop and step > 0");
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < n; ++i) out.push_back(lo + static_cast<double>(i) * step);
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(num(item));
  return out;
}

}  // namespace atomsim
