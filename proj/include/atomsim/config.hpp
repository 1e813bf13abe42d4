#pragma once

// Run configuration: one JSON document, SI quantities in keys suffixed with
// their unit. Unknown keys are rejected so typos do not silently fall back
// to defaults.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "atomsim/budget.hpp"
#include "atomsim/collection.hpp"
#include "atomsim/pulsescan.hpp"

namespace atomsim {

struct PulseSettings {
  DurationConvention convention = DurationConvention::fwhm;
  double window_sigmas = 8.0;
  int q = 0;
  double drive_scale = 1.0;
  Tolerances tolerances;
  std::vector<double> t_pi_grid;  // s
};

struct UnravelingSettings {
  std::size_t trajectories = 100000;
  std::vector<double> t_pi;  // s
};

struct SweepSettings {
  std::vector<double> r_eff;         // m
  std::vector<double> temperatures;  // K
};

struct RunConfig {
  SchemeConfig scheme;
  PulseSettings pulse;
  UnravelingSettings unraveling;
  OpticalSystem optics;
  TrapGeometry trap;
  ThermalOptions thermal;
  std::optional<Losses> losses;
  SweepSettings sweep;
  CoherenceInputs coherence;
  std::vector<std::uint64_t> seeds{1};
  std::string output_dir = "out";
  std::size_t threads = 0;

  // Scan settings for the flagged scheme.
  ScanConfig scan_config() const;
  void validate() const;
};

// Experiment defaults: D2 line, NA 0.55 optics, 200 uK trap at 5 uK, 2..60 ns grid.
RunConfig default_run_config();

// Missing keys keep their defaults. Throws InputError naming the offending
// key, or the line and column for malformed JSON.
RunConfig parse_run_config(const nlohmann::json& j, const RunConfig& base = default_run_config());
RunConfig load_run_config(const std::string& path);
nlohmann::json parse_json_file(const std::string& path);

// Fully resolved configuration, in the same schema as the input.
nlohmann::json to_json(const RunConfig& config);

std::vector<BudgetEntry> parse_budget_entries(const nlohmann::json& j);
nlohmann::json to_json(const BudgetEntry& e);

// "2,4,8" or "2:60:2" (start:stop:step, inclusive). Values in the caller's unit.
std::vector<double> parse_grid(const std::string& text);

}  // namespace atomsim
