#pragma once

// Golden-number reproduction: each named check computes one quantity from
// the run configuration and compares it with the expectation stored in the
// golden file ({"value", "tolerance"} or {"min", "max"}).

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "atomsim/config.hpp"

namespace atomsim {

struct CheckInfo {
  std::string name;
  std::string description;
};

struct CheckResult {
  std::string name;
  std::string description;
  bool passed = false;
  double measured = 0.0;
  std::string expected;
  std::string detail;
};

struct Manifest {
  std::vector<CheckResult> checks;
  bool all_passed() const;
  std::size_t failures() const;
  nlohmann::json to_json() const;
};

std::vector<CheckInfo> golden_checks();

// Runs every check; a missing or malformed golden entry fails that check.
Manifest reproduce_all(const RunConfig& config, const nlohmann::json& golden,
                       const std::function<void(const CheckResult&)>& on_result = {});

// ---- building blocks shared with the acceptance suite ----

struct FreeDecayResult {
  double max_relative_error = 0.0;  // |P(t) - exp(-Gamma t)| / exp(-Gamma t)
  double horizon = 0.0;             // s
};

// Undriven f'=2 population compared with exp(-Gamma t) over five lifetimes.
FreeDecayResult free_decay_check(const SchemeConfig& scheme, const Tolerances& tolerances);

struct RoundTripStats {
  std::string name;
  std::size_t datasets = 0;
  std::size_t recovered = 0;  // every true parameter within 3 standard errors
  std::size_t failed = 0;     // the fit threw
  double fraction() const { return datasets ? static_cast<double>(recovered) / static_cast<double>(datasets) : 0.0; }
};

// Synthetic datasets at the experiment's statistics, one seed per dataset.
RoundTripStats round_trip_histogram(std::size_t datasets, std::uint64_t seed);
RoundTripStats round_trip_ramsey(double t2_s, std::size_t datasets, std::uint64_t seed);
RoundTripStats round_trip_rabi(double omega, std::size_t datasets, std::uint64_t seed);
RoundTripStats round_trip_parity(std::size_t datasets, std::uint64_t seed);

}  // namespace atomsim
