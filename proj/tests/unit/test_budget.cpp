#include <doctest.h>

#include <algorithm>
#include <random>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "atomsim/budget.hpp"
#include "atomsim/errors.hpp"

using namespace atomsim;
using doctest::Approx;

TEST_CASE("dephasing error at the operating point") {
  const auto d = dephasing_error(CoherenceInputs{});
  CHECK(d.coherence == Approx(0.939).epsilon(1e-3));
  CHECK(d.coherence_err == Approx(0.0028).epsilon(0.05));
  CHECK(d.entry.value == Approx(0.0305).epsilon(0.01));
  CHECK(d.entry.uncertainty == Approx(0.0014).epsilon(0.05));
  CHECK(d.entry.kind == EntryKind::modeled);
}

TEST_CASE("dephasing limits") {
  CoherenceInputs c;
  c.t_pre = 0.0;
  c.t_post = 0.0;
  CHECK(dephasing_error(c).entry.value == 0.0);
  c = CoherenceInputs{};
  c.tau_sens = std::numeric_limits<double>::infinity();
  c.tau_map = std::numeric_limits<double>::infinity();
  CHECK(dephasing_error(c).entry.value == 0.0);
  c = CoherenceInputs{};
  c.tau_map = -1.0;
  CHECK_THROWS_AS(dephasing_error(c), InputError);
}

TEST_CASE("dephasing error is monotone in each input") {
  const CoherenceInputs base;
  const double e0 = dephasing_error(base).entry.value;
  auto bumped = [&](double CoherenceInputs::*field, double factor) {
    CoherenceInputs c = base;
    c.*field *= factor;
    return dephasing_error(c).entry.value;
  };
  CHECK(bumped(&CoherenceInputs::t_pre, 1.01) > e0);
  CHECK(bumped(&CoherenceInputs::t_post, 1.01) > e0);
  CHECK(bumped(&CoherenceInputs::tau_sens, 1.01) < e0);
  CHECK(bumped(&CoherenceInputs::tau_map, 1.01) < e0);
}

TEST_CASE("default budget composition") {
  const auto r = compose_budget(default_budget_entries(), 0.942, 0.016);
  CHECK(r.central_total == Approx(0.0765).epsilon(1e-9));
  CHECK(r.bound_total == Approx(0.0091).epsilon(1e-9));
  CHECK(r.consistent);
  CHECK(r.verdict == "pass");
  std::ostringstream table;
  write_budget_table(table, r);
  const auto text = table.str();
  CHECK(text.find("atom dephasing") < text.find("atomic state measurement"));
  CHECK(text.find("waveplate rotation error") < text.find("excitation polarization"));
  CHECK(text.find("verdict: pass") != std::string::npos);
}

TEST_CASE("budget edge cases") {
  CHECK(compose_budget({{"only", 0.05, 0.0, EntryKind::measured}}).central_total == 0.05);
  CHECK(compose_budget({{"a", 0.0, 0.0, EntryKind::measured}, {"b", 0.0, 0.0, EntryKind::bound}}).predicted_fidelity == 1.0);
  const auto over = compose_budget({{"a", 0.7, 0.0, EntryKind::measured}, {"b", 0.5, 0.0, EntryKind::modeled}}, 0.5, 0.1);
  CHECK(over.verdict == "inconsistent");
  CHECK_FALSE(over.diagnostic.empty());
  CHECK_THROWS_AS(compose_budget({}), InputError);
  CHECK_THROWS_AS(compose_budget({{"neg", -0.1, 0.0, EntryKind::measured}}), InputError);
  // A measurement far from the prediction is flagged.
  CHECK(compose_budget(default_budget_entries(), 0.80, 0.01).verdict == "inconsistent");
}

TEST_CASE("budget total is permutation invariant") {
  auto entries = default_budget_entries();
  const auto ref = compose_budget(entries);
  std::mt19937_64 rng(4);
  for (int k = 0; k < 20; ++k) {
    std::shuffle(entries.begin(), entries.end(), rng);
    const auto r = compose_budget(entries);
    CHECK(r.central_total == Approx(ref.central_total).epsilon(1e-15));
    CHECK(r.bound_total == Approx(ref.bound_total).epsilon(1e-15));
    CHECK(r.central_uncertainty == Approx(ref.central_uncertainty).epsilon(1e-15));
  }
}

TEST_CASE("inferred fidelity") {
  const auto e = inferred_fidelity(0.942, 0.016, 0.02, 0.02);
  CHECK(e.value == Approx(0.962).epsilon(1e-12));
  CHECK(e.error == Approx(0.0256).epsilon(1e-3));
  CHECK(inferred_fidelity(0.942, 0.016, 0.0, 0.0).value == 0.942);
  const auto c = inferred_fidelity(1.0, 0.0, 0.02, 0.0);
  CHECK(c.value == 1.0);
  CHECK(c.clipped);
  CHECK_FALSE(c.warning.empty());
}

TEST_CASE("polarization and detection bounds") {
  const auto p = polarization_error_bound(1e4, 1.0);
  CHECK(p.kind == EntryKind::bound);
  CHECK(p.value == Approx(1e-4 + std::pow(std::sin(std::numbers::pi / 180.0), 2)).epsilon(1e-12));
  CHECK(polarization_error_bound(std::numeric_limits<double>::infinity(), 0.0).value == 0.0);
  CHECK(polarization_error_bound(1e4, 90.0).value == Approx(1.0).epsilon(1e-3));
  CHECK_THROWS_AS(polarization_error_bound(0.5, 1.0), InputError);
  // 50 Hz dark counts over a 400 ns gate: 2e-5 background against a 0.6% herald rate.
  CHECK(detection_noise_bound(400, 50, 0.006).value == Approx(2e-5 / 0.006).epsilon(1e-12));
  CHECK(detection_noise_bound(400, 0, 0.006).value == 0.0);
  CHECK(detection_noise_bound(400, 50, 1.0).value == Approx(2e-5).epsilon(1e-12));
}
