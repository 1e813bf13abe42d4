#include <doctest.h>

#include <limits>
#include <set>

#include "atomsim/errors.hpp"
#include "atomsim/level_scheme.hpp"

using namespace atomsim;
using doctest::Approx;

TEST_CASE("default scheme has 29 levels and 21 decaying sublevels") {
  const auto s = build_level_scheme(SchemeConfig{});
  CHECK(s.size() == 29);
  std::set<std::size_t> sources;
  for (const auto& d : s.decays()) sources.insert(d.from);
  CHECK(sources.size() == 21);
  for (auto i : sources) CHECK(s.level(i).excited());
  const auto rates = s.total_decay_rates();
  for (auto i : sources) CHECK(rates[i] == Approx(s.gamma()).epsilon(1e-12));
  CHECK(rates[s.sink()] == 0.0);
}

TEST_CASE("flagged scheme adds 7 ground and 5 excited copies") {
  const auto s = build_flagged_scheme(SchemeConfig{});
  CHECK(s.size() == 41);
  int g = 0, e = 0;
  for (const auto& l : s.levels()) {
    if (!l.decayed) continue;
    if (l.manifold == Manifold::ground_f3) ++g;
    if (l.manifold == Manifold::excited_f2) ++e;
  }
  CHECK(g == 7);
  CHECK(e == 5);
  // Unflagged excited levels decay into the flagged ground manifold.
  const auto e2 = s.index(Manifold::excited_f2, 0);
  for (const auto& d : s.decays())
    if (d.from == e2) CHECK((d.to == s.sink() || s.level(d.to).decayed));
}

TEST_CASE("driven level sits at the detuning") {
  SchemeConfig c;
  auto s = build_level_scheme(c);
  CHECK(s.level(s.index(Manifold::excited_f2, 0)).energy_offset == 0.0);
  c.detuning_rad_per_s = 1e6;
  s = build_level_scheme(c);
  CHECK(s.level(s.index(Manifold::excited_f2, 0)).energy_offset == 1e6);
  CHECK(s.level(s.index(Manifold::excited_f3, 0)).energy_offset == Approx(1e6 + c.offset_f3_rad_per_s));
}

TEST_CASE("pi light couples m to m and skips the vanishing 3-3 line") {
  const auto s = build_level_scheme(SchemeConfig{});
  for (const auto& c : s.couplings_for(0)) {
    CHECK(s.level(c.ground).two_m == s.level(c.excited).two_m);
    CHECK(c.factor != 0.0);
  }
  bool has_f3_m0 = false;
  for (const auto& c : s.couplings_for(0))
    if (c.excited == s.index(Manifold::excited_f3, 0) && c.ground == s.index(Manifold::ground_f3, 0)) has_f3_m0 = true;
  CHECK_FALSE(has_f3_m0);
}

TEST_CASE("labels and extra offsets") {
  SchemeConfig c;
  c.flagged = true;
  c.extra_offsets = {{"g3_m-1", 5.0}};
  const auto s = build_level_scheme(c);
  const auto labels = s.labels();
  CHECK(labels.front() == "g3_m-3");
  CHECK(labels[28] == "sink");
  CHECK(s.level(s.index(Manifold::ground_f3, -1)).energy_offset == 5.0);
  CHECK(s.level(s.index(Manifold::ground_f3, 1, true)).label() == "g3d_m+1");
  c.extra_offsets = {{"nonexistent", 1.0}};
  CHECK_THROWS_AS(build_level_scheme(c), InputError);
}

TEST_CASE("invalid scheme configuration") {
  SchemeConfig c;
  c.gamma_rad_per_s = -1.0;
  CHECK_THROWS_AS(build_level_scheme(c), InputError);
  c = SchemeConfig{};
  c.offset_f4_rad_per_s = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(build_level_scheme(c), InputError);
}
