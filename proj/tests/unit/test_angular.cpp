#include <doctest.h>

#include <cmath>

#include "atomsim/angular.hpp"
#include "atomsim/errors.hpp"

using namespace atomsim;
using doctest::Approx;

// Reference values below were generated with sympy.physics.wigner.

TEST_CASE("wigner 3j against reference values") {
  CHECK(wigner3j(2, 2, 2, 2, 0, -2) == Approx(-0.40824829046386302).epsilon(1e-14));
  CHECK(wigner3j(3, 2, 5, 1, 2, -3) == Approx(0.31622776601683793).epsilon(1e-14));
  CHECK(wigner3j(6, 2, 4, 0, 0, 0) == Approx(-0.29277002188455995).epsilon(1e-14));
  CHECK(wigner3j(20, 20, 20, 4, -6, 2) == Approx(0.028565958372935295).epsilon(1e-12));
}

TEST_CASE("wigner 3j selection rules") {
  CHECK(wigner3j(8, 6, 4, 0, 0, 0) == 0.0);   // odd sum with all m = 0
  CHECK(wigner3j(2, 2, 2, 2, 2, -2) == 0.0);  // m's do not sum to 0
  CHECK(wigner3j(2, 2, 8, 0, 0, 0) == 0.0);   // triangle
  CHECK(wigner3j(2, 2, 2, 4, -2, -2) == 0.0); // |m| > j
  CHECK(wigner3j(3, 2, 3, 0, 0, 0) == 0.0);   // parity of 2m vs 2j
}

TEST_CASE("wigner 6j against reference values") {
  CHECK(wigner6j(1, 7, 6, 8, 2, 3) == Approx(-0.12198750911856665).epsilon(1e-14));
  CHECK(wigner6j(1, 7, 6, 6, 2, 3) == Approx(0.16366341767699429).epsilon(1e-14));
  CHECK(wigner6j(1, 7, 6, 4, 2, 3) == Approx(-0.18898223650461361).epsilon(1e-14));
  CHECK(wigner6j(2, 4, 6, 4, 2, 4) == Approx(0.043643578047198476).epsilon(1e-14));
  CHECK(wigner6j(2, 2, 8, 2, 2, 2) == 0.0);
}

TEST_CASE("clebsch-gordan against reference values") {
  const auto f2 = AngularMomentum::integer(2), f3 = AngularMomentum::integer(3), f4 = AngularMomentum::integer(4);
  CHECK(clebsch_gordan(f3, 0, 0, f2, 0) == Approx(-0.65465367070797714).epsilon(1e-14));
  CHECK(clebsch_gordan(f2, 0, 0, f3, 0) == Approx(0.77459666924148338).epsilon(1e-14));
  CHECK(clebsch_gordan(f3, -2, 1, f3, 0) == Approx(-0.70710678118654752).epsilon(1e-14));
  CHECK(clebsch_gordan(f3, 4, 1, f4, 6) == Approx(0.86602540378443865).epsilon(1e-14));
  CHECK(clebsch_gordan(f4, 8, -1, f4, 6) == Approx(0.44721359549995794).epsilon(1e-14));
  CHECK(clebsch_gordan(f3, 0, 1, f3, 0) == 0.0);  // m + q != M
  CHECK(clebsch_gordan(f3, 0, 0, f3, 0) == 0.0);  // <3 0; 1 0 | 3 0> vanishes
}

TEST_CASE("clebsch-gordan completeness") {
  // sum_{m1, m2} <j1 m1; j2 m2 | J M>^2 = 1 for every allowed (J, M).
  for (int two_j1 : {2, 3, 6, 7}) {
    for (int two_j = std::abs(two_j1 - 2); two_j <= two_j1 + 2; two_j += 2) {
      for (int two_m = -two_j; two_m <= two_j; two_m += 2) {
        double s = 0.0;
        for (int two_m1 = -two_j1; two_m1 <= two_j1; two_m1 += 2)
          for (int two_m2 = -2; two_m2 <= 2; two_m2 += 2) {
            const double c = clebsch_gordan_coupling(two_j1, two_m1, 2, two_m2, two_j, two_m);
            s += c * c;
          }
        CHECK(s == Approx(1.0).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("hyperfine branching ratios") {
  const auto f = [](int x) { return AngularMomentum::integer(x); };
  CHECK(branching_ratio(f(3), f(2)) == Approx(1.0).epsilon(1e-14));
  CHECK(branching_ratio(f(3), f(3)) == Approx(0.75).epsilon(1e-14));
  CHECK(branching_ratio(f(4), f(3)) == Approx(0.25).epsilon(1e-14));
  CHECK(branching_ratio(f(3), f(4)) == Approx(5.0 / 12.0).epsilon(1e-14));
  CHECK(branching_ratio(f(4), f(4)) == Approx(7.0 / 12.0).epsilon(1e-14));
  CHECK_THROWS_AS(branching_ratio(f(4), f(2)), InputError);
}

TEST_CASE("each excited sublevel decays at the total rate") {
  const double gamma = 3.3e7;
  for (int fp : {2, 3, 4}) {
    const auto Fp = AngularMomentum::integer(fp);
    for (int two_mp = -2 * fp; two_mp <= 2 * fp; two_mp += 2) {
      double total = 0.0;
      for (int fg : {3, 4}) {
        const auto Fg = AngularMomentum::integer(fg);
        if (std::abs(fg - fp) > 1) continue;
        for (int two_m = -2 * fg; two_m <= 2 * fg; two_m += 2) total += decay_rate(Fg, two_m, Fp, two_mp, gamma);
      }
      CHECK(total == Approx(gamma).epsilon(1e-12));
    }
  }
}

TEST_CASE("half-integer formatting") {
  CHECK(to_string(AngularMomentum::doubled(7)) == "7/2");
  CHECK(to_string(AngularMomentum::integer(3)) == "3");
  CHECK(AngularMomentum::doubled(3).admits(-1));
  CHECK_FALSE(AngularMomentum::doubled(3).admits(0));
}
