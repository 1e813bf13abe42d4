#pragma once

// Angular-momentum algebra with doubled quantum numbers so that
// half-integer spins stay exact in selection-rule arithmetic.

#include <string>

namespace atomsim {

struct AngularMomentum {
  int two_j = 0;

  static constexpr AngularMomentum integer(int j) { return {2 * j}; }
  static constexpr AngularMomentum doubled(int two_j) { return {two_j}; }

  double value() const { return 0.5 * two_j; }
  bool valid() const { return two_j >= 0; }
  // |2m| <= 2j and 2m has the parity of 2j.
  bool admits(int two_m) const {
    return valid() && two_m <= two_j && -two_m <= two_j && ((two_j - two_m) % 2 == 0);
  }
  int multiplicity() const { return two_j + 1; }

  friend constexpr bool operator==(AngularMomentum, AngularMomentum) = default;
};

std::string to_string(AngularMomentum j);
std::string half_integer_string(int twice);

bool triangle(int two_a, int two_b, int two_c);

// Wigner 3j symbol (j1 j2 j3; m1 m2 m3). All arguments are doubled.
// Evaluated by the Racah sum with extended-precision factorials.
// Returns 0 whenever a selection rule fails.
double wigner3j(int two_j1, int two_j2, int two_j3, int two_m1, int two_m2, int two_m3);

// Wigner 6j symbol {j1 j2 j3; j4 j5 j6}, doubled arguments.
double wigner6j(int two_j1, int two_j2, int two_j3, int two_j4, int two_j5, int two_j6);

// <j1 m1; j2 m2 | J M>, doubled arguments.
double clebsch_gordan_coupling(int two_j1, int two_m1, int two_j2, int two_m2, int two_j, int two_m);

// <f' m'; 1 q | f m> for a photon spherical component q in {-1, 0, +1}.
// f_prime/f are doubled; m_prime/m are doubled; q is the plain integer.
double clebsch_gordan(AngularMomentum f_prime, int two_m_prime, int q, AngularMomentum f, int two_m);

// Quantum numbers of a fine-structure dipole line with hyperfine structure.
struct DipoleLine {
  AngularMomentum j_ground = AngularMomentum::doubled(1);   // 6s1/2
  AngularMomentum j_excited = AngularMomentum::doubled(3);  // 6p3/2
  AngularMomentum nuclear_spin = AngularMomentum::doubled(7);
};

inline constexpr DipoleLine kCesiumD2{};

// Fraction of spontaneous decay from excited hyperfine manifold f' into
// ground manifold f: (2j'+1)(2f+1){j I f; f' 1 j'}^2.
// Throws InputError when |f - f'| > 1.
double branching_ratio(AngularMomentum f, AngularMomentum f_prime, const DipoleLine& line = kCesiumD2);

// Rate of the |f', m'> -> |f, m> channel. The Zeeman factor is the
// normalized coefficient <f m; 1 q | f' m'>^2 with q = m' - m, so the sum
// over all (f, m) channels of one excited sublevel equals gamma_total.
double decay_rate(AngularMomentum f, int two_m, AngularMomentum f_prime, int two_m_prime,
                  double gamma_total, const DipoleLine& line = kCesiumD2);

}  // namespace atomsim
