#include "atomsim/angular.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>

#include "atomsim/errors.hpp"

namespace atomsim {
namespace {

constexpr int kMaxFactorial = 120;

// 80-bit accumulation; n! for n <= 25 is exact, above that the relative
// error stays near 1e-19.
const std::array<long double, kMaxFactorial + 1>& factorials() {
  static const auto table = [] {
    std::array<long double, kMaxFactorial + 1> t{};
    t[0] = 1.0L;
    for (int n = 1; n <= kMaxFactorial; ++n) t[n] = t[n - 1] * static_cast<long double>(n);
    return t;
  }();
  return table;
}

long double fact(int n) {
  if (n < 0 || n > kMaxFactorial) throw InputError("factorial argument out of range");
  return factorials()[n];
}

bool even(int n) { return (n % 2) == 0; }
long double sign(int n) { return even(n) ? 1.0L : -1.0L; }

// Triangle coefficient with doubled arguments; caller checks the triangle.
long double delta(int a, int b, int c) {
  return std::sqrt(fact((a + b - c) / 2) * fact((a - b + c) / 2) * fact((-a + b + c) / 2) /
                   fact((a + b + c) / 2 + 1));
}

}  // namespace

std::string half_integer_string(int twice) {
  if (even(twice)) return std::to_string(twice / 2);
  return std::to_string(twice) + "/2";
}

std::string to_string(AngularMomentum j) { return half_integer_string(j.two_j); }

bool triangle(int a, int b, int c) {
  if (a < 0 || b < 0 || c < 0) return false;
  if (!even(a + b + c)) return false;
  return c <= a + b && c >= std::abs(a - b);
}

double wigner3j(int j1, int j2, int j3, int m1, int m2, int m3) {
  if (m1 + m2 + m3 != 0) return 0.0;
  if (!triangle(j1, j2, j3)) return 0.0;
  if (!AngularMomentum{j1}.admits(m1) || !AngularMomentum{j2}.admits(m2) || !AngularMomentum{j3}.admits(m3))
    return 0.0;

  // Integer labels of the Racah sum.
  const int a = (j1 + j2 - j3) / 2;
  const int b = (j1 - m1) / 2;
  const int c = (j2 + m2) / 2;
  const int d = (j3 - j2 + m1) / 2;
  const int e = (j3 - j1 - m2) / 2;
  const int k_min = std::max({0, -d, -e});
  const int k_max = std::min({a, b, c});

  long double sum = 0.0L;
  for (int k = k_min; k <= k_max; ++k) {
    sum += sign(k) / (fact(k) * fact(a - k) * fact(b - k) * fact(c - k) * fact(d + k) * fact(e + k));
  }
  const long double norm = delta(j1, j2, j3) *
                           std::sqrt(fact((j1 + m1) / 2) * fact((j1 - m1) / 2) * fact((j2 + m2) / 2) *
                                     fact((j2 - m2) / 2) * fact((j3 + m3) / 2) * fact((j3 - m3) / 2));
  return static_cast<double>(sign((j1 - j2 - m3) / 2) * norm * sum);
}

double wigner6j(int j1, int j2, int j3, int j4, int j5, int j6) {
  if (!triangle(j1, j2, j3) || !triangle(j1, j5, j6) || !triangle(j4, j2, j6) || !triangle(j4, j5, j3))
    return 0.0;

  const int a1 = (j1 + j2 + j3) / 2;
  const int a2 = (j1 + j5 + j6) / 2;
  const int a3 = (j4 + j2 + j6) / 2;
  const int a4 = (j4 + j5 + j3) / 2;
  const int b1 = (j1 + j2 + j4 + j5) / 2;
  const int b2 = (j2 + j3 + j5 + j6) / 2;
  const int b3 = (j3 + j1 + j6 + j4) / 2;
  const int t_min = std::max({a1, a2, a3, a4});
  const int t_max = std::min({b1, b2, b3});

  long double sum = 0.0L;
  for (int t = t_min; t <= t_max; ++t) {
    sum += sign(t) * fact(t + 1) /
           (fact(t - a1) * fact(t - a2) * fact(t - a3) * fact(t - a4) * fact(b1 - t) * fact(b2 - t) *
            fact(b3 - t));
  }
  const long double pre = delta(j1, j2, j3) * delta(j1, j5, j6) * delta(j4, j2, j6) * delta(j4, j5, j3);
  return static_cast<double>(pre * sum);
}

double clebsch_gordan_coupling(int j1, int m1, int j2, int m2, int j, int m) {
  // <j1 m1; j2 m2 | j m> = (-1)^(j1-j2+m) sqrt(2j+1) (j1 j2 j; m1 m2 -m)
  const double three_j = wigner3j(j1, j2, j, m1, m2, -m);
  if (three_j == 0.0) return 0.0;
  const double phase = even((j1 - j2 + m) / 2) ? 1.0 : -1.0;
  return phase * std::sqrt(static_cast<double>(j + 1)) * three_j;
}

double clebsch_gordan(AngularMomentum f_prime, int two_m_prime, int q, AngularMomentum f, int two_m) {
  if (q < -1 || q > 1) throw InputError("photon spherical component must be -1, 0 or +1");
  return clebsch_gordan_coupling(f_prime.two_j, two_m_prime, 2, 2 * q, f.two_j, two_m);
}

double branching_ratio(AngularMomentum f, AngularMomentum f_prime, const DipoleLine& line) {
  if (std::abs(f.two_j - f_prime.two_j) > 2) {
    throw InputError("dipole decay requires |f - f'| <= 1 (got f=" + to_string(f) + ", f'=" +
                     to_string(f_prime) + ")");
  }
  const double six_j = wigner6j(line.j_ground.two_j, line.nuclear_spin.two_j, f.two_j, f_prime.two_j, 2,
                                line.j_excited.two_j);
  return (line.j_excited.two_j + 1) * (f.two_j + 1) * six_j * six_j;
}

double decay_rate(AngularMomentum f, int two_m, AngularMomentum f_prime, int two_m_prime, double gamma_total,
                  const DipoleLine& line) {
  if (!(gamma_total > 0.0)) throw InputError("total decay rate must be positive");
  if (std::abs(f.two_j - f_prime.two_j) > 2) return 0.0;
  const int two_q = two_m_prime - two_m;
  if (two_q < -2 || two_q > 2) return 0.0;
  const double c = clebsch_gordan_coupling(f.two_j, two_m, 2, two_q, f_prime.two_j, two_m_prime);
  if (c == 0.0) return 0.0;
  return gamma_total * branching_ratio(f, f_prime, line) * c * c;
}

}  // namespace atomsim
