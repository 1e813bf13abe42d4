#pragma once

// Adaptive Dormand-Prince 5(4) integrator over complex Eigen vectors.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "atomsim/errors.hpp"

namespace atomsim {

struct OdeTolerances {
  double rtol = 1e-8;
  double atol = 1e-10;
  double initial_step = 0.0;  // 0 selects automatically
  double min_step_fraction = 1e-14;  // of the integration span
  std::size_t max_steps = 20'000'000;
};

struct OdeStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_calls = 0;
};

namespace detail {

// Max-norm rather than RMS: most density-matrix entries stay near zero and
// would otherwise dilute the error of the populated ones.
inline double scaled_max(const Eigen::VectorXcd& err, const Eigen::VectorXcd& y0, const Eigen::VectorXcd& y1,
                         const OdeTolerances& tol) {
  double worst = 0.0;
  const Eigen::Index n = err.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sc = tol.atol + tol.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    worst = std::max(worst, std::abs(err[i]) / sc);
  }
  return worst;
}

}  // namespace detail

// Integrates y' = rhs(t, y) from t0 to t1 in place. Every time in `stops`
// (sorted, inside (t0, t1]) is hit exactly and reported to on_stop(t, y).
// after_step(t, y) runs on every accepted step and may modify y, so the
// first stage is re-evaluated each step instead of reusing the last one.
template <class Rhs, class OnStop, class AfterStep>
OdeStats integrate_dopri5(Rhs&& rhs, Eigen::VectorXcd& y, double t0, double t1, const OdeTolerances& tol,
                          const std::vector<double>& stops, OnStop&& on_stop, AfterStep&& after_step) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;

  OdeStats stats;
  if (!(t1 > t0)) return stats;
  const double span = t1 - t0;
  const double h_min = tol.min_step_fraction * span;

  Eigen::VectorXcd k1, k2, k3, k4, k5, k6, k7, ytmp, ynew, err;
  k1 = rhs(t0, y);
  ++stats.rhs_calls;

  double h = tol.initial_step;
  if (!(h > 0.0)) {
    const double d0 = y.norm(), d1 = k1.norm();
    h = (d0 > 1e-5 && d1 > 1e-5) ? 0.01 * d0 / d1 : 1e-6 * span;
    h = std::min(h, 0.01 * span);
  }

  std::size_t next_stop = 0;
  while (next_stop < stops.size() && stops[next_stop] <= t0) ++next_stop;

  double t = t0;
  while (t < t1) {
    if (stats.accepted + stats.rejected >= tol.max_steps) {
      std::ostringstream msg;
      msg << "step budget exhausted at t=" << t;
      throw SolverError(msg.str());
    }
    const double target = next_stop < stops.size() ? std::min(stops[next_stop], t1) : t1;
    bool lands = false;
    if (t + h >= target || target - (t + h) < 1e-12 * span) {
      h = target - t;
      lands = true;
    }

    ytmp = y + h * a21 * k1;
    k2 = rhs(t + c2 * h, ytmp);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    k3 = rhs(t + c3 * h, ytmp);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    k4 = rhs(t + c4 * h, ytmp);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    k5 = rhs(t + c5 * h, ytmp);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    k6 = rhs(t + h, ytmp);
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    k7 = rhs(t + h, ynew);
    stats.rhs_calls += 6;
    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    const double en = detail::scaled_max(err, y, ynew, tol);
    if (!std::isfinite(en) || !ynew.allFinite()) {
      std::ostringstream msg;
      msg << "non-finite error estimate at t=" << t;
      throw SolverError(msg.str());
    }
    const double factor = std::clamp(0.9 * std::pow(std::max(en, 1e-10), -0.2), 0.2, 5.0);
    if (en <= 1.0) {
      t = lands ? target : t + h;
      y.swap(ynew);
      ++stats.accepted;
      after_step(t, y);
      if (lands && next_stop < stops.size() && target == stops[next_stop]) {
        on_stop(t, y);
        ++next_stop;
      }
      if (t < t1) {
        k1 = rhs(t, y);
        ++stats.rhs_calls;
      }
      h *= factor;
    } else {
      ++stats.rejected;
      h *= std::min(factor, 1.0);
      if (h < h_min) {
        std::ostringstream msg;
        msg << "step size underflow (h=" << h << ") at t=" << t;
        throw SolverError(msg.str());
      }
    }
  }
  return stats;
}

}  // namespace atomsim
