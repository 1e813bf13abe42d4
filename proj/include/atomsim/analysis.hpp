#pragma once

// Estimators and fits for heralded atom-photon correlation data.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "atomsim/fit.hpp"

namespace atomsim {

struct Estimate {
  double value = 0.0;
  double error = 0.0;
  bool clipped = false;
  std::string warning;
};

// ---- photon statistics ----

// g2(0) = p12 / (p1 p2) with binomial errors on the three probabilities.
Estimate g2_zero(double p1, double p2, double p12, double n_attempts);
Estimate g2_from_counts(std::uint64_t n1, std::uint64_t n2, std::uint64_t n12, std::uint64_t n_attempts);

struct TimeTagRecord {
  std::int64_t trial_id = 0;
  int detector_id = 0;  // 0 or 1
  std::int64_t timestamp_ns = 0;
};

struct CoincidenceCounts {
  std::uint64_t n1 = 0;   // trials with a click on detector 0
  std::uint64_t n2 = 0;   // trials with a click on detector 1
  std::uint64_t n12 = 0;  // trials with clicks on both
};

// Counts per trial, keeping only tags with window_start <= t < window_end.
CoincidenceCounts count_coincidences(const std::vector<TimeTagRecord>& records, std::int64_t window_start_ns,
                                     std::int64_t window_end_ns);

// ---- arrival-time histogram ----

struct HistogramBin {
  double t_ns = 0.0;  // bin center
  double count = 0.0;
};

std::vector<HistogramBin> histogram_from_tags(const std::vector<TimeTagRecord>& records, double bin_ns,
                                              double t_min_ns, double t_max_ns);

// Gaussian(t0, sigma) convolved with a unit-area exponential of time constant tau.
double emg_density(double t, double t0, double sigma, double tau);
// Same, filling d/d(t0, sigma, tau).
double emg_density(double t, double t0, double sigma, double tau, double grad[3]);

struct HistogramFit {
  double amplitude = 0.0, amplitude_err = 0.0;  // total events
  double t0 = 0.0, t0_err = 0.0;                // ns
  double sigma = 0.0, sigma_err = 0.0;          // ns
  double tau = 0.0, tau_err = 0.0;              // ns
  FitResult fit;
};

HistogramFit fit_arrival_histogram(const std::vector<HistogramBin>& bins);

// ---- parity oscillations ----

enum class Basis { X, Y, Z };
std::string to_string(Basis b);
Basis basis_from_string(const std::string& s);

struct ParityPoint {
  double theta_deg = 0.0;
  double n_even = 0.0;
  double n_odd = 0.0;
  double n_total = 0.0;
};

struct ParityDataset {
  Basis basis = Basis::Z;
  std::vector<ParityPoint> points;
};

// P(theta) = a + b cos(2 pi theta / period - phi), fitted as a + c cos + s sin.
struct SinusoidFit {
  Eigen::VectorXd params;      // (a, c, s[, period_deg])
  Eigen::MatrixXd covariance;
  double period_deg = 90.0;
  bool free_period = false;
  double chi2 = 0.0;
  std::size_t dof = 0;
  // Linear response of params to the per-point fractions: cov * J^T W.
  Eigen::MatrixXd gain;

  double offset() const { return params[0]; }
  double amplitude() const;
  double phase() const;  // phi, rad
  double amplitude_err() const;
  double phase_err() const;
  double visibility() const { return amplitude() / offset(); }
  double period() const { return free_period ? params[3] : period_deg; }
  double operator()(double theta_deg) const;
  static double evaluate(const Eigen::VectorXd& params, double period_deg, bool free_period, double theta_deg);
};

struct ParityOptions {
  bool free_period = false;
  double period_deg = 90.0;
};

struct ParityFit {
  Basis basis = Basis::Z;
  SinusoidFit even;
  SinusoidFit odd;
  // Cov(even params, odd params): even and odd fractions share each point's
  // trials, so they are anti-correlated (multinomial).
  Eigen::MatrixXd cross_covariance;
};

ParityFit fit_parity(const ParityDataset& data, const ParityOptions& options = {});

struct CorrelationEstimate {
  double value = 0.0;
  double error = 0.0;
  double theta_star_deg = 0.0;
};

// P_even(theta*) - P_odd(theta*); theta* defaults to the maximum of the even curve.
CorrelationEstimate correlation_from_fit(const ParityFit& fit, std::optional<double> theta_star_deg = std::nullopt);

// ---- fidelity ----

struct CorrelationSet {
  double xx = 0.0, xx_err = 0.0;
  double minus_yy = 0.0, minus_yy_err = 0.0;  // -<YY> as measured
  double zz = 0.0, zz_err = 0.0;
};

// F = (1 + xx + minus_yy + zz) / 4, clipped to [0, 1] with a warning.
Estimate bell_fidelity(const CorrelationSet& c);

struct DiagonalPopulations {
  double down_h = 0.0, up_v = 0.0, down_v = 0.0, up_h = 0.0;
  double down_h_err = 0.0, up_v_err = 0.0, down_v_err = 0.0, up_h_err = 0.0;
};

// 1/2 (rho_dH + rho_uV - 2 sqrt(rho_dV rho_uH) + rt_dH + rt_uV - rt_dV - rt_uH)
// with rho from the Z-basis and rt from the Y-basis populations.
Estimate fidelity_lower_bound(const DiagonalPopulations& z, const DiagonalPopulations& y);

// ---- Ramsey / Rabi ----

struct TimeSeriesPoint {
  double t = 0.0;  // s
  double p = 0.0;
  double shots = 0.0;
};

enum class Envelope { exponential, gaussian };

struct RamseyFit {
  double amplitude = 0.0, amplitude_err = 0.0;
  double gamma = 0.0, gamma_err = 0.0;  // 1/T2*, 1/s
  double frequency = 0.0, frequency_err = 0.0;  // Hz
  double phase = 0.0, phase_err = 0.0;
  double t2 = 0.0, t2_err = 0.0;  // s
  bool t2_is_lower_bound = false;
  double t2_lower_bound = 0.0;  // s, set when t2_is_lower_bound
  Envelope envelope = Envelope::exponential;
  double chi2 = 0.0;
  std::size_t dof = 0;
  std::vector<double> residuals;  // normalized, per point
};

// P(t) = 1/2 + A env(t) cos(2 pi f t + phi), env = exp(-gamma t) or exp(-(gamma t)^2).
RamseyFit fit_ramsey(const std::vector<TimeSeriesPoint>& points, Envelope envelope = Envelope::exponential);

struct RabiFit {
  double omega = 0.0, omega_err = 0.0;  // rad/s
  double amplitude = 0.0, amplitude_err = 0.0;
  double offset = 0.0, offset_err = 0.0;
  double chi2 = 0.0;
  std::size_t dof = 0;
  std::vector<double> residuals;
};

// P(t) = offset - amplitude cos(omega t).
RabiFit fit_rabi(const std::vector<TimeSeriesPoint>& points);

// Two-photon Rabi frequency omega_mw omega_rf / (2 delta) and its inverse for omega_rf.
double two_photon_rabi(double omega_mw, double omega_rf, double delta);
double rf_rabi_from_effective(double omega_eff, double omega_mw, double delta);

}  // namespace atomsim
