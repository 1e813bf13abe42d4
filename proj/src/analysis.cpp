#include "atomsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "atomsim/errors.hpp"

namespace atomsim {

namespace {

void require_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw InputError(std::string(name) + " must lie in [0, 1]");
}

double erfcx(double z) {
  if (z < 25.0) return std::exp(z * z) * std::erfc(z);
  const double iz2 = 1.0 / (z * z);
  return (1.0 - 0.5 * iz2 * (1.0 - 1.5 * iz2 * (1.0 - 2.5 * iz2))) / (z * std::sqrt(std::numbers::pi));
}

// Fourier amplitude of y at frequency f (cycles per unit of t): (2/n) sum y exp(-2 pi i f t).
std::complex<double> fourier(const std::vector<double>& t, const std::vector<double>& y, double f) {
  std::complex<double> acc = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) acc += y[i] * std::polar(1.0, -2.0 * std::numbers::pi * f * t[i]);
  return acc * (2.0 / static_cast<double>(t.size()));
}

// Strongest frequency of y on [f_min, f_max] in steps of df, refined by golden section.
double dominant_frequency(const std::vector<double>& t, const std::vector<double>& y, double f_min, double f_max,
                          double df) {
  double best_f = f_min, best = -1.0;
  for (double f = f_min; f <= f_max; f += df) {
    const double a = std::abs(fourier(t, y, f));
    if (a > best) {
      best = a;
      best_f = f;
    }
  }
  double lo = std::max(f_min, best_f - df), hi = std::min(f_max, best_f + df);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 60; ++it) {
    const double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
    if (std::abs(fourier(t, y, a)) > std::abs(fourier(t, y, b)))
      hi = b;
    else
      lo = a;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

// ---- photon statistics ----

Estimate g2_zero(double p1, double p2, double p12, double n_attempts) {
  require_probability(p1, "p1");
  require_probability(p2, "p2");
  require_probability(p12, "p12");
  if (!(p1 > 0.0 && p2 > 0.0)) throw InputError("g2 needs non-zero single-detector probabilities");
  if (!(n_attempts > 0.0)) throw InputError("number of attempts must be positive");
  Estimate e;
  e.value = p12 / (p1 * p2);
  const double v1 = p1 * (1.0 - p1) / n_attempts, v2 = p2 * (1.0 - p2) / n_attempts,
               v12 = p12 * (1.0 - p12) / n_attempts;
  const double d12 = 1.0 / (p1 * p2), d1 = -e.value / p1, d2 = -e.value / p2;
  e.error = std::sqrt(d12 * d12 * v12 + d1 * d1 * v1 + d2 * d2 * v2);
  return e;
}

Estimate g2_from_counts(std::uint64_t n1, std::uint64_t n2, std::uint64_t n12, std::uint64_t n_attempts) {
  if (n_attempts == 0) throw InputError("number of attempts must be positive");
  if (n12 > std::min(n1, n2) || std::max(n1, n2) > n_attempts)
    throw InputError("inconsistent counts: need n12 <= n1, n2 <= attempts");
  const double n = static_cast<double>(n_attempts);
  return g2_zero(static_cast<double>(n1) / n, static_cast<double>(n2) / n, static_cast<double>(n12) / n, n);
}

CoincidenceCounts count_coincidences(const std::vector<TimeTagRecord>& records, std::int64_t window_start_ns,
                                     std::int64_t window_end_ns) {
  std::map<std::int64_t, unsigned> clicked;  // bit 0: detector 0, bit 1: detector 1
  for (const auto& r : records) {
    if (r.detector_id != 0 && r.detector_id != 1) throw InputError("detector_id must be 0 or 1");
    if (r.timestamp_ns < 0) throw InputError("timestamps must be non-negative");
    if (r.timestamp_ns < window_start_ns || r.timestamp_ns >= window_end_ns) continue;
    clicked[r.trial_id] |= 1u << r.detector_id;
  }
  CoincidenceCounts c;
  for (const auto& [trial, bits] : clicked) {
    if (bits & 1u) ++c.n1;
    if (bits & 2u) ++c.n2;
    if (bits == 3u) ++c.n12;
  }
  return c;
}

// ---- arrival-time histogram ----

std::vector<HistogramBin> histogram_from_tags(const std::vector<TimeTagRecord>& records, double bin_ns,
                                              double t_min_ns, double t_max_ns) {
  if (!(bin_ns > 0.0) || !(t_max_ns > t_min_ns)) throw InputError("histogram needs a positive bin and range");
  const auto n = static_cast<std::size_t>(std::ceil((t_max_ns - t_min_ns) / bin_ns));
  std::vector<HistogramBin> bins(n);
  for (std::size_t i = 0; i < n; ++i) bins[i].t_ns = t_min_ns + (static_cast<double>(i) + 0.5) * bin_ns;
  for (const auto& r : records) {
    const double t = static_cast<double>(r.timestamp_ns);
    if (t < t_min_ns || t >= t_min_ns + static_cast<double>(n) * bin_ns) continue;
    bins[static_cast<std::size_t>((t - t_min_ns) / bin_ns)].count += 1.0;
  }
  return bins;
}

double emg_density(double t, double t0, double sigma, double tau, double grad[3]) {
  const double lam = 1.0 / tau;
  const double dt = t - t0;
  const double gauss = std::exp(-0.5 * dt * dt / (sigma * sigma));
  const double phi = gauss / (sigma * std::sqrt(2.0 * std::numbers::pi));
  const double z = (lam * sigma * sigma - dt) / (std::numbers::sqrt2 * sigma);
  double g;
  if (z > 0.0)
    g = 0.5 * lam * erfcx(z) * gauss;
  else
    g = 0.5 * lam * std::exp(-lam * dt + 0.5 * lam * lam * sigma * sigma) * std::erfc(z);
  if (grad) {
    grad[0] = lam * (g - phi);
    grad[1] = lam * lam * sigma * g - lam * phi * (lam * sigma * sigma + dt) / sigma;
    const double d_lam = g * (1.0 / lam - dt + lam * sigma * sigma) - lam * sigma * sigma * phi;
    grad[2] = -lam * lam * d_lam;
  }
  return g;
}

double emg_density(double t, double t0, double sigma, double tau) { return emg_density(t, t0, sigma, tau, nullptr); }

HistogramFit fit_arrival_histogram(const std::vector<HistogramBin>& bins) {
  if (bins.size() < 2) throw InputError("histogram needs at least 20 non-empty bins");
  std::size_t nonempty = 0;
  double total = 0.0;
  for (const auto& b : bins) {
    if (!(b.count >= 0.0) || !std::isfinite(b.count)) throw InputError("histogram counts must be non-negative");
    if (b.count > 0.0) ++nonempty;
    total += b.count;
  }
  if (nonempty < 20) throw InputError("histogram needs at least 20 non-empty bins");
  const double width = bins[1].t_ns - bins[0].t_ns;
  if (!(width > 0.0)) throw InputError("histogram bins must be increasing");
  for (std::size_t i = 1; i < bins.size(); ++i)
    if (std::abs((bins[i].t_ns - bins[i - 1].t_ns) - width) > 1e-6 * width)
      throw InputError("histogram bins must be uniformly spaced");

  // Initial guess: peak position, rise time, mean delay of the tail.
  std::size_t peak = 0;
  for (std::size_t i = 1; i < bins.size(); ++i)
    if (bins[i].count > bins[peak].count) peak = i;
  double tail_sum = 0.0, tail_w = 0.0;
  for (std::size_t i = peak; i < bins.size(); ++i) {
    tail_sum += bins[i].count * (bins[i].t_ns - bins[peak].t_ns);
    tail_w += bins[i].count;
  }
  std::size_t rise = peak;
  while (rise > 0 && bins[rise - 1].count > 0.2 * bins[peak].count) --rise;
  const double sigma0 = std::max(width, 0.5 * (bins[peak].t_ns - bins[rise].t_ns));
  const double tau0 = std::max(2.0 * width, tail_w > 0.0 ? tail_sum / tail_w : 10.0 * width);

  static const double gl_x[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
  static const double gl_w[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};  // sums to 1

  FitProblem pr;
  pr.parameters = 4;
  for (const auto& b : bins) pr.observations.push_back(b.count);
  pr.model = [&](const Eigen::VectorXd& p, std::size_t i, Eigen::Ref<Eigen::VectorXd> grad) {
    double avg = 0.0, g3[3], d[3] = {0.0, 0.0, 0.0};
    for (int k = 0; k < 3; ++k) {
      const double t = bins[i].t_ns + 0.5 * width * gl_x[k];
      avg += gl_w[k] * emg_density(t, p[1], p[2], p[3], g3);
      for (int j = 0; j < 3; ++j) d[j] += gl_w[k] * g3[j];
    }
    grad[0] = width * avg;
    for (int j = 0; j < 3; ++j) grad[j + 1] = p[0] * width * d[j];
    return p[0] * width * avg;
  };
  pr.variance = [](double mu, std::size_t) { return poisson_variance(mu); };
  pr.admissible = [](const Eigen::VectorXd& p) { return p[0] > 0.0 && p[2] > 0.0 && p[3] > 0.0; };

  // Two starting points for the peak offset: the mode of an EMG sits after t0.
  FitResult best;
  bool have = false;
  std::string last_error;
  for (double shift : {0.0, 1.0}) {
    Eigen::VectorXd p0(4);
    p0 << total, bins[peak].t_ns - shift * sigma0, sigma0, tau0;
    try {
      FitResult r = fit_least_squares(pr, p0);
      if (!have || r.chi2 < best.chi2) {
        best = std::move(r);
        have = true;
      }
    } catch (const SolverError& e) {
      last_error = e.what();
    }
  }
  if (!have) throw ConvergenceError("arrival histogram fit failed: " + last_error, 0.0);

  HistogramFit out;
  out.amplitude = best.params[0];
  out.t0 = best.params[1];
  out.sigma = best.params[2];
  out.tau = best.params[3];
  out.amplitude_err = best.stderr_of(0);
  out.t0_err = best.stderr_of(1);
  out.sigma_err = best.stderr_of(2);
  out.tau_err = best.stderr_of(3);
  out.fit = std::move(best);
  return out;
}

// ---- parity ----

std::string to_string(Basis b) {
  switch (b) {
    case Basis::X: return "X";
    case Basis::Y: return "Y";
    case Basis::Z: return "Z";
  }
  return "?";
}

Basis basis_from_string(const std::string& s) {
  if (s == "X" || s == "x") return Basis::X;
  if (s == "Y" || s == "y") return Basis::Y;
  if (s == "Z" || s == "z") return Basis::Z;
  throw InputError("unknown basis '" + s + "'");
}

double SinusoidFit::evaluate(const Eigen::VectorXd& p, double period_deg, bool free_period, double theta_deg) {
  const double period = free_period ? p[3] : period_deg;
  const double x = 2.0 * std::numbers::pi * theta_deg / period;
  return p[0] + p[1] * std::cos(x) + p[2] * std::sin(x);
}

double SinusoidFit::operator()(double theta_deg) const { return evaluate(params, period_deg, free_period, theta_deg); }

double SinusoidFit::amplitude() const { return std::hypot(params[1], params[2]); }

double SinusoidFit::phase() const { return std::atan2(params[2], params[1]); }

double SinusoidFit::amplitude_err() const {
  const double b = amplitude();
  if (b == 0.0) return std::sqrt(0.5 * (covariance(1, 1) + covariance(2, 2)));
  const double gc = params[1] / b, gs = params[2] / b;
  return std::sqrt(std::max(0.0, gc * gc * covariance(1, 1) + 2 * gc * gs * covariance(1, 2) + gs * gs * covariance(2, 2)));
}

double SinusoidFit::phase_err() const {
  const double b2 = params[1] * params[1] + params[2] * params[2];
  if (b2 == 0.0) return std::numbers::pi;
  const double gc = -params[2] / b2, gs = params[1] / b2;
  return std::sqrt(std::max(0.0, gc * gc * covariance(1, 1) + 2 * gc * gs * covariance(1, 2) + gs * gs * covariance(2, 2)));
}

namespace {

SinusoidFit fit_sinusoid(const std::vector<double>& theta, const std::vector<double>& p,
                         const std::vector<double>& trials, const ParityOptions& opt) {
  const std::size_t n = theta.size();
  // Unweighted linear solve for the starting point.
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = 2.0 * std::numbers::pi * theta[i] / opt.period_deg;
    a(i, 0) = 1.0;
    a(i, 1) = std::cos(x);
    a(i, 2) = std::sin(x);
    y[i] = p[i];
  }
  const Eigen::VectorXd lin = a.colPivHouseholderQr().solve(y);

  FitProblem pr;
  pr.parameters = opt.free_period ? 4 : 3;
  pr.observations = p;
  pr.model = [&](const Eigen::VectorXd& q, std::size_t i, Eigen::Ref<Eigen::VectorXd> grad) {
    const double period = opt.free_period ? q[3] : opt.period_deg;
    const double x = 2.0 * std::numbers::pi * theta[i] / period;
    const double c = std::cos(x), s = std::sin(x);
    grad[0] = 1.0;
    grad[1] = c;
    grad[2] = s;
    if (opt.free_period) grad[3] = (q[1] * s - q[2] * c) * x / period;
    return q[0] + q[1] * c + q[2] * s;
  };
  pr.variance = [&](double mu, std::size_t i) { return binomial_variance(mu, trials[i]); };
  if (opt.free_period) pr.admissible = [](const Eigen::VectorXd& q) { return q[3] > 0.0; };

  Eigen::VectorXd p0(pr.parameters);
  p0.head(3) = lin;
  if (opt.free_period) p0[3] = opt.period_deg;
  const FitResult r = fit_least_squares(pr, p0);

  SinusoidFit out;
  out.params = r.params;
  out.covariance = r.covariance;
  out.period_deg = opt.period_deg;
  out.free_period = opt.free_period;
  out.chi2 = r.chi2;
  out.dof = r.dof;
  Eigen::MatrixXd jtw(pr.parameters, n);
  Eigen::VectorXd grad(pr.parameters);
  for (std::size_t i = 0; i < n; ++i) {
    const double mu = pr.model(r.params, i, grad);
    jtw.col(static_cast<Eigen::Index>(i)) = grad / binomial_variance(mu, trials[i]);
  }
  out.gain = r.covariance * jtw;
  return out;
}

}  // namespace

ParityFit fit_parity(const ParityDataset& data, const ParityOptions& options) {
  if (!(options.period_deg > 0.0)) throw InputError("parity period must be positive");
  const std::size_t n = data.points.size();
  if (n < 6) throw InputError("parity fit needs at least 6 angle points");
  std::vector<double> theta, pe, po, trials;
  std::set<double> distinct;
  for (const auto& pt : data.points) {
    if (!(pt.n_even >= 0 && pt.n_odd >= 0 && pt.n_total > 0) || pt.n_even + pt.n_odd > pt.n_total)
      throw InputError("parity counts must satisfy 0 <= n_even + n_odd <= n_total, n_total > 0");
    theta.push_back(pt.theta_deg);
    pe.push_back(pt.n_even / pt.n_total);
    po.push_back(pt.n_odd / pt.n_total);
    trials.push_back(pt.n_total);
    distinct.insert(pt.theta_deg);
  }
  if (distinct.size() < 6) throw InputError("parity fit needs at least 6 distinct angles");
  const double span = *distinct.rbegin() - *distinct.begin();
  const double spacing = span / static_cast<double>(distinct.size() - 1);
  if (span + spacing < options.period_deg * (1.0 - 1e-9))
    throw InputError("parity angles do not cover one oscillation period");
  ParityFit f;
  f.basis = data.basis;
  f.even = fit_sinusoid(theta, pe, trials, options);
  f.odd = fit_sinusoid(theta, po, trials, options);
  Eigen::VectorXd c(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double me = std::clamp(f.even(theta[i]), 0.0, 1.0), mo = std::clamp(f.odd(theta[i]), 0.0, 1.0);
    c[static_cast<Eigen::Index>(i)] = -me * mo / trials[i];
  }
  f.cross_covariance = f.even.gain * c.asDiagonal() * f.odd.gain.transpose();
  return f;
}

CorrelationEstimate correlation_from_fit(const ParityFit& fit, std::optional<double> theta_star_deg) {
  const SinusoidFit& e = fit.even;
  const SinusoidFit& o = fit.odd;
  const auto ne = e.params.size(), no = o.params.size();

  auto theta_of = [&](const Eigen::VectorXd& pe) {
    if (theta_star_deg) return *theta_star_deg;
    const double period = e.free_period ? pe[3] : e.period_deg;
    double th = std::atan2(pe[2], pe[1]) * period / (2.0 * std::numbers::pi);
    if (th < 0.0) th += period;
    return th;
  };
  auto value = [&](const Eigen::VectorXd& pe, const Eigen::VectorXd& po) {
    const double th = theta_of(pe);
    return SinusoidFit::evaluate(pe, e.period_deg, e.free_period, th) -
           SinusoidFit::evaluate(po, o.period_deg, o.free_period, th);
  };

  CorrelationEstimate out;
  out.theta_star_deg = theta_of(e.params);
  out.value = value(e.params, o.params);

  // Central differences over the stacked parameters.
  Eigen::VectorXd ge(ne), go(no);
  for (Eigen::Index k = 0; k < ne; ++k) {
    const double h = 1e-6 * std::max(1.0, std::abs(e.params[k]));
    Eigen::VectorXd up = e.params, dn = e.params;
    up[k] += h;
    dn[k] -= h;
    ge[k] = (value(up, o.params) - value(dn, o.params)) / (2.0 * h);
  }
  for (Eigen::Index k = 0; k < no; ++k) {
    const double h = 1e-6 * std::max(1.0, std::abs(o.params[k]));
    Eigen::VectorXd up = o.params, dn = o.params;
    up[k] += h;
    dn[k] -= h;
    go[k] = (value(e.params, up) - value(e.params, dn)) / (2.0 * h);
  }
  double var = ge.dot(e.covariance * ge) + go.dot(o.covariance * go);
  if (fit.cross_covariance.rows() == ne && fit.cross_covariance.cols() == no)
    var += 2.0 * ge.dot(fit.cross_covariance * go);
  out.error = std::sqrt(std::max(0.0, var));
  return out;
}

// ---- fidelity ----

Estimate bell_fidelity(const CorrelationSet& c) {
  for (double v : {c.xx, c.minus_yy, c.zz})
    if (!(v >= -1.0 && v <= 1.0)) throw InputError("correlations must lie in [-1, 1]");
  for (double v : {c.xx_err, c.minus_yy_err, c.zz_err})
    if (!(v >= 0.0)) throw InputError("correlation uncertainties must be non-negative");
  Estimate e;
  e.value = (1.0 + c.xx + c.minus_yy + c.zz) / 4.0;
  e.error = std::sqrt(c.xx_err * c.xx_err + c.minus_yy_err * c.minus_yy_err + c.zz_err * c.zz_err) / 4.0;
  if (e.value < 0.0) {
    e.clipped = true;
    e.warning = "fidelity below 0 clipped to 0";
    e.value = 0.0;
  }
  return e;
}

namespace {

void check_populations(const DiagonalPopulations& d, const char* which) {
  const double v[4] = {d.down_h, d.up_v, d.down_v, d.up_h};
  const double s[4] = {d.down_h_err, d.up_v_err, d.down_v_err, d.up_h_err};
  double sum = 0.0, var = 0.0;
  for (int i = 0; i < 4; ++i) {
    if (!(v[i] >= 0.0) || !std::isfinite(v[i]))
      throw InputError(std::string(which) + " populations must be non-negative");
    if (!(s[i] >= 0.0)) throw InputError(std::string(which) + " population uncertainties must be non-negative");
    sum += v[i];
    var += s[i] * s[i];
  }
  if (std::abs(sum - 1.0) > std::max(1e-6, 3.0 * std::sqrt(var))) {
    std::ostringstream msg;
    msg << which << " populations sum to " << sum << ", not 1";
    throw InputError(msg.str());
  }
}

}  // namespace

Estimate fidelity_lower_bound(const DiagonalPopulations& z, const DiagonalPopulations& y) {
  check_populations(z, "Z-basis");
  check_populations(y, "Y-basis");
  Estimate e;
  const double root = std::sqrt(z.down_v * z.up_h);
  e.value = 0.5 * (z.down_h + z.up_v - 2.0 * root + y.down_h + y.up_v - y.down_v - y.up_h);

  // Uncertainty of sqrt(a b); where a factor vanishes the first-order term is
  // singular and sqrt(b * sigma_a) is used for that factor instead.
  auto sqrt_term = [](double a, double sa, double b) {
    if (a > 0.0 && b > 0.0) return 0.5 * std::sqrt(b / a) * sa;
    return std::sqrt(b * sa);
  };
  const double sr_a = sqrt_term(z.down_v, z.down_v_err, z.up_h);
  const double sr_b = sqrt_term(z.up_h, z.up_h_err, z.down_v);
  const double var = 0.25 * (z.down_h_err * z.down_h_err + z.up_v_err * z.up_v_err + 4.0 * (sr_a * sr_a + sr_b * sr_b) +
                             y.down_h_err * y.down_h_err + y.up_v_err * y.up_v_err + y.down_v_err * y.down_v_err +
                             y.up_h_err * y.up_h_err);
  e.error = std::sqrt(var);
  if (e.value > 1.0) {
    e.clipped = true;
    e.warning = "lower bound above 1 clipped to 1";
    e.value = 1.0;
  }
  return e;
}

// ---- Ramsey / Rabi ----

namespace {

struct Scaled {
  std::vector<double> t;  // in units of the scan window
  std::vector<double> p;
  std::vector<double> shots;
  double t_min = 0.0, window = 1.0;
};

Scaled scale_series(const std::vector<TimeSeriesPoint>& pts, std::size_t min_points, const char* what) {
  if (pts.size() < min_points) {
    std::ostringstream msg;
    msg << what << " fit needs at least " << min_points << " points";
    throw InputError(msg.str());
  }
  Scaled s;
  double lo = pts.front().t, hi = pts.front().t;
  for (const auto& q : pts) {
    if (!std::isfinite(q.t) || !(q.p >= 0.0 && q.p <= 1.0) || !(q.shots > 0.0))
      throw InputError(std::string(what) + " points need finite t, p in [0, 1] and positive shots");
    lo = std::min(lo, q.t);
    hi = std::max(hi, q.t);
  }
  if (!(hi > lo)) throw InputError(std::string(what) + " times must span a non-zero window");
  s.t_min = lo;
  s.window = hi - lo;
  for (const auto& q : pts) {
    s.t.push_back(q.t / s.window);
    s.p.push_back(q.p);
    s.shots.push_back(q.shots);
  }
  return s;
}

double nyquist(const Scaled& s) {
  std::vector<double> t = s.t;
  std::sort(t.begin(), t.end());
  double dmin = 1.0;
  for (std::size_t i = 1; i < t.size(); ++i)
    if (t[i] > t[i - 1]) dmin = std::min(dmin, t[i] - t[i - 1]);
  return 0.5 / dmin;
}

}  // namespace

RamseyFit fit_ramsey(const std::vector<TimeSeriesPoint>& points, Envelope envelope) {
  const Scaled s = scale_series(points, 8, "Ramsey");
  const bool gaussian = envelope == Envelope::gaussian;
  // Parameters (A, gamma, f, phi) in window units.
  FitProblem pr;
  pr.parameters = 4;
  pr.observations = s.p;
  pr.model = [&](const Eigen::VectorXd& q, std::size_t i, Eigen::Ref<Eigen::VectorXd> grad) {
    const double t = s.t[i];
    const double gt = q[1] * t;
    const double env = gaussian ? std::exp(-gt * gt) : std::exp(-gt);
    const double denv = gaussian ? -2.0 * gt * t * env : -t * env;
    const double x = 2.0 * std::numbers::pi * q[2] * t + q[3];
    const double c = std::cos(x), sn = std::sin(x);
    grad[0] = env * c;
    grad[1] = q[0] * denv * c;
    grad[2] = -q[0] * env * sn * 2.0 * std::numbers::pi * t;
    grad[3] = -q[0] * env * sn;
    return 0.5 + q[0] * env * c;
  };
  pr.variance = [&](double mu, std::size_t i) { return binomial_variance(mu, s.shots[i]); };

  std::vector<double> centered(s.p.size());
  for (std::size_t i = 0; i < centered.size(); ++i) centered[i] = s.p[i] - 0.5;
  const double f0 = dominant_frequency(s.t, centered, 0.0, nyquist(s), 0.05);
  const std::complex<double> c0 = fourier(s.t, centered, f0);

  FitResult best;
  bool have = false;
  std::string last_error;
  for (double g0 : {0.0, 0.3, 1.0, 3.0}) {
    Eigen::VectorXd p0(4);
    // The DFT amplitude is damped by the envelope's mean; undo roughly.
    const double damp = g0 > 0.0 ? (1.0 - std::exp(-g0)) / g0 : 1.0;
    p0 << std::min(0.5, std::abs(c0) / damp), g0, f0, std::arg(c0);
    try {
      FitResult r = fit_least_squares(pr, p0);
      if (!have || r.chi2 < best.chi2) {
        best = std::move(r);
        have = true;
      }
    } catch (const SolverError& e) {
      last_error = e.what();
    }
  }
  if (!have) throw ConvergenceError("Ramsey fit failed: " + last_error, 0.0);

  Eigen::VectorXd q = best.params;
  // Canonical sign: positive amplitude and frequency, phase in (-pi, pi].
  if (q[2] < 0.0) {
    q[2] = -q[2];
    q[3] = -q[3];
  }
  if (q[0] < 0.0) {
    q[0] = -q[0];
    q[3] += std::numbers::pi;
  }
  q[3] = std::remainder(q[3], 2.0 * std::numbers::pi);

  RamseyFit out;
  out.envelope = envelope;
  out.amplitude = q[0];
  out.amplitude_err = best.stderr_of(0);
  out.gamma = q[1] / s.window;
  out.gamma_err = best.stderr_of(1) / s.window;
  out.frequency = q[2] / s.window;
  out.frequency_err = best.stderr_of(2) / s.window;
  out.phase = q[3];
  out.phase_err = best.stderr_of(3);
  out.chi2 = best.chi2;
  out.dof = best.dof;
  out.residuals = best.residuals;
  const double t_end = s.t_min + s.window;
  if (out.gamma > 0.0) {
    out.t2 = 1.0 / out.gamma;
    out.t2_err = out.gamma_err / (out.gamma * out.gamma);
  } else {
    out.t2 = std::numeric_limits<double>::infinity();
    out.t2_err = std::numeric_limits<double>::infinity();
  }
  if (!(out.t2 <= t_end)) {
    out.t2_is_lower_bound = true;
    out.t2_lower_bound = 1.0 / (std::max(out.gamma, 0.0) + 2.0 * out.gamma_err);
  }
  return out;
}

RabiFit fit_rabi(const std::vector<TimeSeriesPoint>& points) {
  const Scaled s = scale_series(points, 8, "Rabi");
  FitProblem pr;
  pr.parameters = 3;  // (offset, amplitude, omega) with omega in rad per window
  pr.observations = s.p;
  pr.model = [&](const Eigen::VectorXd& q, std::size_t i, Eigen::Ref<Eigen::VectorXd> grad) {
    const double x = q[2] * s.t[i];
    const double c = std::cos(x);
    grad[0] = 1.0;
    grad[1] = -c;
    grad[2] = q[1] * std::sin(x) * s.t[i];
    return q[0] - q[1] * c;
  };
  pr.variance = [&](double mu, std::size_t i) { return binomial_variance(mu, s.shots[i]); };

  double mean = 0.0;
  for (double v : s.p) mean += v;
  mean /= static_cast<double>(s.p.size());
  std::vector<double> centered(s.p.size());
  for (std::size_t i = 0; i < centered.size(); ++i) centered[i] = s.p[i] - mean;
  const double f0 = dominant_frequency(s.t, centered, 0.25, nyquist(s), 0.05);
  // Coverage: the data must contain at least one full period.
  if (f0 * (1.0 + 1.0 / static_cast<double>(s.t.size())) < 1.0)
    throw InputError("Rabi data cover less than one oscillation period");
  const double amp0 = std::abs(fourier(s.t, centered, f0));

  FitResult best;
  bool have = false;
  std::string last_error;
  for (double sign : {1.0, -1.0}) {
    Eigen::VectorXd p0(3);
    p0 << mean, sign * amp0, 2.0 * std::numbers::pi * f0;
    try {
      FitResult r = fit_least_squares(pr, p0);
      if (!have || r.chi2 < best.chi2) {
        best = std::move(r);
        have = true;
      }
    } catch (const SolverError& e) {
      last_error = e.what();
    }
  }
  if (!have) throw ConvergenceError("Rabi fit failed: " + last_error, 0.0);
  RabiFit out;
  out.offset = best.params[0];
  out.offset_err = best.stderr_of(0);
  out.amplitude = best.params[1];
  out.amplitude_err = best.stderr_of(1);
  out.omega = std::abs(best.params[2]) / s.window;
  out.omega_err = best.stderr_of(2) / s.window;
  out.chi2 = best.chi2;
  out.dof = best.dof;
  out.residuals = best.residuals;
  return out;
}

double two_photon_rabi(double omega_mw, double omega_rf, double delta) {
  if (delta == 0.0) throw InputError("two-photon detuning must be non-zero");
  return omega_mw * omega_rf / (2.0 * delta);
}

double rf_rabi_from_effective(double omega_eff, double omega_mw, double delta) {
  if (omega_mw == 0.0) throw InputError("microwave Rabi frequency must be non-zero");
  return 2.0 * delta * omega_eff / omega_mw;
}

}  // namespace atomsim
