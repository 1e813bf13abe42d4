#include "atomsim/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "atomsim/errors.hpp"

namespace atomsim {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n < 2) throw InputError("linspace needs at least two points");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

std::vector<HistogramBin> synthesize_histogram(double tau_ns, double t0_ns, double sigma_ns, std::size_t events,
                                               double bin_ns, double t_min_ns, double t_max_ns, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::exponential_distribution<double> decay(1.0 / tau_ns);
  const auto n = static_cast<std::size_t>(std::ceil((t_max_ns - t_min_ns) / bin_ns));
  std::vector<HistogramBin> bins(n);
  for (std::size_t i = 0; i < n; ++i) bins[i].t_ns = t_min_ns + (static_cast<double>(i) + 0.5) * bin_ns;
  for (std::size_t k = 0; k < events; ++k) {
    const double t = t0_ns + sigma_ns * gauss(rng) + decay(rng);
    if (t < t_min_ns) continue;
    const auto b = static_cast<std::size_t>((t - t_min_ns) / bin_ns);
    if (b < n) bins[b].count += 1.0;
  }
  return bins;
}

ParityDataset synthesize_parity(Basis basis, double offset, double amplitude, double phase_rad,
                                const std::vector<double>& angles_deg, std::size_t shots, std::mt19937_64& rng) {
  ParityDataset d;
  d.basis = basis;
  for (double th : angles_deg) {
    const double p = offset + amplitude * std::cos(4.0 * th * std::numbers::pi / 180.0 - phase_rad);
    std::binomial_distribution<long> draw(static_cast<long>(shots), std::clamp(p, 0.0, 1.0));
    const double even = static_cast<double>(draw(rng));
    d.points.push_back({th, even, static_cast<double>(shots) - even, static_cast<double>(shots)});
  }
  return d;
}

std::vector<TimeSeriesPoint> synthesize_ramsey(double amplitude, double t2_s, double frequency_hz, double phase,
                                               const std::vector<double>& times_s, std::size_t shots,
                                               Envelope envelope, std::mt19937_64& rng) {
  std::vector<TimeSeriesPoint> out;
  for (double t : times_s) {
    const double x = t / t2_s;
    const double env = envelope == Envelope::gaussian ? std::exp(-x * x) : std::exp(-x);
    const double p = 0.5 + amplitude * env * std::cos(2.0 * std::numbers::pi * frequency_hz * t + phase);
    std::binomial_distribution<long> draw(static_cast<long>(shots), std::clamp(p, 0.0, 1.0));
    out.push_back({t, static_cast<double>(draw(rng)) / static_cast<double>(shots), static_cast<double>(shots)});
  }
  return out;
}

std::vector<TimeSeriesPoint> synthesize_rabi(double omega, double amplitude, double offset,
                                             const std::vector<double>& times_s, std::size_t shots,
                                             std::mt19937_64& rng) {
  std::vector<TimeSeriesPoint> out;
  for (double t : times_s) {
    const double p = offset - amplitude * std::cos(omega * t);
    std::binomial_distribution<long> draw(static_cast<long>(shots), std::clamp(p, 0.0, 1.0));
    out.push_back({t, static_cast<double>(draw(rng)) / static_cast<double>(shots), static_cast<double>(shots)});
  }
  return out;
}

std::vector<TimeTagRecord> synthesize_time_tags(std::size_t trials, double p1, double p2, std::int64_t t_ns,
                                                std::mt19937_64& rng) {
  std::bernoulli_distribution c1(p1), c2(p2);
  std::vector<TimeTagRecord> out;
  for (std::size_t k = 0; k < trials; ++k) {
    if (c1(rng)) out.push_back({static_cast<std::int64_t>(k), 0, t_ns});
    if (c2(rng)) out.push_back({static_cast<std::int64_t>(k), 1, t_ns});
  }
  return out;
}

}  // namespace atomsim
