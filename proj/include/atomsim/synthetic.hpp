#pragma once

// Seeded synthetic datasets drawn from the analysis models, for round-trip
// checks of the estimators.

#include <cstdint>
#include <random>
#include <vector>

#include "atomsim/analysis.hpp"

namespace atomsim {

// Arrival times t0 + N(0, sigma) + Exp(tau), binned on [t_min, t_max).
std::vector<HistogramBin> synthesize_histogram(double tau_ns, double t0_ns, double sigma_ns, std::size_t events,
                                               double bin_ns, double t_min_ns, double t_max_ns, std::mt19937_64& rng);

// Even-parity probability a + b cos(4 theta - phi) (theta in degrees) with
// odd = n_total - even, drawn binomially with `shots` per angle.
ParityDataset synthesize_parity(Basis basis, double offset, double amplitude, double phase_rad,
                                const std::vector<double>& angles_deg, std::size_t shots, std::mt19937_64& rng);

std::vector<TimeSeriesPoint> synthesize_ramsey(double amplitude, double t2_s, double frequency_hz, double phase,
                                               const std::vector<double>& times_s, std::size_t shots,
                                               Envelope envelope, std::mt19937_64& rng);

std::vector<TimeSeriesPoint> synthesize_rabi(double omega, double amplitude, double offset,
                                             const std::vector<double>& times_s, std::size_t shots,
                                             std::mt19937_64& rng);

// Time tags for `trials` heralding attempts in which detector 0 and 1 click
// independently with probabilities p1 and p2, all at time t_ns.
std::vector<TimeTagRecord> synthesize_time_tags(std::size_t trials, double p1, double p2, std::int64_t t_ns,
                                                std::mt19937_64& rng);

std::vector<double> linspace(double lo, double hi, std::size_t n);

}  // namespace atomsim
