// Writes seeded synthetic input files in the analyze CSV schemas.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "atomsim/csv.hpp"
#include "atomsim/errors.hpp"
#include "atomsim/synthetic.hpp"

using namespace atomsim;
namespace fs = std::filesystem;

namespace {

std::ofstream open(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InputError("cannot write " + p.string());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synthetic datasets for the analyze subcommands"};
  std::string dir = "synthetic";
  std::uint64_t seed = 1;
  app.add_option("--out", dir, "output directory");
  app.add_option("--seed", seed, "random seed");
  CLI11_PARSE(app, argc, argv);

  try {
    fs::create_directories(dir);
    std::mt19937_64 rng(seed);
    const fs::path d(dir);

    // Arrival times: tau = 30.4 ns, 1e4 events.
    {
      auto out = open(d / "histogram.csv");
      write_histogram(out, synthesize_histogram(30.4, 20.0, 2.0, 10000, 1.0, 0.0, 250.0, rng));
    }
    // Parity fringes with correlations 0.909, 0.919, 0.939.
    const auto angles = linspace(0.0, 90.0, 13);
    const std::pair<Basis, double> bases[] = {{Basis::X, 0.909}, {Basis::Y, 0.919}, {Basis::Z, 0.939}};
    for (const auto& [b, corr] : bases) {
      auto out = open(d / ("parity_" + to_string(b) + ".csv"));
      write_parity(out, {synthesize_parity(b, 0.5, 0.5 * corr, 0.4, angles, 400, rng)});
    }
    {
      auto out = open(d / "ramsey.csv");
      write_time_series(out, synthesize_ramsey(0.45, 130e-6, 20e3, 0.3, linspace(0.0, 400e-6, 41), 100,
                                               Envelope::exponential, rng));
    }
    {
      auto out = open(d / "rabi.csv");
      write_time_series(out, synthesize_rabi(2.0 * std::numbers::pi * 109e3, 0.48, 0.5, linspace(0.0, 30e-6, 61),
                                             100, rng));
    }
    {
      // 2e5 attempts with ~0.5% click probability per detector.
      auto out = open(d / "time_tags.csv");
      write_time_tags(out, synthesize_time_tags(200000, 0.005, 0.005, 100, rng));
    }
  } catch (const InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
