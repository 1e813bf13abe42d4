// Monte-Carlo wavefunction unraveling of the flagged scheme.
//
// The drive couples only levels within small blocks (fixed m, fixed flag),
// and every quantum jump lands on a single basis state, so each trajectory
// lives in one block at a time. The first no-jump segment from |3,0> is the
// same for every trajectory and is tabulated once.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <random>

#include "atomsim/angular.hpp"
#include "atomsim/errors.hpp"
#include "atomsim/parallel.hpp"
#include "atomsim/pulsescan.hpp"

namespace atomsim {

namespace {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXcd;

struct LocalCoupling {
  int a = 0, b = 0;  // local indices (ground, excited)
  double factor = 0.0;
};

struct Block {
  std::vector<std::size_t> levels;
  std::vector<cplx> diag;  // E_i - i gamma_i / 2
  std::vector<LocalCoupling> couplings;
  double dt = 0.0;
};

struct Scores {
  double leakage = 0.0, leakage_sq = 0.0;
  double dbl = 0.0, dbl_sq = 0.0;
  double bell = 0.0, never = 0.0;

  void add(double l, double d, double b, double n) {
    leakage += l;
    leakage_sq += l * l;
    dbl += d;
    dbl_sq += d * d;
    bell += b;
    never += n;
  }
  void merge(const Scores& o) {
    leakage += o.leakage;
    leakage_sq += o.leakage_sq;
    dbl += o.dbl;
    dbl_sq += o.dbl_sq;
    bell += o.bell;
    never += o.never;
  }
};

class Unraveler {
 public:
  Unraveler(const ScanConfig& config, double t_pi) : scheme_(build_flagged_scheme(config.scheme)) {
    pulse_ = config.pulse_for(t_pi);
    const std::size_t n = scheme_.size();
    gamma_ = scheme_.total_decay_rates();

    // Union-find over drive couplings.
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto root = [&](std::size_t i) {
      while (parent[i] != i) i = parent[i] = parent[parent[i]];
      return i;
    };
    for (const auto& c : scheme_.couplings())
      if (c.q == pulse_.q) parent[root(c.ground)] = root(c.excited);
    block_of_.assign(n, 0);
    local_.assign(n, 0);
    std::vector<std::size_t> block_of_root(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t r = root(i);
      if (block_of_root[r] == n) {
        block_of_root[r] = blocks_.size();
        blocks_.emplace_back();
      }
      Block& b = blocks_[block_of_root[r]];
      block_of_[i] = block_of_root[r];
      local_[i] = b.levels.size();
      b.levels.push_back(i);
      b.diag.emplace_back(scheme_.level(i).energy_offset, -0.5 * gamma_[i]);
    }
    const double sigma = pulse_.width;
    for (const auto& c : scheme_.couplings()) {
      if (c.q != pulse_.q) continue;
      blocks_[block_of_[c.ground]].couplings.push_back(
          LocalCoupling{static_cast<int>(local_[c.ground]), static_cast<int>(local_[c.excited]), c.factor});
    }
    for (auto& b : blocks_) {
      double scale = 0.0;
      for (const auto& d : b.diag) scale = std::max(scale, std::abs(d));
      for (const auto& c : b.couplings) scale = std::max(scale, 0.5 * std::abs(pulse_.omega_peak * c.factor));
      b.dt = sigma / 50.0;
      if (scale > 0.0) b.dt = std::min(b.dt, 0.05 / scale);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const Level& l = scheme_.level(i);
      share_f3_.push_back(l.excited() && !l.decayed ? branching_ratio(AngularMomentum::integer(3), l.f) : 0.0);
    }
    out_channels_.resize(n);
    for (const auto& d : scheme_.decays()) out_channels_[d.from].push_back(d);
    tabulate_first_segment();
  }

  Scores run_chunk(std::size_t count, std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    Scores s;
    for (std::size_t k = 0; k < count; ++k) run_one(rng, s);
    return s;
  }

 private:
  static double uniform(std::mt19937_64& rng) {
    // (0, 1]
    return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
  }

  void derivative(const Block& b, const Vec& psi, double t, Vec& out) const {
    const double half = 0.5 * pulse_.envelope(t);
    const cplx minus_i(0.0, -1.0);
    for (Eigen::Index i = 0; i < psi.size(); ++i) out[i] = minus_i * b.diag[i] * psi[i];
    if (half == 0.0) return;
    for (const auto& c : b.couplings) {
      const cplx h = minus_i * (half * c.factor);
      out[c.b] += h * psi[c.a];
      out[c.a] += h * psi[c.b];
    }
  }

  Vec rk4(const Block& b, const Vec& psi, double t, double h) const {
    Vec k1(psi.size()), k2(psi.size()), k3(psi.size()), k4(psi.size());
    derivative(b, psi, t, k1);
    derivative(b, psi + 0.5 * h * k1, t + 0.5 * h, k2);
    derivative(b, psi + 0.5 * h * k2, t + 0.5 * h, k3);
    derivative(b, psi + h * k3, t + h, k4);
    return psi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  // Jump time inside [t, t+h] where |psi|^2 crosses r, by bisection on the
  // sub-step length.
  std::pair<double, Vec> refine(const Block& b, const Vec& psi, double t, double h, double r) const {
    double lo = 0.0, hi = h;
    for (int it = 0; it < 50 && hi - lo > 1e-6 * h; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (rk4(b, psi, t, mid).squaredNorm() > r)
        lo = mid;
      else
        hi = mid;
    }
    return {t + hi, rk4(b, psi, t, hi)};
  }

  void tabulate_first_segment() {
    start_level_ = scheme_.index(Manifold::ground_f3, 0);
    const Block& b = blocks_[block_of_[start_level_]];
    Vec psi = Vec::Zero(static_cast<Eigen::Index>(b.levels.size()));
    psi[static_cast<Eigen::Index>(local_[start_level_])] = 1.0;
    double t = pulse_.t_start;
    first_t_.push_back(t);
    first_psi_.push_back(psi);
    first_norm_.push_back(1.0);
    while (t < pulse_.t_end) {
      const double h = std::min(b.dt, pulse_.t_end - t);
      psi = rk4(b, psi, t, h);
      t = (pulse_.t_end - t <= b.dt) ? pulse_.t_end : t + h;
      first_t_.push_back(t);
      first_psi_.push_back(psi);
      first_norm_.push_back(psi.squaredNorm());
    }
  }

  // Result of a no-jump segment: either a jump at `t` with state psi, or the
  // end of the window.
  struct Segment {
    bool jumped = false;
    double t = 0.0;
    Vec psi;
  };

  Segment first_segment(double r) const {
    // Norm is non-increasing; find the first tabulated point below r.
    const auto it = std::find_if(first_norm_.begin(), first_norm_.end(), [r](double v) { return v < r; });
    if (it == first_norm_.end()) return Segment{false, pulse_.t_end, first_psi_.back()};
    const std::size_t k = static_cast<std::size_t>(it - first_norm_.begin());
    const Block& b = blocks_[block_of_[start_level_]];
    auto [tj, psi] = refine(b, first_psi_[k - 1], first_t_[k - 1], first_t_[k] - first_t_[k - 1], r);
    return Segment{true, tj, psi};
  }

  Segment segment(const Block& b, Vec psi, double t, double r) const {
    // Blocks without decay or drive never jump.
    bool can_decay = false;
    for (std::size_t i : b.levels) can_decay = can_decay || gamma_[i] > 0.0;
    if (!can_decay && b.couplings.empty()) return Segment{false, pulse_.t_end, psi};
    while (t < pulse_.t_end) {
      const double h = std::min(b.dt, pulse_.t_end - t);
      Vec next = rk4(b, psi, t, h);
      if (next.squaredNorm() < r) {
        auto [tj, pj] = refine(b, psi, t, h, r);
        return Segment{true, tj, pj};
      }
      psi = std::move(next);
      t = (pulse_.t_end - t <= b.dt) ? pulse_.t_end : t + h;
    }
    return Segment{false, pulse_.t_end, psi};
  }

  void score_end(const Block& b, const Vec& psi, Scores& s) const {
    const double norm = psi.squaredNorm();
    double leak = 0.0, dbl = 0.0, bell = 0.0, never = 0.0;
    for (std::size_t k = 0; k < b.levels.size(); ++k) {
      const std::size_t i = b.levels[k];
      const double p = std::norm(psi[static_cast<Eigen::Index>(k)]) / norm;
      const Level& l = scheme_.level(i);
      if (l.manifold == Manifold::ground_f4_sink)
        leak += p;
      else if (!l.excited())
        (l.decayed ? bell : never) += p;
      else if (l.decayed)
        dbl += p;
      else {
        bell += share_f3_[i] * p;
        leak += (1.0 - share_f3_[i]) * p;
      }
    }
    s.add(leak, dbl, bell, never);
  }

  void run_one(std::mt19937_64& rng, Scores& s) const {
    Segment seg = first_segment(uniform(rng));
    const Block* block = &blocks_[block_of_[start_level_]];
    while (true) {
      if (!seg.jumped) {
        score_end(*block, seg.psi, s);
        return;
      }
      // Pick the channel with probability proportional to rate * |psi_from|^2.
      double total = 0.0;
      for (std::size_t k = 0; k < block->levels.size(); ++k)
        total += gamma_[block->levels[k]] * std::norm(seg.psi[static_cast<Eigen::Index>(k)]);
      double u = uniform(rng) * total;
      const DecayChannel* chosen = nullptr;
      const DecayChannel* last = nullptr;
      for (std::size_t k = 0; k < block->levels.size() && !chosen; ++k) {
        const double w = std::norm(seg.psi[static_cast<Eigen::Index>(k)]);
        if (w == 0.0) continue;
        for (const auto& d : out_channels_[block->levels[k]]) {
          last = &d;
          u -= d.rate * w;
          if (u <= 0.0) {
            chosen = &d;
            break;
          }
        }
      }
      if (!chosen) chosen = last;  // rounding at the upper end
      if (!chosen) throw SolverError("trajectory jump selection failed");
      const Level& from = scheme_.level(chosen->from);
      if (from.decayed) {
        s.add(0.0, 1.0, 0.0, 0.0);
        return;
      }
      if (scheme_.level(chosen->to).manifold == Manifold::ground_f4_sink) {
        s.add(1.0, 0.0, 0.0, 0.0);
        return;
      }
      block = &blocks_[block_of_[chosen->to]];
      Vec psi = Vec::Zero(static_cast<Eigen::Index>(block->levels.size()));
      psi[static_cast<Eigen::Index>(local_[chosen->to])] = 1.0;
      seg = segment(*block, std::move(psi), seg.t, uniform(rng));
    }
  }

  LevelScheme scheme_;
  PulseProfile pulse_;
  std::vector<double> gamma_;
  std::vector<Block> blocks_;
  std::vector<std::size_t> block_of_, local_;
  std::vector<double> share_f3_;
  std::vector<std::vector<DecayChannel>> out_channels_;
  std::size_t start_level_ = 0;
  std::vector<double> first_t_, first_norm_;
  std::vector<Vec> first_psi_;
};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

UnravelingResult unravel_trajectories(double t_pi, const ScanConfig& config, std::size_t trajectories,
                                      std::uint64_t seed, std::size_t threads) {
  config.validate();
  if (trajectories < 2) throw InputError("need at least two trajectories");
  const Unraveler engine(config, t_pi);

  constexpr std::size_t kChunks = 64;
  std::vector<Scores> parts(kChunks);
  parallel_for(
      kChunks,
      [&](std::size_t c) {
        const std::size_t begin = trajectories * c / kChunks, end = trajectories * (c + 1) / kChunks;
        parts[c] = engine.run_chunk(end - begin, splitmix64(seed + c));
      },
      threads);
  Scores total;
  for (const auto& p : parts) total.merge(p);

  const double n = static_cast<double>(trajectories);
  auto stderr_of = [n](double sum, double sum_sq) {
    const double mean = sum / n;
    const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    return std::sqrt(var / n);
  };
  UnravelingResult r;
  r.t_pi = t_pi;
  r.trajectories = trajectories;
  r.leakage = total.leakage / n;
  r.leakage_stderr = stderr_of(total.leakage, total.leakage_sq);
  r.double_excitation = total.dbl / n;
  r.double_excitation_stderr = stderr_of(total.dbl, total.dbl_sq);
  r.bell_channel = total.bell / n;
  r.never_excited = total.never / n;
  return r;
}

}  // namespace atomsim
