#include "atomsim/level_scheme.hpp"

#include <cmath>
#include <cstdlib>

#include "atomsim/errors.hpp"

namespace atomsim {

std::string to_string(Manifold m) {
  switch (m) {
    case Manifold::ground_f3: return "g3";
    case Manifold::ground_f4_sink: return "sink";
    case Manifold::excited_f2: return "e2";
    case Manifold::excited_f3: return "e3";
    case Manifold::excited_f4: return "e4";
  }
  return "?";
}

bool is_excited(Manifold m) {
  return m == Manifold::excited_f2 || m == Manifold::excited_f3 || m == Manifold::excited_f4;
}

std::string Level::label() const {
  if (manifold == Manifold::ground_f4_sink) return "sink";
  const int mm = m();
  std::string s = to_string(manifold) + (decayed ? "d" : "") + "_m";
  if (mm > 0) s += "+";
  return s + std::to_string(mm);
}

void SchemeConfig::validate() const {
  if (!std::isfinite(gamma_rad_per_s) || gamma_rad_per_s <= 0.0) throw InputError("gamma must be positive and finite");
  if (!std::isfinite(detuning_rad_per_s)) throw InputError("detuning must be finite");
  if (!std::isfinite(offset_f3_rad_per_s) || !std::isfinite(offset_f4_rad_per_s))
    throw InputError("hyperfine offsets must be finite");
  for (const auto& [label, value] : extra_offsets) {
    if (!std::isfinite(value)) throw InputError("extra offset for " + label + " must be finite");
  }
}

LevelScheme::LevelScheme(std::vector<Level> levels, std::vector<DipoleCoupling> couplings,
                         std::vector<DecayChannel> decays, double gamma)
    : levels_(std::move(levels)), couplings_(std::move(couplings)), decays_(std::move(decays)), gamma_(gamma) {}

std::optional<std::size_t> LevelScheme::find(Manifold manifold, int m, bool decayed) const {
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    const Level& l = levels_[i];
    if (l.manifold != manifold || l.decayed != decayed) continue;
    if (manifold == Manifold::ground_f4_sink || l.two_m == 2 * m) return i;
  }
  return std::nullopt;
}

std::size_t LevelScheme::index(Manifold manifold, int m, bool decayed) const {
  auto i = find(manifold, m, decayed);
  if (!i) throw InputError("level " + to_string(manifold) + (decayed ? "d" : "") + " m=" + std::to_string(m) +
                           " not present in scheme");
  return *i;
}

std::size_t LevelScheme::sink() const { return index(Manifold::ground_f4_sink, 0); }

std::vector<std::string> LevelScheme::labels() const {
  std::vector<std::string> out;
  out.reserve(levels_.size());
  for (const auto& l : levels_) out.push_back(l.label());
  return out;
}

std::vector<double> LevelScheme::total_decay_rates() const {
  std::vector<double> out(levels_.size(), 0.0);
  for (const auto& d : decays_) out[d.from] += d.rate;
  return out;
}

std::vector<DipoleCoupling> LevelScheme::couplings_for(int q) const {
  std::vector<DipoleCoupling> out;
  for (const auto& c : couplings_)
    if (c.q == q) out.push_back(c);
  return out;
}

namespace {

constexpr AngularMomentum kF2 = AngularMomentum::integer(2);
constexpr AngularMomentum kF3 = AngularMomentum::integer(3);
constexpr AngularMomentum kF4 = AngularMomentum::integer(4);

void add_manifold(std::vector<Level>& levels, Manifold manifold, AngularMomentum f, double offset, bool decayed) {
  for (int two_m = -f.two_j; two_m <= f.two_j; two_m += 2) {
    levels.push_back(Level{manifold, f, two_m, offset, decayed});
  }
}

}  // namespace

LevelScheme build_level_scheme(const SchemeConfig& config) {
  config.validate();
  const double delta = config.detuning_rad_per_s;
  const double gamma = config.gamma_rad_per_s;

  std::vector<Level> levels;
  add_manifold(levels, Manifold::ground_f3, kF3, 0.0, false);
  add_manifold(levels, Manifold::excited_f2, kF2, delta, false);
  add_manifold(levels, Manifold::excited_f3, kF3, delta + config.offset_f3_rad_per_s, false);
  add_manifold(levels, Manifold::excited_f4, kF4, delta + config.offset_f4_rad_per_s, false);
  levels.push_back(Level{Manifold::ground_f4_sink, kF4, 0, 0.0, false});
  if (config.flagged) {
    add_manifold(levels, Manifold::ground_f3, kF3, 0.0, true);
    add_manifold(levels, Manifold::excited_f2, kF2, delta, true);
  }

  for (const auto& [label, value] : config.extra_offsets) {
    bool found = false;
    for (auto& l : levels) {
      if (l.label() == label) {
        l.energy_offset += value;
        found = true;
      }
    }
    if (!found) throw InputError("extra offset refers to unknown level '" + label + "'");
  }

  auto find = [&](Manifold manifold, int two_m, bool decayed) -> std::size_t {
    for (std::size_t i = 0; i < levels.size(); ++i) {
      const Level& l = levels[i];
      if (l.manifold == manifold && l.decayed == decayed &&
          (manifold == Manifold::ground_f4_sink || l.two_m == two_m))
        return i;
    }
    return levels.size();
  };
  const std::size_t sink = find(Manifold::ground_f4_sink, 0, false);

  std::vector<DipoleCoupling> couplings;
  std::vector<DecayChannel> decays;
  for (std::size_t e = 0; e < levels.size(); ++e) {
    const Level& ex = levels[e];
    if (!ex.excited()) continue;

    // Drive: unflagged ground couples to unflagged f'=2,3,4; flagged ground
    // only to the flagged f'=2 copy.
    for (std::size_t g = 0; g < levels.size(); ++g) {
      const Level& gr = levels[g];
      if (gr.manifold != Manifold::ground_f3 || gr.decayed != ex.decayed) continue;
      const int two_q = ex.two_m - gr.two_m;
      if (std::abs(two_q) > 2) continue;
      const double c = clebsch_gordan(ex.f, ex.two_m, (gr.two_m - ex.two_m) / 2, gr.f, gr.two_m);
      if (c != 0.0) couplings.push_back(DipoleCoupling{g, e, two_q / 2, c});
    }

    // Decay: everything into f=3 lands in the flagged copy when one exists;
    // everything into f=4 is aggregated into the sink.
    const bool to_flagged = config.flagged;
    for (int two_m = -kF3.two_j; two_m <= kF3.two_j; two_m += 2) {
      const double r = decay_rate(kF3, two_m, ex.f, ex.two_m, gamma);
      if (r > 0.0) decays.push_back(DecayChannel{e, find(Manifold::ground_f3, two_m, to_flagged), r});
    }
    double to_sink = 0.0;
    if (std::abs(kF4.two_j - ex.f.two_j) <= 2) {
      for (int two_m = -kF4.two_j; two_m <= kF4.two_j; two_m += 2)
        to_sink += decay_rate(kF4, two_m, ex.f, ex.two_m, gamma);
    }
    if (to_sink > 0.0) decays.push_back(DecayChannel{e, sink, to_sink});
  }

  return LevelScheme(std::move(levels), std::move(couplings), std::move(decays), gamma);
}

LevelScheme build_flagged_scheme(SchemeConfig config) {
  config.flagged = true;
  return build_level_scheme(config);
}

}  // namespace atomsim
