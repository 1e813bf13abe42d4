#pragma once

// The cesium D2 excitation subsystem: ground f=3, an aggregate f=4 sink,
// and excited f'=2,3,4, optionally extended with decayed-flag copies that
// separate first-generation decay products from re-excited population.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "atomsim/angular.hpp"

namespace atomsim {

enum class Manifold { ground_f3, ground_f4_sink, excited_f2, excited_f3, excited_f4 };

std::string to_string(Manifold m);
bool is_excited(Manifold m);

struct Level {
  Manifold manifold = Manifold::ground_f3;
  AngularMomentum f;
  int two_m = 0;               // meaningless for the sink
  double energy_offset = 0.0;  // rad/s in the frame rotating at the laser frequency
  bool decayed = false;

  bool excited() const { return is_excited(manifold); }
  int m() const { return two_m / 2; }
  std::string label() const;
};

// Drive matrix element between ground g and excited e for photon
// polarization q = m_e - m_g; factor = <f' m'; 1 (m-m') | f m>.
struct DipoleCoupling {
  std::size_t ground = 0;
  std::size_t excited = 0;
  int q = 0;
  double factor = 0.0;
};

struct DecayChannel {
  std::size_t from = 0;  // excited
  std::size_t to = 0;    // ground or sink
  double rate = 0.0;     // rad/s
};

struct SchemeConfig {
  double gamma_rad_per_s = 1.0 / 30.473e-9;
  double detuning_rad_per_s = 0.0;
  // f'=3 and f'=4 energies relative to f'=2 (6p3/2 hyperfine splittings).
  double offset_f3_rad_per_s = 2.0 * 3.14159265358979323846 * 151.2247e6;
  double offset_f4_rad_per_s = 2.0 * 3.14159265358979323846 * (151.2247e6 + 201.2871e6);
  bool flagged = false;
  // Optional extra diagonal shift per level label (sensitivity studies, e.g. Zeeman).
  std::vector<std::pair<std::string, double>> extra_offsets;

  void validate() const;
};

class LevelScheme {
 public:
  LevelScheme() = default;
  LevelScheme(std::vector<Level> levels, std::vector<DipoleCoupling> couplings, std::vector<DecayChannel> decays,
              double gamma);

  std::size_t size() const { return levels_.size(); }
  const std::vector<Level>& levels() const { return levels_; }
  const Level& level(std::size_t i) const { return levels_.at(i); }
  const std::vector<DipoleCoupling>& couplings() const { return couplings_; }
  const std::vector<DecayChannel>& decays() const { return decays_; }
  double gamma() const { return gamma_; }

  std::optional<std::size_t> find(Manifold manifold, int m, bool decayed = false) const;
  std::size_t index(Manifold manifold, int m, bool decayed = false) const;
  std::size_t sink() const;
  std::vector<std::string> labels() const;

  // Sum of decay rates out of each level.
  std::vector<double> total_decay_rates() const;
  // Couplings driven by polarization q.
  std::vector<DipoleCoupling> couplings_for(int q) const;

 private:
  std::vector<Level> levels_;
  std::vector<DipoleCoupling> couplings_;
  std::vector<DecayChannel> decays_;
  double gamma_ = 0.0;
};

// 29 levels (7 + 5 + 7 + 9 + sink), or 41 when config.flagged is set.
LevelScheme build_level_scheme(const SchemeConfig& config);

// Same as build_level_scheme with flagged = true.
LevelScheme build_flagged_scheme(SchemeConfig config);

}  // namespace atomsim
