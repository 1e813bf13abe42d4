#pragma once

// Collection of dipole emission by a lens of given NA and coupling of the
// collimated field into a single-mode fiber, averaged over the thermal
// position distribution of the atom in an optical tweezer.

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace atomsim {

using Vec3 = std::array<double, 3>;
using CVec3 = std::array<std::complex<double>, 3>;

enum class Polarization { sigma_plus, sigma_minus, pi };
std::string to_string(Polarization p);
Polarization polarization_from_string(const std::string& s);

enum class FiberPolarization { x, y };

struct OpticalSystem {
  double na = 0.55;
  double focal_length = 12.5e-3;        // m
  double pupil_mode_waist = 9.94e-3;    // w_col, m
  double wavelength = 852e-9;           // m
  std::size_t grid = 512;               // samples per pupil axis
  double min_samples_per_fringe = 8.0;

  double theta_max() const;
  double aperture_radius() const;  // f tan(theta_max)
  double wavenumber() const;
  // Copy with the focal length chosen so that aperture_radius() == r_eff.
  OpticalSystem with_aperture(double r_eff) const;
  void validate() const;
};

struct TrapGeometry {
  double trap_depth = 200e-6;              // U / k_B, K
  double trap_waist = 1.10e-6;             // w0, m
  double trap_wavelength = 1064e-9;        // m
  double atom_temperature = 5e-6;          // K
  double atom_mass = 132.905451961 * 1.66053906660e-27;  // kg
  double input_waist = 12e-3;              // m, metadata only

  double rayleigh_range() const;
  void validate() const;
};

struct EmissionChannel {
  Polarization polarization = Polarization::sigma_plus;
  double branching = 2.0 / 7.0;
};

// sigma+, sigma- (2/7 each) and pi (3/7).
std::vector<EmissionChannel> cesium_emission_channels();
// The sigma channels only, which is what the heralding scheme collects.
std::vector<EmissionChannel> collected_channels();

// Dipole unit vector e_p.
CVec3 dipole_vector(Polarization p);

// Far-field polarization vector (e_p - (e_r . e_p) e_r) exp(ikr) / r.
CVec3 dipole_field(const Vec3& r, Polarization p, double wavenumber);

// Fraction of a photon of polarization p emitted into the cone of half-angle asin(na).
double collection_efficiency_analytic(double na, Polarization p);
// Same fraction by Gauss-Legendre quadrature of the dipole pattern over the cone.
double collection_efficiency_numeric(double na, Polarization p, std::size_t order = 64);
// Total emitted power (3/8pi) int |E|^2 r^2 dOmega over the full sphere; 1 by construction.
double dipole_power_numeric(Polarization p, std::size_t order = 64);

struct PupilField {
  std::size_t n = 0;
  double dx = 0.0;
  std::vector<double> coords;      // grid coordinate per axis, m
  Eigen::MatrixXcd ex, ey, ez;     // (row = y index, col = x index); zero outside the aperture
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> inside;
};

// Field in the pupil plane after the lens phase exp(-ik(sqrt(rho^2+f^2)-f)),
// for an atom displaced by atom_offset from the focus. Throws InputError
// when the grid would under-sample the offset-induced phase.
PupilField pupil_field(const Vec3& atom_offset, Polarization p, const OpticalSystem& optics);

struct FiberOverlap {
  double x = 0.0;
  double y = 0.0;
  double total() const { return x + y; }
};

// |int E . G dA|^2 / (N_photon N_fiber) for x and y fiber polarizations, with
// G the Gaussian mode of waist w_col normalized to unit power.
FiberOverlap fiber_overlap(const Vec3& atom_offset, Polarization p, const OpticalSystem& optics);

// Phase step between neighbouring grid samples induced by the offset (rad).
double max_phase_step(const Vec3& atom_offset, const OpticalSystem& optics);

struct TrapFrequencies {
  double omega_r = 0.0;  // rad/s
  double omega_z = 0.0;
};
TrapFrequencies trap_frequencies(const TrapGeometry& trap);

struct ThermalWidths {
  double sigma_r = 0.0;  // m, per transverse axis
  double sigma_z = 0.0;
};
ThermalWidths thermal_widths(const TrapGeometry& trap);

enum class ThermalMethod {
  axisymmetric,    // Gauss-Laguerre in rho^2 times Gauss-Hermite in z
  gauss_hermite,   // tensor Gauss-Hermite in x, y, z
  monte_carlo,
};

struct ThermalOptions {
  ThermalMethod method = ThermalMethod::axisymmetric;
  std::size_t radial_order = 8;
  std::size_t axial_order = 10;
  std::size_t hermite_order = 15;   // per axis for gauss_hermite
  std::size_t samples = 4000;       // monte_carlo
  std::uint64_t seed = 1;
  // When positive, a convergence estimate above this raises ConvergenceError.
  double tolerance = 0.0;
  std::size_t threads = 0;
};

struct ThermalResult {
  double eta_cc = 0.0;
  double convergence_estimate = 0.0;
  std::vector<std::pair<Polarization, double>> mean_overlap;  // <eta_cp> per channel
  ThermalWidths widths;
  std::size_t evaluations = 0;
};

// eta_cc = sum_p b_p eta_col(p) <eta_cp(r', p)>_thermal, with eta_col taken
// at the focus (its offset dependence is second order in r'/f).
ThermalResult thermal_average(const OpticalSystem& optics, const TrapGeometry& trap,
                              const std::vector<EmissionChannel>& channels, const ThermalOptions& options = {});

struct Losses {
  double transmission = 0.75;
  double detection = 0.52;
  double pumping = 0.991;
  double excitation = 0.983;
};

double success_probability(double eta_cc, const Losses& losses);

struct ApertureSweepRow {
  double r_eff = 0.0;
  double temperature = 0.0;
  double eta_cc = 0.0;
  double convergence_estimate = 0.0;
};

std::vector<ApertureSweepRow> efficiency_vs_aperture(const OpticalSystem& base, const TrapGeometry& trap,
                                                     const std::vector<double>& r_eff_list,
                                                     const std::vector<double>& temperatures,
                                                     const ThermalOptions& options = {});

}  // namespace atomsim
