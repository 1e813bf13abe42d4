#include "atomsim/collection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "atomsim/errors.hpp"
#include "atomsim/parallel.hpp"
#include "atomsim/quadrature.hpp"

namespace atomsim {

namespace {

using cplx = std::complex<double>;
constexpr double kBoltzmann = 1.380649e-23;

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

}  // namespace

std::string to_string(Polarization p) {
  switch (p) {
    case Polarization::sigma_plus: return "sigma+";
    case Polarization::sigma_minus: return "sigma-";
    case Polarization::pi: return "pi";
  }
  return "?";
}

Polarization polarization_from_string(const std::string& s) {
  if (s == "sigma+" || s == "sigma_plus") return Polarization::sigma_plus;
  if (s == "sigma-" || s == "sigma_minus") return Polarization::sigma_minus;
  if (s == "pi") return Polarization::pi;
  throw InputError("unknown polarization '" + s + "'");
}

double OpticalSystem::theta_max() const { return std::asin(na); }
double OpticalSystem::aperture_radius() const { return focal_length * std::tan(theta_max()); }
double OpticalSystem::wavenumber() const { return 2.0 * std::numbers::pi / wavelength; }

OpticalSystem OpticalSystem::with_aperture(double r_eff) const {
  if (!(r_eff > 0.0)) throw InputError("aperture radius must be positive");
  OpticalSystem o = *this;
  o.focal_length = r_eff / std::tan(theta_max());
  return o;
}

void OpticalSystem::validate() const {
  if (!(na > 0.0 && na < 1.0)) throw InputError("NA must lie in (0, 1)");
  if (!(focal_length > 0.0) || !std::isfinite(focal_length)) throw InputError("focal length must be positive");
  if (!(pupil_mode_waist > 0.0)) throw InputError("pupil mode waist must be positive");
  if (!(wavelength > 0.0)) throw InputError("wavelength must be positive");
  if (grid < 16) throw InputError("pupil grid must have at least 16 samples per axis");
  if (!(min_samples_per_fringe > 0.0)) throw InputError("min_samples_per_fringe must be positive");
}

double TrapGeometry::rayleigh_range() const { return std::numbers::pi * trap_waist * trap_waist / trap_wavelength; }

void TrapGeometry::validate() const {
  if (!(trap_depth > 0.0) || !(trap_waist > 0.0) || !(trap_wavelength > 0.0) || !(atom_mass > 0.0))
    throw InputError("trap depth, waist, wavelength and mass must be positive");
  if (!(atom_temperature >= 0.0) || !std::isfinite(atom_temperature))
    throw InputError("atom temperature must be non-negative");
}

std::vector<EmissionChannel> cesium_emission_channels() {
  return {{Polarization::sigma_plus, 2.0 / 7.0}, {Polarization::sigma_minus, 2.0 / 7.0}, {Polarization::pi, 3.0 / 7.0}};
}

std::vector<EmissionChannel> collected_channels() {
  return {{Polarization::sigma_plus, 2.0 / 7.0}, {Polarization::sigma_minus, 2.0 / 7.0}};
}

CVec3 dipole_vector(Polarization p) {
  const double s = 1.0 / std::numbers::sqrt2;
  switch (p) {
    case Polarization::sigma_plus: return {cplx(s, 0), cplx(0, s), cplx(0, 0)};
    case Polarization::sigma_minus: return {cplx(s, 0), cplx(0, -s), cplx(0, 0)};
    case Polarization::pi: return {cplx(0, 0), cplx(0, 0), cplx(1, 0)};
  }
  return {};
}

CVec3 dipole_field(const Vec3& r, Polarization p, double wavenumber) {
  const double d = norm(r);
  if (!(d > 0.0)) throw InputError("dipole field is undefined at the origin");
  const CVec3 e = dipole_vector(p);
  const Vec3 u{r[0] / d, r[1] / d, r[2] / d};
  const cplx proj = u[0] * e[0] + u[1] * e[1] + u[2] * e[2];
  const cplx phase = std::polar(1.0 / d, wavenumber * d);
  return {(e[0] - proj * u[0]) * phase, (e[1] - proj * u[1]) * phase, (e[2] - proj * u[2]) * phase};
}

double collection_efficiency_analytic(double na, Polarization p) {
  if (!(na > 0.0 && na <= 1.0)) throw InputError("NA must lie in (0, 1]");
  const double c = std::cos(std::asin(na));
  if (p == Polarization::pi) return 0.5 - 0.75 * c + 0.25 * c * c * c;
  return 0.5 - 0.375 * c - 0.125 * c * c * c;
}

namespace {

// (3/8pi) int |E|^2 r^2 dOmega over theta in [0, theta_max].
double cone_power(double theta_max, Polarization p, std::size_t order) {
  const QuadratureRule gl = gauss_legendre(order);
  const double c_lo = std::cos(theta_max);
  NeumaierSum acc;
  for (std::size_t i = 0; i < gl.size(); ++i) {
    const double c = c_lo + 0.5 * (1.0 - c_lo) * (gl.nodes[i] + 1.0);
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    for (std::size_t j = 0; j < gl.size(); ++j) {
      const double phi = std::numbers::pi * (gl.nodes[j] + 1.0);
      const Vec3 r{s * std::cos(phi), s * std::sin(phi), c};
      const CVec3 e = dipole_field(r, p, 0.0);
      const double i2 = std::norm(e[0]) + std::norm(e[1]) + std::norm(e[2]);
      acc.add(gl.weights[i] * gl.weights[j] * i2);
    }
  }
  const double jacobian = 0.5 * (1.0 - c_lo) * std::numbers::pi;
  return 3.0 / (8.0 * std::numbers::pi) * jacobian * acc.value();
}

}  // namespace

double collection_efficiency_numeric(double na, Polarization p, std::size_t order) {
  if (!(na > 0.0 && na <= 1.0)) throw InputError("NA must lie in (0, 1]");
  return cone_power(std::asin(na), p, order);
}

double dipole_power_numeric(Polarization p, std::size_t order) { return cone_power(std::numbers::pi, p, order); }

namespace {

// Sampling of the pupil disk shared by pupil_field and fiber_overlap.
struct PupilGrid {
  std::size_t n = 0;
  double radius = 0.0, dx = 0.0, f = 0.0, k = 0.0, w = 0.0;
  std::vector<double> coords;

  explicit PupilGrid(const OpticalSystem& o)
      : n(o.grid), radius(o.aperture_radius()), f(o.focal_length), k(o.wavenumber()), w(o.pupil_mode_waist) {
    dx = 2.0 * radius / static_cast<double>(n - 1);
    coords.resize(n);
    for (std::size_t i = 0; i < n; ++i) coords[i] = -radius + dx * static_cast<double>(i);
  }

  // Columns of row j that lie inside the aperture.
  std::pair<std::size_t, std::size_t> row_span(std::size_t j) const {
    const double y = coords[j];
    const double half = std::sqrt(std::max(0.0, radius * radius - y * y));
    std::size_t lo = 0, hi = n;
    while (lo < n && coords[lo] < -half) ++lo;
    while (hi > lo && coords[hi - 1] > half) --hi;
    return {lo, hi};
  }

  // Field at pupil point (x, y) with the lens phase applied. The phase
  // k(|r - r'| - |r|) is formed without cancellation.
  CVec3 field(double x, double y, const Vec3& rp, const CVec3& e) const {
    const Vec3 r{x, y, f};
    const Vec3 d{x - rp[0], y - rp[1], f - rp[2]};
    const double dn = norm(d), r0 = norm(r);
    const double path = (-2.0 * dot(r, rp) + dot(rp, rp)) / (dn + r0);
    const Vec3 u{d[0] / dn, d[1] / dn, d[2] / dn};
    const cplx proj = u[0] * e[0] + u[1] * e[1] + u[2] * e[2];
    const cplx phase = std::polar(1.0 / dn, k * path);
    return {(e[0] - proj * u[0]) * phase, (e[1] - proj * u[1]) * phase, (e[2] - proj * u[2]) * phase};
  }

  double phase_gradient(double x, double y, const Vec3& rp) const {
    const Vec3 d{x - rp[0], y - rp[1], f - rp[2]};
    const double dn = norm(d), r0 = std::sqrt(x * x + y * y + f * f);
    const double gx = k * (d[0] / dn - x / r0), gy = k * (d[1] / dn - y / r0);
    return std::max(std::abs(gx), std::abs(gy));
  }
};

void guard_sampling(const PupilGrid& g, const Vec3& rp, const OpticalSystem& optics) {
  const double step = max_phase_step(rp, optics);
  const double limit = 2.0 * std::numbers::pi / optics.min_samples_per_fringe;
  if (step > limit) {
    std::ostringstream msg;
    msg << "pupil grid of " << g.n << " samples aliases the phase of offset (" << rp[0] << ", " << rp[1] << ", "
        << rp[2] << ") m: " << step << " rad per sample exceeds " << limit;
    throw InputError(msg.str());
  }
}

}  // namespace

double max_phase_step(const Vec3& atom_offset, const OpticalSystem& optics) {
  optics.validate();
  const PupilGrid g(optics);
  // The gradient is smooth over the disk; a coarse scan including the rim suffices.
  constexpr int kScan = 64;
  double worst = 0.0;
  for (int j = 0; j <= kScan; ++j) {
    for (int i = 0; i <= kScan; ++i) {
      const double x = -g.radius + 2.0 * g.radius * i / kScan;
      const double y = -g.radius + 2.0 * g.radius * j / kScan;
      if (x * x + y * y > g.radius * g.radius * (1.0 + 1e-12)) continue;
      worst = std::max(worst, g.phase_gradient(x, y, atom_offset));
    }
  }
  return worst * g.dx;
}

PupilField pupil_field(const Vec3& atom_offset, Polarization p, const OpticalSystem& optics) {
  optics.validate();
  const PupilGrid g(optics);
  guard_sampling(g, atom_offset, optics);
  const CVec3 e = dipole_vector(p);
  PupilField out;
  out.n = g.n;
  out.dx = g.dx;
  out.coords = g.coords;
  const auto n = static_cast<Eigen::Index>(g.n);
  out.ex = Eigen::MatrixXcd::Zero(n, n);
  out.ey = Eigen::MatrixXcd::Zero(n, n);
  out.ez = Eigen::MatrixXcd::Zero(n, n);
  out.inside = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, n, false);
  for (std::size_t j = 0; j < g.n; ++j) {
    const auto [lo, hi] = g.row_span(j);
    for (std::size_t i = lo; i < hi; ++i) {
      const CVec3 v = g.field(g.coords[i], g.coords[j], atom_offset, e);
      const auto r = static_cast<Eigen::Index>(j), c = static_cast<Eigen::Index>(i);
      out.ex(r, c) = v[0];
      out.ey(r, c) = v[1];
      out.ez(r, c) = v[2];
      out.inside(r, c) = true;
    }
  }
  return out;
}

FiberOverlap fiber_overlap(const Vec3& atom_offset, Polarization p, const OpticalSystem& optics) {
  optics.validate();
  const PupilGrid g(optics);
  guard_sampling(g, atom_offset, optics);
  const CVec3 e = dipole_vector(p);

  // Separable, unit-power Gaussian mode: G = exp(-rho^2/w^2) / (sqrt(pi/2) w).
  std::vector<double> gauss(g.n);
  for (std::size_t i = 0; i < g.n; ++i) gauss[i] = std::exp(-g.coords[i] * g.coords[i] / (g.w * g.w));
  const double g_norm = 1.0 / (std::sqrt(std::numbers::pi / 2.0) * g.w);

  NeumaierSum sx_re, sx_im, sy_re, sy_im, power;
  for (std::size_t j = 0; j < g.n; ++j) {
    const auto [lo, hi] = g.row_span(j);
    cplx rx = 0.0, ry = 0.0;
    double rp = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      const CVec3 v = g.field(g.coords[i], g.coords[j], atom_offset, e);
      const double gi = gauss[i];
      rx += v[0] * gi;
      ry += v[1] * gi;
      rp += std::norm(v[0]) + std::norm(v[1]) + std::norm(v[2]);
    }
    const double gj = gauss[j];
    sx_re.add(rx.real() * gj);
    sx_im.add(rx.imag() * gj);
    sy_re.add(ry.real() * gj);
    sy_im.add(ry.imag() * gj);
    power.add(rp);
  }
  const double da = g.dx * g.dx;
  const double n_photon = power.value() * da;
  FiberOverlap out;
  if (!(n_photon > 0.0)) return out;
  const cplx ox = cplx(sx_re.value(), sx_im.value()) * g_norm * da;
  const cplx oy = cplx(sy_re.value(), sy_im.value()) * g_norm * da;
  out.x = std::norm(ox) / n_photon;
  out.y = std::norm(oy) / n_photon;
  return out;
}

TrapFrequencies trap_frequencies(const TrapGeometry& trap) {
  trap.validate();
  const double u = trap.trap_depth * kBoltzmann;
  const double zr = trap.rayleigh_range();
  return {std::sqrt(4.0 * u / (trap.atom_mass * trap.trap_waist * trap.trap_waist)),
          std::sqrt(2.0 * u / (trap.atom_mass * zr * zr))};
}

ThermalWidths thermal_widths(const TrapGeometry& trap) {
  const TrapFrequencies w = trap_frequencies(trap);
  const double kt = kBoltzmann * trap.atom_temperature;
  return {std::sqrt(kt / (trap.atom_mass * w.omega_r * w.omega_r)),
          std::sqrt(kt / (trap.atom_mass * w.omega_z * w.omega_z))};
}

namespace {

struct WeightedOffset {
  Vec3 r;
  double w;
};

std::vector<WeightedOffset> axisymmetric_nodes(const ThermalWidths& s, std::size_t nr, std::size_t nz) {
  const QuadratureRule lag = gauss_laguerre(nr), her = gauss_hermite_normal(nz);
  std::vector<WeightedOffset> out;
  for (std::size_t i = 0; i < lag.size(); ++i)
    for (std::size_t j = 0; j < her.size(); ++j)
      out.push_back({{s.sigma_r * std::sqrt(2.0 * lag.nodes[i]), 0.0, s.sigma_z * her.nodes[j]},
                     lag.weights[i] * her.weights[j]});
  return out;
}

std::vector<WeightedOffset> hermite_nodes(const ThermalWidths& s, std::size_t n) {
  const QuadratureRule h = gauss_hermite_normal(n);
  std::vector<WeightedOffset> out;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t l = 0; l < n; ++l)
        out.push_back({{s.sigma_r * h.nodes[i], s.sigma_r * h.nodes[j], s.sigma_z * h.nodes[l]},
                       h.weights[i] * h.weights[j] * h.weights[l]});
  return out;
}

// Weighted mean of the total fiber coupling over the given nodes, per channel.
std::vector<double> mean_overlaps(const std::vector<WeightedOffset>& nodes,
                                  const std::vector<EmissionChannel>& channels, const OpticalSystem& optics,
                                  std::size_t threads, std::vector<std::vector<double>>* per_node = nullptr) {
  const std::size_t m = nodes.size(), c = channels.size();
  std::vector<double> values(m * c);
  parallel_for(
      m * c,
      [&](std::size_t k) {
        values[k] = fiber_overlap(nodes[k / c].r, channels[k % c].polarization, optics).total();
      },
      threads);
  std::vector<double> out(c);
  for (std::size_t ch = 0; ch < c; ++ch) {
    NeumaierSum acc;
    for (std::size_t i = 0; i < m; ++i) acc.add(nodes[i].w * values[i * c + ch]);
    out[ch] = acc.value();
  }
  if (per_node) {
    per_node->assign(c, std::vector<double>(m));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t ch = 0; ch < c; ++ch) (*per_node)[ch][i] = values[i * c + ch];
  }
  return out;
}

double combine(const std::vector<double>& means, const std::vector<EmissionChannel>& channels,
               const OpticalSystem& optics) {
  double eta = 0.0;
  for (std::size_t ch = 0; ch < channels.size(); ++ch)
    eta += channels[ch].branching * collection_efficiency_analytic(optics.na, channels[ch].polarization) * means[ch];
  return eta;
}

}  // namespace

ThermalResult thermal_average(const OpticalSystem& optics, const TrapGeometry& trap,
                              const std::vector<EmissionChannel>& channels, const ThermalOptions& options) {
  optics.validate();
  trap.validate();
  if (channels.empty()) throw InputError("no emission channels");
  for (const auto& ch : channels)
    if (!(ch.branching >= 0.0 && ch.branching <= 1.0)) throw InputError("branching ratio must lie in [0, 1]");

  ThermalResult res;
  res.widths = thermal_widths(trap);

  if (trap.atom_temperature == 0.0) {
    const std::vector<WeightedOffset> origin{{{0.0, 0.0, 0.0}, 1.0}};
    const auto means = mean_overlaps(origin, channels, optics, options.threads);
    res.eta_cc = combine(means, channels, optics);
    for (std::size_t ch = 0; ch < channels.size(); ++ch) res.mean_overlap.emplace_back(channels[ch].polarization, means[ch]);
    res.evaluations = channels.size();
    return res;
  }

  std::vector<double> means;
  switch (options.method) {
    case ThermalMethod::axisymmetric: {
      const std::size_t nr = options.radial_order, nz = options.axial_order;
      if (nr < 3 || nz < 3) throw InputError("thermal quadrature orders must be at least 3");
      means = mean_overlaps(axisymmetric_nodes(res.widths, nr, nz), channels, optics, options.threads);
      const auto coarse = mean_overlaps(axisymmetric_nodes(res.widths, nr - 2, nz - 2), channels, optics,
                                        options.threads);
      res.convergence_estimate = std::abs(combine(means, channels, optics) - combine(coarse, channels, optics));
      res.evaluations = (nr * nz + (nr - 2) * (nz - 2)) * channels.size();
      break;
    }
    case ThermalMethod::gauss_hermite: {
      const std::size_t n = options.hermite_order;
      if (n < 3) throw InputError("thermal quadrature order must be at least 3");
      means = mean_overlaps(hermite_nodes(res.widths, n), channels, optics, options.threads);
      const auto coarse = mean_overlaps(hermite_nodes(res.widths, n - 2), channels, optics, options.threads);
      res.convergence_estimate = std::abs(combine(means, channels, optics) - combine(coarse, channels, optics));
      res.evaluations = (n * n * n + (n - 2) * (n - 2) * (n - 2)) * channels.size();
      break;
    }
    case ThermalMethod::monte_carlo: {
      if (options.samples < 2) throw InputError("Monte-Carlo thermal average needs at least two samples");
      std::mt19937_64 rng(options.seed);
      std::normal_distribution<double> normal;
      std::vector<WeightedOffset> nodes(options.samples);
      const double w = 1.0 / static_cast<double>(options.samples);
      for (auto& nd : nodes) {
        nd.r = {res.widths.sigma_r * normal(rng), res.widths.sigma_r * normal(rng), res.widths.sigma_z * normal(rng)};
        nd.w = w;
      }
      std::vector<std::vector<double>> per_node;
      means = mean_overlaps(nodes, channels, optics, options.threads, &per_node);
      // Standard error of the combined estimator.
      const double n = static_cast<double>(nodes.size());
      double mean = 0.0, sq = 0.0;
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        double v = 0.0;
        for (std::size_t ch = 0; ch < channels.size(); ++ch)
          v += channels[ch].branching * collection_efficiency_analytic(optics.na, channels[ch].polarization) *
               per_node[ch][i];
        mean += v;
        sq += v * v;
      }
      mean /= n;
      res.convergence_estimate = std::sqrt(std::max(0.0, (sq / n - mean * mean) / (n - 1.0)));
      res.evaluations = nodes.size() * channels.size();
      break;
    }
  }
  res.eta_cc = combine(means, channels, optics);
  // Floor at the resolution of the underlying pupil sums.
  if (options.method != ThermalMethod::monte_carlo)
    res.convergence_estimate = std::max(res.convergence_estimate, 1e-12 * std::abs(res.eta_cc));
  for (std::size_t ch = 0; ch < channels.size(); ++ch) res.mean_overlap.emplace_back(channels[ch].polarization, means[ch]);
  if (options.tolerance > 0.0 && res.convergence_estimate > options.tolerance) {
    std::ostringstream msg;
    msg << "thermal average did not converge: estimate " << res.convergence_estimate << " exceeds tolerance "
        << options.tolerance;
    throw ConvergenceError(msg.str(), res.convergence_estimate);
  }
  return res;
}

double success_probability(double eta_cc, const Losses& losses) {
  if (!(eta_cc >= 0.0 && eta_cc <= 1.0)) throw InputError("eta_cc must lie in [0, 1]");
  for (double f : {losses.transmission, losses.detection, losses.pumping, losses.excitation})
    if (!(f > 0.0 && f <= 1.0)) throw InputError("loss factors must lie in (0, 1]");
  return eta_cc * losses.transmission * losses.detection * losses.pumping * losses.excitation;
}

std::vector<ApertureSweepRow> efficiency_vs_aperture(const OpticalSystem& base, const TrapGeometry& trap,
                                                     const std::vector<double>& r_eff_list,
                                                     const std::vector<double>& temperatures,
                                                     const ThermalOptions& options) {
  if (r_eff_list.empty() || temperatures.empty()) throw InputError("aperture sweep needs radii and temperatures");
  std::vector<ApertureSweepRow> rows;
  for (double t : temperatures)
    for (double r : r_eff_list) rows.push_back({r, t, 0.0, 0.0});
  ThermalOptions inner = options;
  inner.threads = 1;
  parallel_for(
      rows.size(),
      [&](std::size_t i) {
        TrapGeometry tg = trap;
        tg.atom_temperature = rows[i].temperature;
        const ThermalResult res = thermal_average(base.with_aperture(rows[i].r_eff), tg, collected_channels(), inner);
        rows[i].eta_cc = res.eta_cc;
        rows[i].convergence_estimate = res.convergence_estimate;
      },
      options.threads);
  return rows;
}

}  // namespace atomsim
