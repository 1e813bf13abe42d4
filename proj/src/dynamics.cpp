#include "atomsim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "atomsim/errors.hpp"

namespace atomsim {

double PulseProfile::envelope(double t) const {
  if (t < t_start || t > t_end) return 0.0;
  const double x = (t - center) / width;
  return omega_peak * std::exp(-0.5 * x * x);
}

void PulseProfile::validate() const {
  if (!(width > 0.0) || !std::isfinite(width)) throw InputError("pulse width must be positive");
  if (!std::isfinite(omega_peak)) throw InputError("pulse peak must be finite");
  if (q < -1 || q > 1) throw InputError("pulse polarization must be -1, 0 or +1");
  if (!(t_start < center && center < t_end)) throw InputError("pulse center must lie inside its window");
}

PulseProfile PulseProfile::centered(double omega_peak, double sigma, int q, double half_width_sigmas) {
  PulseProfile p;
  p.omega_peak = omega_peak;
  p.width = sigma;
  p.q = q;
  p.t_start = 0.0;
  p.center = half_width_sigmas * sigma;
  p.t_end = 2.0 * half_width_sigmas * sigma;
  return p;
}

std::vector<JumpOperator> jump_operators(const LevelScheme& scheme) {
  std::vector<JumpOperator> out;
  out.reserve(scheme.decays().size());
  for (const auto& d : scheme.decays()) out.push_back(JumpOperator{d.rate, d.from, d.to});
  return out;
}

ComplexMatrix hamiltonian_at(const LevelScheme& scheme, const PulseProfile& pulse, double t) {
  const std::size_t n = scheme.size();
  ComplexMatrix h = ComplexMatrix::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) h(i, i) = scheme.level(i).energy_offset;
  const double half = 0.5 * pulse.envelope(t);
  if (half == 0.0) return h;
  for (const auto& c : scheme.couplings()) {
    if (c.q != pulse.q) continue;
    h(c.excited, c.ground) += half * c.factor;
    h(c.ground, c.excited) += half * c.factor;
  }
  return h;
}

namespace {

// Sparse evaluation of the Lindblad generator on a column-major flattened rho.
class Generator {
 public:
  Generator(const LevelScheme& scheme, const PulseProfile& pulse) : pulse_(pulse), n_(scheme.size()) {
    energy_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) energy_[i] = scheme.level(i).energy_offset;
    for (const auto& c : scheme.couplings())
      if (c.q == pulse.q) couplings_.push_back(c);
    decays_ = scheme.decays();
    gamma_ = scheme.total_decay_rates();
  }

  std::size_t dim() const { return n_; }
  const std::vector<double>& gamma() const { return gamma_; }

  // out = L(rho); rho and out point at n*n column-major storage.
  void apply(const std::complex<double>* rho, std::complex<double>* out, double t) const {
    const std::size_t n = n_;
    const std::complex<double> minus_i(0.0, -1.0);
    auto at = [n](std::size_t i, std::size_t j) { return i + j * n; };
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = at(i, j);
        out[k] = (minus_i * (energy_[i] - energy_[j]) - 0.5 * (gamma_[i] + gamma_[j])) * rho[k];
      }
    }
    const double half = 0.5 * pulse_.envelope(t);
    if (half != 0.0) {
      // -i [V, rho] with V = h (|e><g| + |g><e|)
      for (const auto& c : couplings_) {
        const std::complex<double> h = minus_i * (half * c.factor);
        const std::size_t g = c.ground, e = c.excited;
        for (std::size_t j = 0; j < n; ++j) {
          out[at(e, j)] += h * rho[at(g, j)];
          out[at(g, j)] += h * rho[at(e, j)];
        }
        for (std::size_t i = 0; i < n; ++i) {
          out[at(i, g)] -= h * rho[at(i, e)];
          out[at(i, e)] -= h * rho[at(i, g)];
        }
      }
    }
    for (const auto& d : decays_) out[at(d.to, d.to)] += d.rate * rho[at(d.from, d.from)].real();
  }

 private:
  PulseProfile pulse_;
  std::size_t n_;
  std::vector<double> energy_;
  std::vector<DipoleCoupling> couplings_;
  std::vector<DecayChannel> decays_;
  std::vector<double> gamma_;
};

}  // namespace

ComplexMatrix lindblad_rhs(const LevelScheme& scheme, const PulseProfile& pulse, const ComplexMatrix& rho, double t) {
  const auto n = static_cast<Eigen::Index>(scheme.size());
  if (rho.rows() != n || rho.cols() != n) {
    std::ostringstream msg;
    msg << "density matrix is " << rho.rows() << "x" << rho.cols() << " but the scheme has " << n << " levels";
    throw InputError(msg.str());
  }
  Generator gen(scheme, pulse);
  ComplexMatrix out(n, n);
  gen.apply(rho.data(), out.data(), t);
  return out;
}

void Trajectory::write_csv(std::ostream& out) const {
  const auto old_precision = out.precision(12);
  out << "time_s";
  for (const auto& l : labels) out << ',' << l;
  out << ",trace\n";
  for (std::size_t k = 0; k < times.size(); ++k) {
    out << times[k];
    for (std::size_t i = 0; i < states[k].dim(); ++i) out << ',' << states[k].population(i);
    out << ',' << states[k].trace() << '\n';
  }
  out.precision(old_precision);
}

Trajectory evolve(const LevelScheme& scheme, const PulseProfile& pulse, const DensityMatrix& rho0, double t0,
                  double t1, const Tolerances& tolerances, const EvolveOptions& options) {
  pulse.validate();
  const std::size_t n = scheme.size();
  if (rho0.dim() != n) throw InputError("initial state dimension does not match the level scheme");
  if (!(t1 >= t0)) throw InputError("evolve requires t1 >= t0");
  for (std::size_t i : options.flux_levels)
    if (i >= n) throw InputError("flux level index out of range");

  Generator gen(scheme, pulse);
  const std::size_t nn = n * n;
  const double limit = tolerances.invariant_limit;

  Trajectory traj;
  traj.labels = scheme.labels();

  auto pack_state = [&](const Eigen::VectorXcd& y) {
    ComplexMatrix m = Eigen::Map<const ComplexMatrix>(y.data(), n, n);
    return DensityMatrix(std::move(m));
  };
  auto record = [&](double t, const Eigen::VectorXcd& y) {
    DensityMatrix rho = pack_state(y);
    if (options.check_positivity) {
      const double lmin = rho.min_eigenvalue();
      traj.invariants.min_eigenvalue = std::min(traj.invariants.min_eigenvalue, lmin);
      if (lmin < -limit) {
        std::ostringstream msg;
        msg << "negative eigenvalue " << lmin << " at t=" << t;
        throw SolverError(msg.str());
      }
    }
    traj.times.push_back(t);
    traj.states.push_back(std::move(rho));
    traj.flux.push_back(y[static_cast<Eigen::Index>(nn)].real());
  };

  Eigen::VectorXcd y(static_cast<Eigen::Index>(nn + 1));
  std::copy(rho0.data().data(), rho0.data().data() + nn, y.data());
  y[static_cast<Eigen::Index>(nn)] = 0.0;
  traj.invariants.min_eigenvalue = options.check_positivity ? rho0.min_eigenvalue() : 0.0;
  record(t0, y);
  if (t1 == t0) return traj;

  auto rhs = [&](double t, const Eigen::VectorXcd& state) {
    Eigen::VectorXcd d(state.size());
    gen.apply(state.data(), d.data(), t);
    double flux = 0.0;
    for (std::size_t i : options.flux_levels) flux += gen.gamma()[i] * state[static_cast<Eigen::Index>(i * (n + 1))].real();
    d[static_cast<Eigen::Index>(nn)] = flux;
    return d;
  };

  auto after_step = [&](double t, Eigen::VectorXcd& state) {
    Eigen::Map<ComplexMatrix> rho(state.data(), n, n);
    const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    if (herm > limit) {
      std::ostringstream msg;
      msg << "hermiticity defect " << herm << " at t=" << t;
      throw SolverError(msg.str());
    }
    ComplexMatrix sym = 0.5 * (rho + rho.adjoint());
    rho = sym;
    traj.invariants.max_hermiticity_defect =
        std::max(traj.invariants.max_hermiticity_defect, (rho - rho.adjoint()).cwiseAbs().maxCoeff());
    const double drift = std::abs(rho.trace().real() - rho0.trace());
    traj.invariants.max_trace_drift = std::max(traj.invariants.max_trace_drift, drift);
    if (drift > limit) {
      std::ostringstream msg;
      msg << "trace drift " << drift << " at t=" << t;
      throw SolverError(msg.str());
    }
  };

  std::vector<double> stops;
  for (double s : options.sample_times)
    if (s > t0 && s < t1) stops.push_back(s);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());
  stops.push_back(t1);

  OdeTolerances ode_tol;
  ode_tol.rtol = tolerances.rtol;
  ode_tol.atol = tolerances.atol;
  traj.stats = integrate_dopri5(rhs, y, t0, t1, ode_tol, stops, record, after_step);
  return traj;
}

PiCalibration calibrate_pi(double width_sigma, int q) {
  if (!(width_sigma > 0.0) || !std::isfinite(width_sigma)) throw InputError("pulse width must be positive");
  const double c = clebsch_gordan(AngularMomentum::integer(2), 0, -q, AngularMomentum::integer(3), 0);
  if (q != 0 || c == 0.0)
    throw InputError("polarization q=" + std::to_string(q) + " does not couple |3,0> to |2',0>");
  PiCalibration cal;
  cal.cg_factor = c;
  cal.omega_driven = std::numbers::pi / (width_sigma * std::sqrt(2.0 * std::numbers::pi));
  cal.omega_peak = cal.omega_driven / std::abs(c);
  return cal;
}

double calibrate_pi_pulse(const LevelScheme& scheme, double width_sigma, int q) {
  const auto g = scheme.find(Manifold::ground_f3, 0);
  const auto e = scheme.find(Manifold::excited_f2, 0);
  if (!g || !e) throw InputError("scheme lacks the |3,0> -> |2',0> transition");
  double factor = 0.0;
  for (const auto& c : scheme.couplings())
    if (c.ground == *g && c.excited == *e && c.q == q) factor = c.factor;
  if (factor == 0.0) throw InputError("polarization q=" + std::to_string(q) + " does not couple |3,0> to |2',0>");
  if (!(width_sigma > 0.0) || !std::isfinite(width_sigma)) throw InputError("pulse width must be positive");
  return std::numbers::pi / (std::abs(factor) * width_sigma * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace atomsim
