#include "atomsim/fit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "atomsim/errors.hpp"

namespace atomsim {

double FitResult::stderr_of(std::size_t k) const {
  const double v = covariance(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  return v > 0.0 ? std::sqrt(v) : 0.0;
}

double poisson_variance(double mu) { return std::max(mu, 0.5); }

double binomial_variance(double p, double trials) {
  const double lo = 0.5 / trials;
  const double q = std::clamp(p, lo, 1.0 - lo);
  return q * (1.0 - q) / trials;
}

namespace {

struct Linearization {
  Eigen::MatrixXd jtwj;
  Eigen::VectorXd jtwr;
  double chi2 = 0.0;
};

// Weighted residual sum and normal equations with fixed weights.
Linearization linearize(const FitProblem& pr, const Eigen::VectorXd& p, const std::vector<double>& weight,
                        bool with_jacobian) {
  const auto np = static_cast<Eigen::Index>(pr.parameters);
  Linearization lin;
  if (with_jacobian) {
    lin.jtwj = Eigen::MatrixXd::Zero(np, np);
    lin.jtwr = Eigen::VectorXd::Zero(np);
  }
  Eigen::VectorXd grad(np);
  for (std::size_t i = 0; i < pr.observations.size(); ++i) {
    grad.setZero();
    const double mu = pr.model(p, i, grad);
    const double r = pr.observations[i] - mu;
    lin.chi2 += weight[i] * r * r;
    if (with_jacobian) {
      lin.jtwj.selfadjointView<Eigen::Lower>().rankUpdate(grad, weight[i]);
      lin.jtwr += weight[i] * r * grad;
    }
  }
  if (with_jacobian) lin.jtwj = lin.jtwj.selfadjointView<Eigen::Lower>();
  return lin;
}

std::vector<double> weights_at(const FitProblem& pr, const Eigen::VectorXd& p) {
  Eigen::VectorXd grad(static_cast<Eigen::Index>(pr.parameters));
  std::vector<double> w(pr.observations.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double v = pr.variance(pr.model(p, i, grad), i);
    if (!(v > 0.0) || !std::isfinite(v)) throw SolverError("noise model returned a non-positive variance");
    w[i] = 1.0 / v;
  }
  return w;
}

bool finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace

FitResult fit_least_squares(const FitProblem& pr, const Eigen::VectorXd& initial, const FitOptions& options) {
  if (pr.parameters == 0 || static_cast<std::size_t>(initial.size()) != pr.parameters)
    throw InputError("initial guess does not match the number of parameters");
  if (pr.observations.size() < pr.parameters) throw InputError("fewer observations than parameters");
  if (!pr.model || !pr.variance) throw InputError("fit problem needs a model and a noise model");
  auto admissible = [&](const Eigen::VectorXd& p) { return finite(p) && (!pr.admissible || pr.admissible(p)); };
  if (!admissible(initial)) throw InputError("initial guess is outside the model domain");

  Eigen::VectorXd p = initial;
  std::size_t total_iterations = 0;
  double residual_norm = 0.0;
  bool outer_converged = false;

  Eigen::VectorXd p_prev = p;
  for (std::size_t round = 0; round < options.max_reweights && !outer_converged; ++round) {
    // Weights from the midpoint of the last two iterates: the plain fixed-point
    // map can oscillate when predictions approach the edge of the noise model.
    const Eigen::VectorXd p_mid = 0.5 * (p + p_prev);
    const std::vector<double> w = weights_at(pr, admissible(p_mid) ? p_mid : p);
    const Eigen::VectorXd p_round = p;
    double lambda = options.initial_damping;
    Linearization lin = linearize(pr, p, w, true);
    bool inner_converged = false;
    for (std::size_t it = 0; it < options.max_iterations; ++it) {
      ++total_iterations;
      Eigen::MatrixXd a = lin.jtwj;
      for (Eigen::Index k = 0; k < a.rows(); ++k) a(k, k) += lambda * std::max(lin.jtwj(k, k), 1e-300);
      const Eigen::VectorXd step = a.ldlt().solve(lin.jtwr);
      const Eigen::VectorXd trial = p + step;
      if (!finite(step) || !admissible(trial)) {
        lambda *= 10.0;
        if (lambda > 1e16) break;
        continue;
      }
      const double chi2_trial = linearize(pr, trial, w, false).chi2;
      if (chi2_trial <= lin.chi2) {
        const double drop = lin.chi2 - chi2_trial;
        const double rel_step = (step.array().abs() / (p.array().abs() + 1e-300)).maxCoeff();
        p = trial;
        lin = linearize(pr, p, w, true);
        lambda = std::max(lambda / 10.0, 1e-12);
        if (drop <= options.tolerance * std::max(lin.chi2, 1e-300) || rel_step <= options.tolerance) {
          inner_converged = true;
          break;
        }
      } else {
        lambda *= 10.0;
        if (lambda > 1e16) {
          // No downhill step exists at this damping: a minimum to machine precision.
          inner_converged = true;
          break;
        }
      }
    }
    residual_norm = std::sqrt(lin.chi2);
    if (!inner_converged) {
      std::ostringstream msg;
      msg << "least-squares fit did not converge in " << options.max_iterations << " iterations (residual norm "
          << residual_norm << ")";
      throw ConvergenceError(msg.str(), residual_norm);
    }
    // Settled once the reweighting moves parameters by a negligible fraction
    // of their standard errors.
    const Eigen::MatrixXd cov = lin.jtwj.ldlt().solve(Eigen::MatrixXd::Identity(lin.jtwj.rows(), lin.jtwj.cols()));
    double change = 0.0;
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      const double scale = cov(k, k) > 0.0 ? std::sqrt(cov(k, k)) : std::abs(p[k]) + 1e-300;
      change = std::max(change, std::abs(p[k] - p_round[k]) / scale);
    }
    outer_converged = change <= 1e-6;
    p_prev = p_round;
  }
  if (!outer_converged) {
    std::ostringstream msg;
    msg << "reweighting did not settle after " << options.max_reweights << " rounds (residual norm " << residual_norm
        << ")";
    throw ConvergenceError(msg.str(), residual_norm);
  }

  const std::vector<double> w = weights_at(pr, p);
  const Linearization lin = linearize(pr, p, w, true);
  FitResult res;
  res.params = p;
  res.chi2 = lin.chi2;
  res.dof = pr.observations.size() - pr.parameters;
  res.iterations = total_iterations;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(lin.jtwj);
  if (!lu.isInvertible()) throw SolverError("fit is degenerate: parameter covariance is singular");
  res.covariance = lu.inverse();
  Eigen::VectorXd grad(static_cast<Eigen::Index>(pr.parameters));
  for (std::size_t i = 0; i < pr.observations.size(); ++i)
    res.residuals.push_back((pr.observations[i] - pr.model(p, i, grad)) * std::sqrt(w[i]));
  return res;
}

}  // namespace atomsim
