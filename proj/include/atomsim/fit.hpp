#pragma once

// Weighted nonlinear least squares: Levenberg-Marquardt inside an
// iteratively reweighted loop where each observation's variance comes from
// the noise model evaluated at the current prediction.

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace atomsim {

struct FitProblem {
  std::size_t parameters = 0;
  std::vector<double> observations;
  // Model value for observation i; fills grad (size = parameters) with d/dp.
  std::function<double(const Eigen::VectorXd& p, std::size_t i, Eigen::Ref<Eigen::VectorXd> grad)> model;
  // Variance of observation i when the model predicts mu.
  std::function<double(double mu, std::size_t i)> variance;
  // Optional: rejects trial parameters outside the model's domain.
  std::function<bool(const Eigen::VectorXd& p)> admissible;
};

struct FitOptions {
  std::size_t max_iterations = 300;
  std::size_t max_reweights = 100;
  double tolerance = 1e-10;  // relative change in chi2 and parameters
  double initial_damping = 1e-3;
};

struct FitResult {
  Eigen::VectorXd params;
  Eigen::MatrixXd covariance;  // (J^T W J)^-1 at the solution
  double chi2 = 0.0;
  std::size_t dof = 0;
  std::size_t iterations = 0;
  std::vector<double> residuals;  // (y - mu) / sqrt(var)

  double stderr_of(std::size_t k) const;
  double reduced_chi2() const { return dof ? chi2 / static_cast<double>(dof) : 0.0; }
};

// Throws ConvergenceError (achieved = residual norm) when the iteration
// budget runs out, InputError on malformed problems.
FitResult fit_least_squares(const FitProblem& problem, const Eigen::VectorXd& initial, const FitOptions& options = {});

// Noise models.
double poisson_variance(double mu);
double binomial_variance(double p, double trials);

}  // namespace atomsim
