#include "atomsim/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "atomsim/errors.hpp"

namespace atomsim {

namespace {

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix, weights are
// mu0 times the squared first eigenvector components.
QuadratureRule golub_welsch(const std::vector<double>& alpha, const std::vector<double>& beta, double mu0) {
  const auto n = static_cast<Eigen::Index>(alpha.size());
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) j(i, i) = alpha[i];
  for (Eigen::Index i = 0; i + 1 < n; ++i) j(i, i + 1) = j(i + 1, i) = beta[i];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  QuadratureRule rule;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return es.eigenvalues()[a] < es.eigenvalues()[b]; });
  for (std::size_t k : order) {
    rule.nodes.push_back(es.eigenvalues()[k]);
    const double v = es.eigenvectors()(0, k);
    rule.weights.push_back(mu0 * v * v);
  }
  return rule;
}

void require_order(std::size_t n) {
  if (n == 0 || n > 200) throw InputError("quadrature order must be in [1, 200]");
}

}  // namespace

QuadratureRule gauss_legendre(std::size_t n) {
  require_order(n);
  std::vector<double> alpha(n, 0.0), beta(n > 0 ? n - 1 : 0);
  for (std::size_t k = 1; k < n; ++k) {
    const double kk = static_cast<double>(k);
    beta[k - 1] = kk / std::sqrt(4.0 * kk * kk - 1.0);
  }
  QuadratureRule r = golub_welsch(alpha, beta, 2.0);
  // Enforce exact symmetry.
  for (std::size_t i = 0; i < n / 2; ++i) {
    const double x = 0.5 * (r.nodes[n - 1 - i] - r.nodes[i]);
    const double w = 0.5 * (r.weights[i] + r.weights[n - 1 - i]);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = r.weights[n - 1 - i] = w;
  }
  if (n % 2) r.nodes[n / 2] = 0.0;
  return r;
}

QuadratureRule gauss_hermite_normal(std::size_t n) {
  require_order(n);
  std::vector<double> alpha(n, 0.0), beta(n > 0 ? n - 1 : 0);
  for (std::size_t k = 1; k < n; ++k) beta[k - 1] = std::sqrt(static_cast<double>(k));
  QuadratureRule r = golub_welsch(alpha, beta, 1.0);
  for (std::size_t i = 0; i < n / 2; ++i) {
    const double x = 0.5 * (r.nodes[n - 1 - i] - r.nodes[i]);
    const double w = 0.5 * (r.weights[i] + r.weights[n - 1 - i]);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = r.weights[n - 1 - i] = w;
  }
  if (n % 2) r.nodes[n / 2] = 0.0;
  return r;
}

QuadratureRule gauss_laguerre(std::size_t n) {
  require_order(n);
  std::vector<double> alpha(n), beta(n > 0 ? n - 1 : 0);
  for (std::size_t k = 0; k < n; ++k) alpha[k] = 2.0 * static_cast<double>(k) + 1.0;
  for (std::size_t k = 1; k < n; ++k) beta[k - 1] = static_cast<double>(k);
  return golub_welsch(alpha, beta, 1.0);
}

void NeumaierSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x))
    comp_ += (sum_ - t) + x;
  else
    comp_ += (x - t) + sum_;
  sum_ = t;
}

}  // namespace atomsim
