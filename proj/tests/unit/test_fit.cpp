#include <doctest.h>

#include <cmath>
#include <random>

#include "atomsim/errors.hpp"
#include "atomsim/fit.hpp"

using namespace atomsim;
using doctest::Approx;

TEST_CASE("weighted straight line matches the normal equations") {
  const std::vector<double> x{0, 1, 2, 3, 4, 5};
  const std::vector<double> y{1.1, 2.9, 5.2, 7.1, 8.8, 11.2};
  FitProblem pr;
  pr.parameters = 2;
  pr.observations = y;
  pr.model = [&](const Eigen::VectorXd& p, std::size_t i, Eigen::Ref<Eigen::VectorXd> g) {
    g[0] = 1.0;
    g[1] = x[i];
    return p[0] + p[1] * x[i];
  };
  pr.variance = [](double, std::size_t) { return 0.04; };
  const auto r = fit_least_squares(pr, Eigen::Vector2d(0.0, 0.0));

  Eigen::MatrixXd a(6, 2);
  Eigen::VectorXd b(6);
  for (int i = 0; i < 6; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = x[i];
    b[i] = y[i];
  }
  const Eigen::VectorXd ls = (a.transpose() * a).ldlt().solve(a.transpose() * b);
  const Eigen::MatrixXd cov = 0.04 * (a.transpose() * a).inverse();
  CHECK(r.params[0] == Approx(ls[0]).epsilon(1e-9));
  CHECK(r.params[1] == Approx(ls[1]).epsilon(1e-9));
  CHECK(r.stderr_of(1) == Approx(std::sqrt(cov(1, 1))).epsilon(1e-8));
  CHECK(r.dof == 4);
  CHECK(r.residuals.size() == 6);
}

TEST_CASE("nonlinear exponential fit recovers its parameters") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<double> t, y;
  for (int i = 0; i < 40; ++i) {
    t.push_back(0.1 * i);
    y.push_back(2.0 * std::exp(-1.3 * t.back()) + noise(rng));
  }
  FitProblem pr;
  pr.parameters = 2;
  pr.observations = y;
  pr.model = [&](const Eigen::VectorXd& p, std::size_t i, Eigen::Ref<Eigen::VectorXd> g) {
    const double e = std::exp(-p[1] * t[i]);
    g[0] = e;
    g[1] = -p[0] * t[i] * e;
    return p[0] * e;
  };
  pr.variance = [](double, std::size_t) { return 1e-4; };
  const auto r = fit_least_squares(pr, Eigen::Vector2d(1.0, 0.5));
  CHECK(std::abs(r.params[0] - 2.0) < 4 * r.stderr_of(0));
  CHECK(std::abs(r.params[1] - 1.3) < 4 * r.stderr_of(1));
  CHECK(r.reduced_chi2() == Approx(1.0).epsilon(0.5));
}

TEST_CASE("fit input validation") {
  FitProblem pr;
  pr.parameters = 3;
  pr.observations = {1.0, 2.0};
  pr.model = [](const Eigen::VectorXd&, std::size_t, Eigen::Ref<Eigen::VectorXd> g) {
    g.setZero();
    return 0.0;
  };
  pr.variance = [](double, std::size_t) { return 1.0; };
  CHECK_THROWS_AS(fit_least_squares(pr, Eigen::Vector3d::Zero()), InputError);
}

TEST_CASE("variance models stay positive") {
  CHECK(poisson_variance(0.0) == 0.5);
  CHECK(poisson_variance(10.0) == 10.0);
  CHECK(binomial_variance(0.0, 100) > 0.0);
  CHECK(binomial_variance(1.0, 100) > 0.0);
  CHECK(binomial_variance(0.5, 100) == Approx(0.0025));
}
