#pragma once

#include <cstddef>
#include <vector>

namespace atomsim {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t size() const { return nodes.size(); }
};

// Nodes on [-1, 1], weight 1.
QuadratureRule gauss_legendre(std::size_t n);
// Nodes for E[f(X)], X ~ N(0, 1); weights sum to 1.
QuadratureRule gauss_hermite_normal(std::size_t n);
// Nodes on [0, inf), weight exp(-u); weights sum to 1.
QuadratureRule gauss_laguerre(std::size_t n);

// Compensated (Neumaier) running sum.
class NeumaierSum {
 public:
  void add(double x);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace atomsim
