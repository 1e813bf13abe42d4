#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace atomsim {

using ComplexMatrix = Eigen::MatrixXcd;

// Complex Hermitian state over a LevelScheme.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(ComplexMatrix data);

  // |i><i| in a dim-dimensional space.
  static DensityMatrix pure(std::size_t dim, std::size_t i);

  std::size_t dim() const { return static_cast<std::size_t>(data_.rows()); }
  const ComplexMatrix& data() const { return data_; }
  ComplexMatrix& data() { return data_; }

  double trace() const;
  double population(std::size_t i) const { return data_(i, i).real(); }
  std::vector<double> populations() const;

  // max |rho - rho^dagger|
  double hermiticity_defect() const;
  double min_eigenvalue() const;
  // rho <- (rho + rho^dagger)/2
  void symmetrize();

  // Throws SolverError naming the failed invariant when any of trace drift,
  // Hermiticity defect or negative eigenvalue exceeds tol.
  void check(double tol) const;

 private:
  ComplexMatrix data_;
};

}  // namespace atomsim
