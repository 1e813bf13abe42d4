#include "atomsim/density_matrix.hpp"

#include <cmath>
#include <sstream>

#include "atomsim/errors.hpp"

namespace atomsim {

DensityMatrix::DensityMatrix(ComplexMatrix data) : data_(std::move(data)) {
  if (data_.rows() != data_.cols()) throw InputError("density matrix must be square");
}

DensityMatrix DensityMatrix::pure(std::size_t dim, std::size_t i) {
  if (i >= dim) throw InputError("pure state index out of range");
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  m(i, i) = 1.0;
  return DensityMatrix(std::move(m));
}

double DensityMatrix::trace() const { return data_.trace().real(); }

std::vector<double> DensityMatrix::populations() const {
  std::vector<double> out(dim());
  for (std::size_t i = 0; i < dim(); ++i) out[i] = population(i);
  return out;
}

double DensityMatrix::hermiticity_defect() const {
  if (data_.size() == 0) return 0.0;
  return (data_ - data_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
  if (data_.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(data_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void DensityMatrix::symmetrize() {
  ComplexMatrix h = 0.5 * (data_ + data_.adjoint());
  data_ = std::move(h);
}

void DensityMatrix::check(double tol) const {
  std::ostringstream msg;
  const double drift = std::abs(trace() - 1.0);
  if (!(drift <= tol)) {
    msg << "trace drift " << drift << " exceeds " << tol;
    throw SolverError(msg.str());
  }
  const double herm = hermiticity_defect();
  if (!(herm <= tol)) {
    msg << "hermiticity defect " << herm << " exceeds " << tol;
    throw SolverError(msg.str());
  }
  const double lmin = min_eigenvalue();
  if (!(lmin >= -tol)) {
    msg << "negative eigenvalue " << lmin << " below " << -tol;
    throw SolverError(msg.str());
  }
}

}  // namespace atomsim
