#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mimocal {

using cd = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Raised by the linear-algebra kernel on shape or structure violations.
class NumericsError : public std::runtime_error {
 public:
  explicit NumericsError(const std::string& what) : std::runtime_error(what) {}
};

/// Eigenpairs of a Hermitian matrix, eigenvalues sorted descending.
struct HermitianEig {
  RealVector eigenvalues;
  ComplexMatrix eigenvectors;  // column j pairs with eigenvalues[j]
};

/// Kronecker product; block (i, j) of the result is a(i, j) * b.
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// Hermitian eigendecomposition.  The input is symmetrized as (h + h^H)/2
/// before decomposition; inputs further than 1e-8 * ||h||_F from Hermitian
/// are rejected.
HermitianEig hermitian_eig(const ComplexMatrix& h);

/// Eigenvalues of a small general complex matrix (Hessenberg + shifted QR).
ComplexVector general_eigenvalues(const ComplexMatrix& s);

/// Largest dimension accepted by general_eigenvalues.
inline constexpr Eigen::Index kMaxGeneralEigDim = 64;

/// Solves h x = b for Hermitian positive semidefinite h.  When the smallest
/// eigenvalue of h is below 1e-12 times the largest, h is loaded with
/// 1e-10 * trace(h) / dim on the diagonal before solving.
ComplexMatrix solve_hermitian(const ComplexMatrix& h, const ComplexMatrix& b);

/// Diagonal loading that solve_hermitian would apply to h (0 if none).
double diagonal_loading(const ComplexMatrix& h);

/// Max-abs deviation of h from its conjugate transpose.
double hermitian_defect(const ComplexMatrix& h);

}  // namespace mimocal
