#include "mimocal/numerics.hpp"

#include <algorithm>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace mimocal {

namespace {

void require_square(const ComplexMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw NumericsError(std::string(what) + ": expected a non-empty square matrix, got " +
                        std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

void require_hermitian(const ComplexMatrix& h, const char* what) {
  const double tol = 1e-8 * std::max(h.norm(), 1e-300);
  if (hermitian_defect(h) > tol) {
    throw NumericsError(std::string(what) + ": matrix is not Hermitian");
  }
}

}  // namespace

double hermitian_defect(const ComplexMatrix& h) {
  if (h.size() == 0) return 0.0;
  return (h - h.adjoint()).cwiseAbs().maxCoeff();
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

HermitianEig hermitian_eig(const ComplexMatrix& h) {
  require_square(h, "hermitian_eig");
  require_hermitian(h, "hermitian_eig");
  const ComplexMatrix sym = 0.5 * (h + h.adjoint());

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw NumericsError("hermitian_eig: decomposition did not converge");
  }
  // Eigen returns ascending order; flip to descending.
  const Eigen::Index n = sym.rows();
  HermitianEig out{RealVector(n), ComplexMatrix(n, n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    out.eigenvalues(j) = solver.eigenvalues()(n - 1 - j);
    out.eigenvectors.col(j) = solver.eigenvectors().col(n - 1 - j);
  }
  return out;
}

ComplexVector general_eigenvalues(const ComplexMatrix& s) {
  require_square(s, "general_eigenvalues");
  if (s.rows() > kMaxGeneralEigDim) {
    throw NumericsError("general_eigenvalues: dimension " + std::to_string(s.rows()) +
                        " exceeds supported maximum " + std::to_string(kMaxGeneralEigDim));
  }
  Eigen::ComplexEigenSolver<ComplexMatrix> solver;
  solver.setMaxIterations(100 * static_cast<Eigen::Index>(s.rows()));
  solver.compute(s, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw NumericsError("general_eigenvalues: QR iteration did not converge");
  }
  return solver.eigenvalues();
}

double diagonal_loading(const ComplexMatrix& h) {
  require_square(h, "diagonal_loading");
  const ComplexMatrix sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym, Eigen::EigenvaluesOnly);
  const RealVector& ev = solver.eigenvalues();
  const double largest = ev.maxCoeff();
  const double smallest = ev.minCoeff();
  if (largest <= 0.0 || smallest < 1e-12 * largest) {
    const double trace = sym.diagonal().real().sum();
    const double load = 1e-10 * trace / static_cast<double>(sym.rows());
    // An all-zero matrix has nothing to scale against.
    return load > 0.0 ? load : 1e-300;
  }
  return 0.0;
}

ComplexMatrix solve_hermitian(const ComplexMatrix& h, const ComplexMatrix& b) {
  require_square(h, "solve_hermitian");
  if (b.rows() != h.rows()) {
    throw NumericsError("solve_hermitian: right-hand side has " + std::to_string(b.rows()) +
                        " rows, expected " + std::to_string(h.rows()));
  }
  require_hermitian(h, "solve_hermitian");
  ComplexMatrix sym = 0.5 * (h + h.adjoint());
  const double load = diagonal_loading(sym);
  if (load > 0.0) sym.diagonal().array() += load;

  Eigen::LDLT<ComplexMatrix> ldlt(sym);
  if (ldlt.info() != Eigen::Success) {
    throw NumericsError("solve_hermitian: factorization failed");
  }
  ComplexMatrix x = ldlt.solve(b);
  if (!x.allFinite()) {
    throw NumericsError("solve_hermitian: system is singular beyond diagonal-loading recovery");
  }
  return x;
}

}  // namespace mimocal
