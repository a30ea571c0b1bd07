// Test-only reference computations.  Nothing here calls into the library's
// numerical routines, so they can be used to check them.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "mimocal/rng.hpp"

namespace oracle {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline Mat random_matrix(Eigen::Index rows, Eigen::Index cols, mimocal::Rng& rng) {
  Mat m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = cd(rng.normal(), rng.normal());
  return m;
}

/// Kronecker product straight from the index formula.
inline Mat kron_by_index(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index r = 0; r < out.rows(); ++r)
    for (Eigen::Index c = 0; c < out.cols(); ++c)
      out(r, c) = a(r / b.rows(), c / b.cols()) * b(r % b.rows(), c % b.cols());
  return out;
}

/// Determinant by Leibniz expansion (small matrices only).
inline cd det_leibniz(const Mat& m) {
  const int n = static_cast<int>(m.rows());
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  cd total = 0.0;
  do {
    int inversions = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) inversions += perm[i] > perm[j];
    cd term = (inversions % 2) ? -1.0 : 1.0;
    for (int i = 0; i < n; ++i) term *= m(i, perm[i]);
    total += term;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total;
}

/// (1/L) Σ x x^H by explicit outer products.
inline Mat covariance_by_outer(const Mat& x) {
  Mat r = Mat::Zero(x.rows(), x.rows());
  for (Eigen::Index n = 0; n < x.cols(); ++n) r += x.col(n) * x.col(n).adjoint();
  return r / static_cast<double>(x.cols());
}

/// Sorted by phase, for comparing eigenvalue multisets.
inline std::vector<cd> phase_sorted(const Vec& v) {
  std::vector<cd> out(v.data(), v.data() + v.size());
  std::sort(out.begin(), out.end(), [](cd a, cd b) { return std::arg(a) < std::arg(b); });
  return out;
}

inline double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace oracle
