#include "mimocal/crb.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace mimocal {

CrbParams CrbParams::from(const TargetScene& scene, const GainPhase& gp) {
  CrbParams p;
  p.theta = scene.angles();
  for (int m = 2; m < gp.size(); ++m) {
    p.xi.push_back(gp[m].real());
    p.zeta.push_back(gp[m].imag());
  }
  return p;
}

RealVector CrbParams::stacked() const {
  RealVector out(size());
  Eigen::Index i = 0;
  for (double v : theta) out(i++) = v;
  for (double v : xi) out(i++) = v;
  for (double v : zeta) out(i++) = v;
  return out;
}

std::vector<ComplexMatrix> manifold_derivatives(const TargetScene& scene, const GainPhase& gp,
                                                const ArrayConfig& cfg) {
  scene.validate_for(cfg);
  const int m = cfg.num_antennas();
  const int k = scene.size();
  const Eigen::Index n = cfg.virtual_size();

  std::vector<ComplexVector> nominal(k), actual(k), slope(k);
  for (int t = 0; t < k; ++t) {
    const double theta = scene[t].theta;
    nominal[t] = ideal_steering(theta, cfg);
    actual[t] = gp.values().cwiseProduct(nominal[t]);
    // d/dθ of h_m exp(-j 2π p_m sin θ / λ)
    const double c = -2.0 * kPi * std::cos(theta) / cfg.wavelength();
    slope[t] = actual[t].cwiseProduct((cd(0.0, c) * cfg.positions().cast<cd>()).eval());
  }
  const auto sym_kron = [](const ComplexVector& da, const ComplexVector& a) {
    return ComplexVector(kron(da, a) + kron(a, da));
  };

  std::vector<ComplexMatrix> out;
  out.reserve(static_cast<std::size_t>(k + 2 * (m - 2)));
  for (int t = 0; t < k; ++t) {
    ComplexMatrix d = ComplexMatrix::Zero(n, k);
    d.col(t) = sym_kron(slope[t], actual[t]);
    out.push_back(std::move(d));
  }
  for (const cd unit : {cd(1.0, 0.0), cd(0.0, 1.0)}) {
    for (int i = 2; i < m; ++i) {
      ComplexMatrix d(n, k);
      for (int t = 0; t < k; ++t) {
        ComplexVector da = ComplexVector::Zero(m);
        da(i) = unit * nominal[t](i);
        d.col(t) = sym_kron(da, actual[t]);
      }
      out.push_back(std::move(d));
    }
  }
  return out;
}

ComplexMatrix orthogonal_projector(const ComplexMatrix& a) {
  const ComplexMatrix gram = a.adjoint() * a;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(gram, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 1e-12 * es.eigenvalues().maxCoeff()) {
    throw ModelError("orthogonal_projector: A^H A is singular");
  }
  ComplexMatrix p = -a * gram.ldlt().solve(a.adjoint());
  p.diagonal().array() += 1.0;
  return 0.5 * (p + p.adjoint());
}

CrbResult fisher_matrix(const TargetScene& scene, const GainPhase& gp, const ArrayConfig& cfg,
                        const ComplexMatrix& rb, double sigma2, int snapshots) {
  if (!(sigma2 > 0.0)) throw ModelError("fisher_matrix: noise power must be positive");
  if (snapshots < 1) throw ModelError("fisher_matrix: need at least one snapshot");
  const int k = scene.size();
  if (rb.rows() != k || rb.cols() != k) throw ModelError("fisher_matrix: R_b must be KxK");

  const ComplexMatrix a = virtual_manifold(scene, gp, cfg);
  const ComplexMatrix proj = orthogonal_projector(a);
  const ComplexMatrix gram = a.adjoint() * a;
  ComplexMatrix inner = gram * rb;
  inner.diagonal().array() += sigma2;
  const ComplexMatrix w = rb * inner.partialPivLu().solve(gram * rb);

  const std::vector<ComplexMatrix> da = manifold_derivatives(scene, gp, cfg);
  const int n = static_cast<int>(da.size());
  std::vector<ComplexMatrix> projected(da.size());
  for (int i = 0; i < n; ++i) projected[i] = proj * da[i];

  const double scale = 2.0 * snapshots / sigma2;
  CrbResult out;
  out.fisher.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double v = scale * (w * (da[j].adjoint() * projected[i])).trace().real();
      out.fisher(i, j) = v;
      out.fisher(j, i) = v;
    }
  }

  Eigen::SelfAdjointEigenSolver<RealMatrix> es(out.fisher, Eigen::EigenvaluesOnly);
  const double largest = es.eigenvalues().maxCoeff();
  const double smallest = es.eigenvalues().minCoeff();
  if (!(largest > 0.0) || smallest <= 1e-14 * largest) {
    throw ModelError("fisher_matrix: Fisher matrix is singular");
  }
  out.condition_number = largest / smallest;
  out.crb_matrix =
      solve_hermitian(out.fisher.cast<cd>(), ComplexMatrix::Identity(n, n)).real();
  out.crb_matrix = 0.5 * (out.crb_matrix + out.crb_matrix.transpose()).eval();
  for (int t = 0; t < k; ++t) out.doa_std_deg.push_back(rad_to_deg(std::sqrt(out.crb_matrix(t, t))));
  return out;
}

}  // namespace mimocal
