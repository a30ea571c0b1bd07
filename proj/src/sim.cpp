#include "mimocal/sim.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace mimocal {

NoiseSpec::NoiseSpec(double sigma2) : sigma2_(sigma2) {
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) {
    throw ModelError("NoiseSpec: noise power must be finite and non-negative");
  }
}

NoiseSpec NoiseSpec::from_snr_db(double snr_db) { return NoiseSpec(std::pow(10.0, -snr_db / 10.0)); }

double NoiseSpec::snr_db() const {
  if (is_noise_free()) return std::numeric_limits<double>::infinity();
  return -10.0 * std::log10(sigma2_);
}

ComplexMatrix generate_snapshots(const TargetScene& scene, const GainPhase& gp,
                                 const ArrayConfig& cfg, int snapshots, const NoiseSpec& noise,
                                 Rng& rng) {
  if (snapshots < 1) throw ModelError("generate_snapshots: need at least one snapshot");
  const ComplexMatrix a = virtual_manifold(scene, gp, cfg);
  const int k = scene.size();

  ComplexMatrix b(k, snapshots);
  for (int t = 0; t < k; ++t) {
    for (int n = 0; n < snapshots; ++n) {
      b(t, n) = scene[t].beta * std::polar(1.0, 2.0 * kPi * scene[t].doppler * n);
    }
  }
  ComplexMatrix x = a * b;

  if (!noise.is_noise_free()) {
    const double s = std::sqrt(noise.sigma2() / 2.0);
    // Column-major fill: snapshot by snapshot.
    for (int n = 0; n < snapshots; ++n) {
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double re = rng.normal();
        const double im = rng.normal();
        x(i, n) += cd(s * re, s * im);
      }
    }
  }
  return x;
}

SnapshotSet generate_snapshots(const TargetScene& scene, const GainPhase& gp,
                               const ArrayConfig& cfg, int snapshots, const NoiseSpec& noise,
                               std::uint64_t seed) {
  Rng rng(seed);
  return SnapshotSet{generate_snapshots(scene, gp, cfg, snapshots, noise, rng), snapshots, seed};
}

namespace {

inline cd covariance_entry(const ComplexMatrix& x, Eigen::Index i, Eigen::Index j) {
  cd acc{0.0, 0.0};
  for (Eigen::Index n = 0; n < x.cols(); ++n) acc += x(i, n) * std::conj(x(j, n));
  return acc;
}

}  // namespace

ComplexMatrix sample_covariance_serial(const ComplexMatrix& x) {
  if (x.cols() < 1) throw ModelError("sample_covariance: need at least one snapshot");
  const Eigen::Index n = x.rows();
  const double inv_l = 1.0 / static_cast<double>(x.cols());
  ComplexMatrix r(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    r(i, i) = cd(covariance_entry(x, i, i).real() * inv_l, 0.0);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const cd v = covariance_entry(x, i, j) * inv_l;
      r(i, j) = v;
      r(j, i) = std::conj(v);
    }
  }
  return r;
}

ComplexMatrix sample_covariance(const ComplexMatrix& x) {
  if (x.cols() < 1) throw ModelError("sample_covariance: need at least one snapshot");
  const Eigen::Index n = x.rows();
  const double inv_l = 1.0 / static_cast<double>(x.cols());
  ComplexMatrix r(n, n);
#pragma omp parallel for schedule(dynamic, 4)
  for (Eigen::Index i = 0; i < n; ++i) {
    r(i, i) = cd(covariance_entry(x, i, i).real() * inv_l, 0.0);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const cd v = covariance_entry(x, i, j) * inv_l;
      r(i, j) = v;
      r(j, i) = std::conj(v);
    }
  }
  return r;
}

ComplexMatrix analytic_covariance(const TargetScene& scene, const GainPhase& gp,
                                  const ArrayConfig& cfg, const ComplexMatrix& rb, double sigma2) {
  const int k = scene.size();
  if (rb.rows() != k || rb.cols() != k) {
    throw ModelError("analytic_covariance: source covariance must be KxK");
  }
  if (hermitian_defect(rb) > 1e-12 * std::max(1.0, rb.norm())) {
    throw ModelError("analytic_covariance: source covariance is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (rb + rb.adjoint()), Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, rb.norm())) {
    throw ModelError("analytic_covariance: source covariance is not positive semidefinite");
  }
  if (!(sigma2 >= 0.0)) throw ModelError("analytic_covariance: noise power must be non-negative");

  const ComplexMatrix a = virtual_manifold(scene, gp, cfg);
  ComplexMatrix r = a * rb * a.adjoint();
  r = 0.5 * (r + r.adjoint()).eval();
  r.diagonal().array() += sigma2;
  return r;
}

}  // namespace mimocal
