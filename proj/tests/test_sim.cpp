#include <doctest.h>

#include "mimocal/sim.hpp"
#include "oracles.hpp"

using namespace mimocal;

namespace {

TargetScene three_targets() {
  return TargetScene({{deg_to_rad(10.0), 1.0, 0.10},
                      {deg_to_rad(20.0), 1.0, 0.22},
                      {deg_to_rad(30.0), 1.0, 0.34}});
}

}  // namespace

TEST_CASE("NoiseSpec conversions") {
  CHECK(NoiseSpec::from_snr_db(20.0).sigma2() == doctest::Approx(0.01));
  CHECK(NoiseSpec::from_snr_db(0.0).sigma2() == doctest::Approx(1.0));
  CHECK(NoiseSpec(0.1).snr_db() == doctest::Approx(10.0));
  CHECK(NoiseSpec::noise_free().is_noise_free());
  CHECK_THROWS_AS(NoiseSpec(-1.0), ModelError);
}

TEST_CASE("noise-free static target repeats the virtual steering vector") {
  const ArrayConfig cfg = ArrayConfig::uniform(4);
  const GainPhase gp = GainPhase::from_polar({1.1, 0.9}, {0.2, -0.1});
  const double theta = deg_to_rad(17.0);
  const SnapshotSet s = generate_snapshots(TargetScene({{theta, 1.0, 0.0}}), gp, cfg, 5,
                                           NoiseSpec::noise_free(), 1);
  const ComplexVector a = actual_steering(theta, gp, cfg);
  const ComplexMatrix av = kron(a, a);
  for (int n = 0; n < 5; ++n) CHECK(oracle::max_abs(s.data.col(n) - av) < 1e-14);
}

TEST_CASE("same seed reproduces the snapshots bit for bit") {
  const ArrayConfig cfg = ArrayConfig::uniform(5);
  const GainPhase gp = GainPhase::identity(5);
  const TargetScene scene({{0.2, cd(0.3, 0.4), 0.1}, {-0.4, 1.0, 0.3}});
  const SnapshotSet a = generate_snapshots(scene, gp, cfg, 20, NoiseSpec(0.5), 99);
  const SnapshotSet b = generate_snapshots(scene, gp, cfg, 20, NoiseSpec(0.5), 99);
  const SnapshotSet c = generate_snapshots(scene, gp, cfg, 20, NoiseSpec(0.5), 100);
  CHECK(a.data == b.data);
  CHECK(a.data != c.data);
  CHECK(a.snapshots == 20);
  CHECK(a.seed == 99);
}

TEST_CASE("noise-only data has the requested per-entry variance") {
  // A zero reflection coefficient leaves pure noise.
  const ArrayConfig cfg = ArrayConfig::uniform(3);
  const SnapshotSet s = generate_snapshots(TargetScene({{0.0, 0.0, 0.1}}), GainPhase::identity(3),
                                           cfg, 10000, NoiseSpec(1.0), 7);
  for (Eigen::Index i = 0; i < s.data.rows(); ++i) {
    const double var = s.data.row(i).squaredNorm() / 10000.0;
    CHECK(var == doctest::Approx(1.0).epsilon(0.05));
    const double re_var = s.data.row(i).real().squaredNorm() / 10000.0;
    CHECK(re_var == doctest::Approx(0.5).epsilon(0.05));
  }
}

TEST_CASE("sample_covariance small cases") {
  Rng rng(3);
  const ComplexMatrix x = oracle::random_matrix(6, 1, rng);
  CHECK(oracle::max_abs(sample_covariance(x) - x * x.adjoint()) < 1e-14);

  ComplexMatrix rep(6, 7);
  for (int n = 0; n < 7; ++n) rep.col(n) = x;
  CHECK(oracle::max_abs(sample_covariance(rep) - x * x.adjoint()) < 1e-13);

  CHECK_THROWS_AS(sample_covariance(ComplexMatrix(4, 0)), ModelError);
}

TEST_CASE("sample_covariance is Hermitian with the right trace") {
  Rng rng(5);
  const ComplexMatrix x = oracle::random_matrix(25, 40, rng);
  const ComplexMatrix r = sample_covariance(x);
  CHECK(oracle::max_abs(r - r.adjoint()) <= 1e-13);
  CHECK(oracle::max_abs(r - oracle::covariance_by_outer(x)) < 1e-13);
  CHECK(r.trace().real() == doctest::Approx(x.squaredNorm() / 40.0).epsilon(1e-13));
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(r, Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues().minCoeff() >= -1e-12);
}

TEST_CASE("analytic_covariance special cases") {
  const ArrayConfig cfg = ArrayConfig::uniform(4);
  const GainPhase gp = GainPhase::from_polar({1.1, 0.9}, {0.2, -0.1});
  const TargetScene one({{0.3, 1.0, 0.1}});
  const ComplexMatrix noise_only = analytic_covariance(one, gp, cfg, ComplexMatrix::Zero(1, 1), 0.7);
  CHECK(oracle::max_abs(noise_only - 0.7 * ComplexMatrix::Identity(16, 16)) < 1e-15);

  const ComplexMatrix rank1 = analytic_covariance(one, gp, cfg, ComplexMatrix::Ones(1, 1), 0.0);
  const ComplexVector a = actual_steering(0.3, gp, cfg);
  const ComplexMatrix av = kron(a, a);
  CHECK(oracle::max_abs(rank1 - av * av.adjoint()) < 1e-13);

  ComplexMatrix bad = ComplexMatrix::Identity(1, 1);
  bad(0, 0) = -1.0;
  CHECK_THROWS_AS(analytic_covariance(one, gp, cfg, bad, 0.1), ModelError);
}

TEST_CASE("analytic_covariance eigen-gap with three unit-power targets") {
  const ArrayConfig cfg = ArrayConfig::uniform(10);
  const ComplexMatrix r =
      analytic_covariance(three_targets(), GainPhase::identity(10), cfg, ComplexMatrix::Identity(3, 3), 0.01);
  const HermitianEig e = hermitian_eig(r);
  for (int i = 0; i < 3; ++i) CHECK(e.eigenvalues(i) > 0.01 + 1.0);
  for (int i = 3; i < 100; ++i) CHECK(std::abs(e.eigenvalues(i) - 0.01) <= 1e-9);
}

TEST_CASE("sample covariance converges to the analytic one") {
  const ArrayConfig cfg = ArrayConfig::uniform(6);
  const GainPhase gp = GainPhase::from_polar({1.1, 0.9, 1.05, 0.95}, {0.2, -0.1, 0.05, 0.0});
  const TargetScene scene({{deg_to_rad(-20.0), 1.0, 0.10}, {deg_to_rad(15.0), 1.0, 0.22}});
  const ComplexMatrix exact = analytic_covariance(scene, gp, cfg, ComplexMatrix::Identity(2, 2), 0.1);
  const auto rel_error = [&](int l) {
    const SnapshotSet s = generate_snapshots(scene, gp, cfg, l, NoiseSpec(0.1), 2024);
    return (sample_covariance(s) - exact).norm() / exact.norm();
  };
  const double e100 = rel_error(100);
  const double e10000 = rel_error(10000);
  CHECK(e10000 < e100);
  CHECK(e10000 < 0.05);
}

TEST_CASE("expected trace accounts for signal and noise energy") {
  const ArrayConfig cfg = ArrayConfig::uniform(5);
  const GainPhase gp = GainPhase::from_polar({1.2, 0.8, 1.1}, {0.1, 0.2, -0.3});
  const TargetScene scene({{deg_to_rad(-5.0), 1.0, 0.10}, {deg_to_rad(25.0), 1.0, 0.22}});
  const ComplexMatrix a = virtual_manifold(scene, gp, cfg);
  const double expect = a.squaredNorm() + 25 * 0.5;
  double mean = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    mean += sample_covariance(generate_snapshots(scene, gp, cfg, 100, NoiseSpec(0.5), seed)).trace().real();
  }
  mean /= 20.0;
  CHECK(mean == doctest::Approx(expect).epsilon(0.03));
}
