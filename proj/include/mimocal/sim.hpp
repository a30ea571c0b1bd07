#pragma once

#include <cstdint>

#include "mimocal/model.hpp"
#include "mimocal/rng.hpp"

namespace mimocal {

/// White-noise power.  Positive in normal use; zero is accepted as an
/// explicit noise-free setting for oracle runs.
class NoiseSpec {
 public:
  explicit NoiseSpec(double sigma2);
  static NoiseSpec from_snr_db(double snr_db);
  static NoiseSpec noise_free() { return NoiseSpec(0.0); }

  double sigma2() const { return sigma2_; }
  /// Per-source SNR for unit-power sources; +inf when noise free.
  double snr_db() const;
  bool is_noise_free() const { return sigma2_ == 0.0; }

 private:
  double sigma2_;
};

/// Matched-filter outputs, one snapshot per column (M^2 x L).
struct SnapshotSet {
  ComplexMatrix data;
  int snapshots = 0;
  std::uint64_t seed = 0;
};

/// x[n] = A b[n] + noise, b_k[n] = beta_k exp(j 2 pi f_k n), n = 0..L-1.
SnapshotSet generate_snapshots(const TargetScene& scene, const GainPhase& gp,
                               const ArrayConfig& cfg, int snapshots, const NoiseSpec& noise,
                               std::uint64_t seed);

/// Same as above but draws the noise from a caller-owned stream.
ComplexMatrix generate_snapshots(const TargetScene& scene, const GainPhase& gp,
                                 const ArrayConfig& cfg, int snapshots, const NoiseSpec& noise,
                                 Rng& rng);

/// (1/L) sum_n x[n] x[n]^H.  OpenMP over rows; the upper triangle is
/// computed and mirrored so the result is exactly Hermitian.
ComplexMatrix sample_covariance(const ComplexMatrix& x);
inline ComplexMatrix sample_covariance(const SnapshotSet& s) { return sample_covariance(s.data); }

/// Single-threaded reference for sample_covariance; identical arithmetic.
ComplexMatrix sample_covariance_serial(const ComplexMatrix& x);

/// A R_b A^H + sigma2 I.
ComplexMatrix analytic_covariance(const TargetScene& scene, const GainPhase& gp,
                                  const ArrayConfig& cfg, const ComplexMatrix& rb, double sigma2);

}  // namespace mimocal
