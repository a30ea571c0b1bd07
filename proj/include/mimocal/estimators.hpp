#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mimocal/model.hpp"

namespace mimocal {

/// Raised when an estimator cannot produce a result (under-resolved
/// spectrum, rank-deficient subarray, rotation outside the visible region).
class EstimationError : public std::runtime_error {
 public:
  explicit EstimationError(const std::string& what) : std::runtime_error(what) {}
};

/// Signal/noise split of a virtual-array covariance.
struct SubspaceDecomp {
  ComplexMatrix signal;     // M^2 x K
  ComplexMatrix noise;      // M^2 x (M^2 - K)
  RealVector eigenvalues;   // descending

  int num_sources() const { return static_cast<int>(signal.cols()); }

  /// ||U_n^H v||^2, evaluated as ||v||^2 - ||U_s^H v||^2 (clamped at 0).
  double null_value(const ComplexVector& v) const;
};

SubspaceDecomp subspace(const ComplexMatrix& r, int k);

/// Maps an angle (radians) to a length-M^2 virtual steering vector.
using SteeringProvider = std::function<ComplexVector(double)>;

/// ā(θ) ⊗ ā(θ): the array as if every antenna were calibrated.
SteeringProvider nominal_provider(const ArrayConfig& cfg);
/// (Γā(θ)) ⊗ (Γā(θ)) for a known Γ.
SteeringProvider true_provider(const ArrayConfig& cfg, const GainPhase& gp);
/// diag(δ)(ā(θ) ⊗ ā(θ)) for an estimated δ.
SteeringProvider calibrated_provider(const ArrayConfig& cfg, const ComplexVector& delta);

/// Evenly spaced angles from lo to hi inclusive (radians).
std::vector<double> angle_grid(double lo, double hi, double step);

/// MUSIC pseudo-spectrum 1 / ||U_n^H v(θ)||^2 over the grid.  OpenMP over
/// grid points.
std::vector<double> music_spectrum(const SubspaceDecomp& d, const SteeringProvider& steering,
                                   const std::vector<double>& grid);
/// Single-threaded reference for music_spectrum.
std::vector<double> music_spectrum_serial(const SubspaceDecomp& d,
                                          const SteeringProvider& steering,
                                          const std::vector<double>& grid);

/// Default global search grid for the baseline MUSIC estimator.
std::vector<double> default_music_grid();

/// Angles at the k highest strict local maxima of the spectrum, refined
/// around each grid peak and sorted ascending.
std::vector<double> music_estimate(const SubspaceDecomp& d, const SteeringProvider& steering,
                                   const std::vector<double>& grid, int k);

/// θ = asin(-arg(q) λ / (2π d)).
double angle_from_rotation(cd q, double spacing, double wavelength);

/// ESPRIT over the full virtual array, transmit antennas 1..M-1 vs 2..M.
/// Assumes a uniform nominal array with the calibrated spacing.
std::vector<double> esprit_traditional(const SubspaceDecomp& d, const ArrayConfig& cfg, int k);

/// ESPRIT between the two calibrated transmit antennas only (rows 1..M vs
/// M+1..2M of U_s).  Insensitive to the gain/phase of antennas 3..M.
std::vector<double> esprit_proposed(const SubspaceDecomp& d, const ArrayConfig& cfg, int k);

/// Estimated diag(Γ ⊗ Γ) and the per-antenna gains it implies.
struct GainPhaseEstimate {
  ComplexVector delta;        // length M^2, delta[0] = delta[1] = 1
  ComplexVector per_antenna;  // length M, first M entries of delta
  /// max(|δ[M] - 1|, |δ[M+1] - 1|): entries that should also be 1 but are
  /// not constrained.
  double unenforced_deviation = 0.0;
};

/// Z = Σ_k V_k^H U_n U_n^H V_k with V_k = diag(ā(θ_k) ⊗ ā(θ_k)).
ComplexMatrix gain_phase_cost(const SubspaceDecomp& d, const std::vector<double>& doas,
                              const ArrayConfig& cfg);

/// min δ^H Z δ subject to δ[0] = δ[1] = 1, via the Lagrange closed form
/// δ = Z^-1 E (E^H Z^-1 E)^-1 f.
ComplexVector constrained_min_lagrange(const ComplexMatrix& z);

/// Same minimizer by eliminating the two constrained coordinates:
/// δ_free = -Z_ff^-1 Z_fc [1, 1]^T.
ComplexVector constrained_min_reduced(const ComplexMatrix& z);

GainPhaseEstimate estimate_gain_phase(const SubspaceDecomp& d, const std::vector<double>& doas,
                                      const ArrayConfig& cfg);

struct LocalSearchOptions {
  double window = deg_to_rad(2.0);
  double step = deg_to_rad(0.05);
  double fine_step = deg_to_rad(0.005);
};

/// Maximizes 1 / ||U_n^H diag(δ)(ā ⊗ ā)||^2 within ±window of each start
/// angle.  Windows must not overlap.
std::vector<double> refine_doas_local(const SubspaceDecomp& d, const GainPhaseEstimate& gp,
                                      const std::vector<double>& doas, const ArrayConfig& cfg,
                                      const LocalSearchOptions& opts = {});

struct JointOptions {
  int max_iterations = 5;
  double tol = deg_to_rad(1e-4);  // on max |Δθ|, radians
  LocalSearchOptions search;
};

struct JointEstimate {
  std::vector<double> doas;                  // radians, ascending
  std::optional<GainPhaseEstimate> gain_phase;  // empty if no iteration ran
  int iterations_used = 0;
  std::vector<std::vector<double>> history;  // [0] = ESPRIT initializer
  std::vector<GainPhaseEstimate> gain_history;  // one per iteration
};

/// Calibrated-pair ESPRIT initializer followed by alternating gain/phase
/// estimation and local DOA search until the DOAs stop moving.
JointEstimate joint_estimate(const SubspaceDecomp& d, const ArrayConfig& cfg,
                             const JointOptions& opts = {});
JointEstimate joint_estimate(const ComplexMatrix& r, int k, const ArrayConfig& cfg,
                             const JointOptions& opts = {});

}  // namespace mimocal
