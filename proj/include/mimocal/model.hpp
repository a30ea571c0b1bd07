#pragma once

#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "mimocal/numerics.hpp"

namespace mimocal {

class ModelError : public std::invalid_argument {
 public:
  explicit ModelError(const std::string& what) : std::invalid_argument(what) {}
};

inline constexpr double kPi = std::numbers::pi;
inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Geometry of the transceive linear array.  Antennas 1 and 2 are the
/// calibrated pair, separated by calibrated_spacing; every later antenna
/// follows at uncalibrated_spacing.
class ArrayConfig {
 public:
  static constexpr int kNumCalibrated = 2;

  ArrayConfig(int num_antennas, double wavelength, double calibrated_spacing,
              double uncalibrated_spacing);

  /// Uniform array with spacing expressed in wavelengths.
  static ArrayConfig uniform(int num_antennas, double spacing_wavelengths = 0.5);

  int num_antennas() const { return num_antennas_; }
  int virtual_size() const { return num_antennas_ * num_antennas_; }
  double wavelength() const { return wavelength_; }
  double calibrated_spacing() const { return calibrated_spacing_; }
  double uncalibrated_spacing() const { return uncalibrated_spacing_; }
  /// Antenna positions in meters, strictly increasing from 0.
  const RealVector& positions() const { return positions_; }

 private:
  int num_antennas_;
  double wavelength_;
  double calibrated_spacing_;
  double uncalibrated_spacing_;
  RealVector positions_;
};

/// Per-antenna complex gain h_m = alpha_m exp(j phi_m); h_1 = h_2 = 1.
class GainPhase {
 public:
  explicit GainPhase(ComplexVector h);

  static GainPhase identity(int num_antennas);
  /// Builds h from magnitudes and phases of antennas 3..M.
  static GainPhase from_polar(const std::vector<double>& gains, const std::vector<double>& phases);

  const ComplexVector& values() const { return h_; }
  int size() const { return static_cast<int>(h_.size()); }
  cd operator[](int m) const { return h_(m); }

 private:
  ComplexVector h_;
};

struct Target {
  double theta;  // radians
  cd beta{1.0, 0.0};
  double doppler = 0.0;  // normalized, [0, 1)
};

/// K targets with distinct angles and Dopplers.
class TargetScene {
 public:
  explicit TargetScene(std::vector<Target> targets);

  int size() const { return static_cast<int>(targets_.size()); }
  const std::vector<Target>& targets() const { return targets_; }
  const Target& operator[](int k) const { return targets_[k]; }
  std::vector<double> angles() const;

  /// Checks the scene against an array (K < M).
  void validate_for(const ArrayConfig& cfg) const;

 private:
  std::vector<Target> targets_;
};

/// Default Doppler schedule 0.10, 0.22, 0.34, ...
std::vector<double> default_dopplers(int k);

ComplexVector ideal_steering(double theta, const ArrayConfig& cfg);
ComplexVector actual_steering(double theta, const GainPhase& gp, const ArrayConfig& cfg);

/// a(theta) (x) a(theta) for a given per-antenna response.
ComplexVector virtual_steering(double theta, const GainPhase& gp, const ArrayConfig& cfg);

/// M^2 x K matrix whose column k is a(theta_k) (x) a(theta_k).
ComplexMatrix virtual_manifold(const TargetScene& scene, const GainPhase& gp,
                               const ArrayConfig& cfg);

/// diag(exp(-j 2 pi d_c sin(theta_k) / lambda)): the rotation between the
/// first two M-row blocks of the virtual manifold.
ComplexVector calibrated_rotation(const TargetScene& scene, const ArrayConfig& cfg);

void check_angle(double theta);

}  // namespace mimocal
