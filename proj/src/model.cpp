#include "mimocal/model.hpp"

#include <algorithm>
#include <cmath>

namespace mimocal {

ArrayConfig::ArrayConfig(int num_antennas, double wavelength, double calibrated_spacing,
                         double uncalibrated_spacing)
    : num_antennas_(num_antennas),
      wavelength_(wavelength),
      calibrated_spacing_(calibrated_spacing),
      uncalibrated_spacing_(uncalibrated_spacing) {
  if (num_antennas < 3) throw ModelError("ArrayConfig: need at least 3 antennas");
  if (!(wavelength > 0.0)) throw ModelError("ArrayConfig: wavelength must be positive");
  if (!(calibrated_spacing > 0.0) || !(uncalibrated_spacing > 0.0)) {
    throw ModelError("ArrayConfig: spacings must be positive");
  }
  positions_.resize(num_antennas);
  positions_(0) = 0.0;
  positions_(1) = calibrated_spacing;
  for (int m = 2; m < num_antennas; ++m) positions_(m) = positions_(m - 1) + uncalibrated_spacing;
}

ArrayConfig ArrayConfig::uniform(int num_antennas, double spacing_wavelengths) {
  return ArrayConfig(num_antennas, 1.0, spacing_wavelengths, spacing_wavelengths);
}

GainPhase::GainPhase(ComplexVector h) : h_(std::move(h)) {
  if (h_.size() < 3) throw ModelError("GainPhase: need at least 3 entries");
  if (h_(0) != cd(1.0, 0.0) || h_(1) != cd(1.0, 0.0)) {
    throw ModelError("GainPhase: calibrated antennas must have unit response");
  }
  for (Eigen::Index m = 0; m < h_.size(); ++m) {
    if (!(std::abs(h_(m)) > 0.0) || !std::isfinite(std::abs(h_(m)))) {
      throw ModelError("GainPhase: entry " + std::to_string(m) + " must be finite and nonzero");
    }
  }
}

GainPhase GainPhase::identity(int num_antennas) {
  return GainPhase(ComplexVector::Ones(num_antennas));
}

GainPhase GainPhase::from_polar(const std::vector<double>& gains,
                                const std::vector<double>& phases) {
  if (gains.size() != phases.size()) {
    throw ModelError("GainPhase: gain and phase lists differ in length");
  }
  ComplexVector h(static_cast<Eigen::Index>(gains.size()) + 2);
  h(0) = h(1) = 1.0;
  for (std::size_t i = 0; i < gains.size(); ++i) h(i + 2) = std::polar(gains[i], phases[i]);
  return GainPhase(std::move(h));
}

void check_angle(double theta) {
  if (!(std::abs(theta) < kPi / 2)) {
    throw ModelError("angle " + std::to_string(rad_to_deg(theta)) +
                     " deg is outside (-90, 90) deg");
  }
}

TargetScene::TargetScene(std::vector<Target> targets) : targets_(std::move(targets)) {
  if (targets_.empty()) throw ModelError("TargetScene: need at least one target");
  for (const auto& t : targets_) {
    check_angle(t.theta);
    if (t.doppler < 0.0 || t.doppler >= 1.0) {
      throw ModelError("TargetScene: Doppler must lie in [0, 1)");
    }
  }
  for (std::size_t i = 0; i < targets_.size(); ++i) {
    for (std::size_t j = i + 1; j < targets_.size(); ++j) {
      if (targets_[i].theta == targets_[j].theta) {
        throw ModelError("TargetScene: target angles must be distinct");
      }
      if (targets_[i].doppler == targets_[j].doppler) {
        throw ModelError("TargetScene: target Dopplers must be distinct");
      }
    }
  }
}

std::vector<double> TargetScene::angles() const {
  std::vector<double> out;
  out.reserve(targets_.size());
  for (const auto& t : targets_) out.push_back(t.theta);
  return out;
}

void TargetScene::validate_for(const ArrayConfig& cfg) const {
  if (size() >= cfg.num_antennas()) {
    throw ModelError("TargetScene: " + std::to_string(size()) + " targets need at least " +
                     std::to_string(size() + 1) + " antennas");
  }
}

std::vector<double> default_dopplers(int k) {
  std::vector<double> out(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) out[i] = std::fmod(0.10 + 0.12 * i, 1.0);
  return out;
}

ComplexVector ideal_steering(double theta, const ArrayConfig& cfg) {
  check_angle(theta);
  const double k = -2.0 * kPi * std::sin(theta) / cfg.wavelength();
  ComplexVector a(cfg.num_antennas());
  for (int m = 0; m < cfg.num_antennas(); ++m) a(m) = std::polar(1.0, k * cfg.positions()(m));
  return a;
}

ComplexVector actual_steering(double theta, const GainPhase& gp, const ArrayConfig& cfg) {
  if (gp.size() != cfg.num_antennas()) {
    throw ModelError("actual_steering: gain/phase vector length does not match the array");
  }
  return gp.values().cwiseProduct(ideal_steering(theta, cfg));
}

ComplexVector virtual_steering(double theta, const GainPhase& gp, const ArrayConfig& cfg) {
  const ComplexVector a = actual_steering(theta, gp, cfg);
  return kron(a, a);
}

ComplexMatrix virtual_manifold(const TargetScene& scene, const GainPhase& gp,
                               const ArrayConfig& cfg) {
  scene.validate_for(cfg);
  ComplexMatrix out(cfg.virtual_size(), scene.size());
  for (int k = 0; k < scene.size(); ++k) out.col(k) = virtual_steering(scene[k].theta, gp, cfg);
  return out;
}

ComplexVector calibrated_rotation(const TargetScene& scene, const ArrayConfig& cfg) {
  ComplexVector q(scene.size());
  for (int k = 0; k < scene.size(); ++k) {
    q(k) = std::polar(1.0, -2.0 * kPi * cfg.calibrated_spacing() * std::sin(scene[k].theta) /
                               cfg.wavelength());
  }
  return q;
}

}  // namespace mimocal
