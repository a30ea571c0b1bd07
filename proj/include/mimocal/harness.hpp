#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mimocal/estimators.hpp"
#include "mimocal/model.hpp"

namespace mimocal::harness {

inline constexpr const char* kVersion = "0.3.0";

enum class Scenario { snr_sweep, iteration_sweep, spacing_sweep, single_run };
enum class EstimatorKind { music_nominal, esprit_traditional, esprit_proposed, joint };

std::string to_string(Scenario s);
std::string to_string(EstimatorKind e);
Scenario parse_scenario(const std::string& s);
EstimatorKind parse_estimator(const std::string& s);

/// Array geometry as it appears in a config file (meters).
struct ArraySpec {
  int num_antennas = 10;
  double wavelength = 1.0;
  double calibrated_spacing = 0.5;
  double uncalibrated_spacing = 0.5;

  ArrayConfig build() const {
    return ArrayConfig(num_antennas, wavelength, calibrated_spacing, uncalibrated_spacing);
  }
};

/// Gains and phases of antennas 3..M drawn uniformly per run.
struct UniformErrors {
  double gain_lo = 0.8;
  double gain_hi = 1.2;
  double phase_lo = -kPi / 10;
  double phase_hi = kPi / 10;
};

/// A fixed Γ diagonal (all M entries; the first two must be 1).
struct ExplicitErrors {
  std::vector<double> gains;
  std::vector<double> phases;  // radians
};

using ErrorModel = std::variant<UniformErrors, ExplicitErrors>;

struct ExperimentConfig {
  std::string name = "experiment";
  Scenario scenario = Scenario::snr_sweep;
  ArraySpec array;
  /// Geometry the baselines (nominal MUSIC, traditional ESPRIT) see in a
  /// spacing sweep; defaults to a uniform array at the calibrated spacing.
  std::optional<ArraySpec> baseline_array;
  std::vector<double> angles_deg{10.0, 20.0, 30.0};
  std::vector<double> dopplers;  // empty: default schedule
  ErrorModel errors = UniformErrors{};
  std::vector<double> snr_grid_db{20.0};
  bool noise_free = false;
  int runs = 100;
  int snapshots = 100;
  std::vector<EstimatorKind> estimators{EstimatorKind::esprit_proposed, EstimatorKind::joint};
  JointOptions joint;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument on any violated constraint.
  void validate() const;
  ArraySpec baseline_geometry() const;
  int num_targets() const { return static_cast<int>(angles_deg.size()); }
};

ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& json_text);
/// Canonical JSON (sorted keys, fixed layout) used for hashing.
std::string dump_config(const ExperimentConfig& cfg);
/// FNV-1a 64 of dump_config.
std::uint64_t config_hash(const ExperimentConfig& cfg);

struct RmseRow {
  double sweep_value = 0.0;
  EstimatorKind estimator = EstimatorKind::joint;
  double doa_rmse_deg = 0.0;
  std::optional<double> gain_rmse;
  std::optional<double> phase_rmse_rad;
  double crb_deg = 0.0;
  int runs_failed = 0;
};

/// Estimates from one run (single_run scenario only).
struct RunEstimates {
  double snr_db = 0.0;
  EstimatorKind estimator = EstimatorKind::joint;
  std::vector<double> doas_deg;
};

struct RmseReport {
  std::string name;
  Scenario scenario = Scenario::snr_sweep;
  std::string sweep_label = "snr_db";
  std::vector<RmseRow> rows;
  std::vector<std::string> failures;  // "point/run/estimator: message"
  std::vector<RunEstimates> estimates;

  const RmseRow* find(double sweep_value, EstimatorKind e) const;
};

struct ExecutionOptions {
  int threads = 0;  // 0: OpenMP default
};

/// Monte Carlo runs distributed over an OpenMP pool; aggregation is in
/// (sweep point, run) order, so the result does not depend on threads.
RmseReport run_experiment(const ExperimentConfig& cfg, const ExecutionOptions& exec = {});
/// Single-threaded reference for run_experiment.
RmseReport run_experiment_serial(const ExperimentConfig& cfg);

/// Γ used for a given (sweep point, run): drawn from the run's substream in
/// uniform mode, fixed in explicit mode.
GainPhase draw_gain_phase(const ExperimentConfig& cfg, int point, int run);

struct CrbRow {
  double snr_db = 0.0;
  double angle_deg = 0.0;
  double crb_deg = 0.0;
};

/// CRB of each target per SNR point, RMS over the runs' Γ draws.
std::vector<CrbRow> crb_table(const ExperimentConfig& cfg);

struct SpectrumDump {
  std::vector<double> angles_deg;
  std::vector<double> nominal;     // Γ = I manifold
  std::vector<double> true_gamma;  // actual Γ
  std::vector<double> calibrated;  // joint-estimate δ (empty on failure)
};

/// MUSIC spectra of run 0 at the first SNR point.
SpectrumDump spectrum_dump(const ExperimentConfig& cfg, double step_deg = 0.05);

struct EmittedFiles {
  std::filesystem::path csv;
  std::filesystem::path plot_script;
  std::filesystem::path manifest;
};

/// Writes <name>.csv, <name>_plot.py and <name>_manifest.json.
EmittedFiles emit_report(const RmseReport& report, const ExperimentConfig& cfg,
                         const std::filesystem::path& out_dir);

/// CSV text of a report (exactly the bytes emit_report writes).
std::string report_csv(const RmseReport& report);

std::string crb_csv(const std::vector<CrbRow>& rows);
std::string spectrum_csv(const SpectrumDump& dump);

/// "%.6g" with "nan" for NaN.
std::string format_number(double v);

}  // namespace mimocal::harness
