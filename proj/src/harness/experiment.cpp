#include <algorithm>
#include <cmath>
#include <limits>

#include <omp.h>

#include "mimocal/crb.hpp"
#include "mimocal/harness.hpp"
#include "mimocal/rng.hpp"
#include "mimocal/sim.hpp"

namespace mimocal::harness {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct EstimatorOutcome {
  bool ok = false;
  std::string error;
  std::vector<double> doas_deg;
  double doa_sq = 0.0;  // Σ_k (θ̂_k - θ_k)^2, deg^2
  bool has_gain = false;
  double gain_sq = 0.0;   // Σ_m (|ĥ_m| - α_m)^2 over uncalibrated antennas
  double phase_sq = 0.0;  // Σ_m wrap(arg ĥ_m - φ_m)^2
  // iteration_sweep only; index t = iteration count (0 = initializer)
  std::vector<double> iter_doa_sq;
  std::vector<double> iter_gain_sq;
  std::vector<double> iter_phase_sq;
};

struct RunOutcome {
  std::vector<EstimatorOutcome> estimators;  // parallel to cfg.estimators
  double crb_var_deg2 = kNaN;                // mean over targets of CRB_kk
};

GainPhase draw_gain_phase(const ExperimentConfig& cfg, Rng& rng) {
  if (const auto* ex = std::get_if<ExplicitErrors>(&cfg.errors)) {
    return GainPhase::from_polar(std::vector<double>(ex->gains.begin() + 2, ex->gains.end()),
                                 std::vector<double>(ex->phases.begin() + 2, ex->phases.end()));
  }
  const auto& u = std::get<UniformErrors>(cfg.errors);
  const int m = cfg.array.num_antennas;
  std::vector<double> gains, phases;
  for (int i = 2; i < m; ++i) {
    gains.push_back(rng.uniform(u.gain_lo, u.gain_hi));
    phases.push_back(rng.uniform(u.phase_lo, u.phase_hi));
  }
  return GainPhase::from_polar(gains, phases);
}

std::vector<double> dopplers_for(const ExperimentConfig& cfg) {
  return cfg.dopplers.empty() ? default_dopplers(cfg.num_targets()) : cfg.dopplers;
}

TargetScene make_scene(const ExperimentConfig& cfg, const std::vector<cd>& betas) {
  const std::vector<double> f = dopplers_for(cfg);
  std::vector<Target> targets;
  for (int k = 0; k < cfg.num_targets(); ++k) {
    targets.push_back(Target{deg_to_rad(cfg.angles_deg[k]), betas[k], f[k]});
  }
  return TargetScene(std::move(targets));
}

NoiseSpec noise_for(const ExperimentConfig& cfg, double snr_db) {
  return cfg.noise_free ? NoiseSpec::noise_free() : NoiseSpec::from_snr_db(snr_db);
}

double wrap_phase(double x) {
  x = std::remainder(x, 2.0 * kPi);
  return x <= -kPi ? x + 2.0 * kPi : x;
}

double doa_sq_error(const std::vector<double>& est_rad, const std::vector<double>& truth_deg) {
  if (est_rad.size() != truth_deg.size()) {
    throw EstimationError("estimator returned " + std::to_string(est_rad.size()) + " angles");
  }
  std::vector<double> truth = truth_deg;
  std::sort(truth.begin(), truth.end());
  double s = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const double e = rad_to_deg(est_rad[k]) - truth[k];
    s += e * e;
  }
  return s;
}

std::pair<double, double> gain_sq_error(const GainPhaseEstimate& est, const GainPhase& gp) {
  double g = 0.0, p = 0.0;
  for (int m = 2; m < gp.size(); ++m) {
    const double dg = std::abs(est.per_antenna(m)) - std::abs(gp[m]);
    const double dp = wrap_phase(std::arg(est.per_antenna(m)) - std::arg(gp[m]));
    g += dg * dg;
    p += dp * dp;
  }
  return {g, p};
}

bool uses_baseline_geometry(const ExperimentConfig& cfg, EstimatorKind e) {
  return cfg.scenario == Scenario::spacing_sweep &&
         (e == EstimatorKind::music_nominal || e == EstimatorKind::esprit_traditional);
}

RunOutcome simulate_run(const ExperimentConfig& cfg, int point, int run) {
  Rng rng(substream_seed(cfg.seed, static_cast<std::uint64_t>(point),
                         static_cast<std::uint64_t>(run)));
  const GainPhase gp = draw_gain_phase(cfg, rng);
  std::vector<cd> betas;
  for (int k = 0; k < cfg.num_targets(); ++k) betas.push_back(std::polar(1.0, rng.uniform(0.0, 2.0 * kPi)));
  const TargetScene scene = make_scene(cfg, betas);
  const NoiseSpec noise = noise_for(cfg, cfg.snr_grid_db[point]);
  const int k = cfg.num_targets();

  const ArrayConfig primary = cfg.array.build();
  const ArrayConfig baseline = cfg.baseline_geometry().build();

  RunOutcome out;
  out.estimators.resize(cfg.estimators.size());

  std::optional<SubspaceDecomp> primary_d, baseline_d;
  std::string primary_err, baseline_err;
  const auto decompose = [&](const ArrayConfig& geom, std::optional<SubspaceDecomp>& slot,
                             std::string& err) {
    try {
      slot = subspace(sample_covariance(generate_snapshots(scene, gp, geom, cfg.snapshots, noise, rng)), k);
    } catch (const std::exception& e) {
      err = e.what();
    }
  };
  decompose(primary, primary_d, primary_err);
  const bool needs_baseline =
      std::any_of(cfg.estimators.begin(), cfg.estimators.end(),
                  [&](EstimatorKind e) { return uses_baseline_geometry(cfg, e); });
  if (needs_baseline) decompose(baseline, baseline_d, baseline_err);

  for (std::size_t i = 0; i < cfg.estimators.size(); ++i) {
    const EstimatorKind kind = cfg.estimators[i];
    EstimatorOutcome& res = out.estimators[i];
    const bool on_baseline = uses_baseline_geometry(cfg, kind);
    const auto& d = on_baseline ? baseline_d : primary_d;
    const ArrayConfig& geom = on_baseline ? baseline : primary;
    if (!d) {
      res.error = on_baseline ? baseline_err : primary_err;
      continue;
    }
    try {
      std::vector<double> doas;
      switch (kind) {
        case EstimatorKind::music_nominal:
          doas = music_estimate(*d, nominal_provider(geom), default_music_grid(), k);
          break;
        case EstimatorKind::esprit_traditional:
          doas = esprit_traditional(*d, geom, k);
          break;
        case EstimatorKind::esprit_proposed:
          doas = esprit_proposed(*d, geom, k);
          break;
        case EstimatorKind::joint: {
          const JointEstimate j = joint_estimate(*d, geom, cfg.joint);
          doas = j.doas;
          if (j.gain_phase) {
            std::tie(res.gain_sq, res.phase_sq) = gain_sq_error(*j.gain_phase, gp);
            res.has_gain = true;
          }
          if (cfg.scenario == Scenario::iteration_sweep) {
            for (int t = 0; t <= cfg.joint.max_iterations; ++t) {
              const int used = std::min(t, j.iterations_used);
              res.iter_doa_sq.push_back(doa_sq_error(j.history[used], cfg.angles_deg));
              if (used >= 1) {
                const auto [g, p] = gain_sq_error(j.gain_history[used - 1], gp);
                res.iter_gain_sq.push_back(g);
                res.iter_phase_sq.push_back(p);
              } else {
                res.iter_gain_sq.push_back(kNaN);
                res.iter_phase_sq.push_back(kNaN);
              }
            }
          }
          break;
        }
      }
      res.doa_sq = doa_sq_error(doas, cfg.angles_deg);
      for (double t : doas) res.doas_deg.push_back(rad_to_deg(t));
      res.ok = true;
    } catch (const std::exception& e) {
      res = EstimatorOutcome{};
      res.error = e.what();
    }
  }

  if (!noise.is_noise_free()) {
    try {
      const CrbResult crb =
          fisher_matrix(scene, gp, primary, ComplexMatrix::Identity(k, k), noise.sigma2(), cfg.snapshots);
      double s = 0.0;
      for (double v : crb.doa_std_deg) s += v * v;
      out.crb_var_deg2 = s / k;
    } catch (const std::exception&) {
      // Left as NaN; excluded from the CRB average.
    }
  }
  return out;
}

struct Accumulator {
  double doa_sq = 0.0;
  double gain_sq = 0.0;
  double phase_sq = 0.0;
  int ok = 0;
  int gain_runs = 0;
  int failed = 0;
};

RmseRow finish_row(double sweep_value, EstimatorKind e, const Accumulator& acc, int k, int m,
                   double crb_deg) {
  RmseRow row;
  row.sweep_value = sweep_value;
  row.estimator = e;
  row.doa_rmse_deg = acc.ok > 0 ? std::sqrt(acc.doa_sq / (acc.ok * k)) : kNaN;
  if (acc.gain_runs > 0) {
    row.gain_rmse = std::sqrt(acc.gain_sq / (acc.gain_runs * (m - 2)));
    row.phase_rmse_rad = std::sqrt(acc.phase_sq / (acc.gain_runs * (m - 2)));
  }
  row.crb_deg = crb_deg;
  row.runs_failed = acc.failed;
  return row;
}

RmseReport aggregate(const ExperimentConfig& cfg, const std::vector<RunOutcome>& outcomes) {
  RmseReport report;
  report.name = cfg.name;
  report.scenario = cfg.scenario;
  report.sweep_label = cfg.scenario == Scenario::iteration_sweep ? "iteration" : "snr_db";
  const int k = cfg.num_targets();
  const int m = cfg.array.num_antennas;
  const int points = static_cast<int>(cfg.snr_grid_db.size());

  for (int p = 0; p < points; ++p) {
    double crb_sum = 0.0;
    int crb_n = 0;
    for (int r = 0; r < cfg.runs; ++r) {
      const RunOutcome& o = outcomes[static_cast<std::size_t>(p * cfg.runs + r)];
      if (std::isfinite(o.crb_var_deg2)) {
        crb_sum += o.crb_var_deg2;
        ++crb_n;
      }
    }
    const double crb_deg = cfg.noise_free ? 0.0 : (crb_n > 0 ? std::sqrt(crb_sum / crb_n) : kNaN);

    for (std::size_t e = 0; e < cfg.estimators.size(); ++e) {
      const EstimatorKind kind = cfg.estimators[e];
      if (cfg.scenario == Scenario::iteration_sweep) {
        std::vector<Accumulator> acc(static_cast<std::size_t>(cfg.joint.max_iterations + 1));
        for (int r = 0; r < cfg.runs; ++r) {
          const EstimatorOutcome& o = outcomes[static_cast<std::size_t>(p * cfg.runs + r)].estimators[e];
          for (std::size_t t = 0; t < acc.size(); ++t) {
            if (!o.ok) {
              ++acc[t].failed;
              continue;
            }
            acc[t].doa_sq += o.iter_doa_sq[t];
            ++acc[t].ok;
            if (std::isfinite(o.iter_gain_sq[t])) {
              acc[t].gain_sq += o.iter_gain_sq[t];
              acc[t].phase_sq += o.iter_phase_sq[t];
              ++acc[t].gain_runs;
            }
          }
        }
        for (std::size_t t = 0; t < acc.size(); ++t) {
          report.rows.push_back(finish_row(static_cast<double>(t), kind, acc[t], k, m, crb_deg));
        }
        continue;
      }

      Accumulator acc;
      for (int r = 0; r < cfg.runs; ++r) {
        const EstimatorOutcome& o = outcomes[static_cast<std::size_t>(p * cfg.runs + r)].estimators[e];
        if (!o.ok) {
          ++acc.failed;
          continue;
        }
        acc.doa_sq += o.doa_sq;
        ++acc.ok;
        if (o.has_gain) {
          acc.gain_sq += o.gain_sq;
          acc.phase_sq += o.phase_sq;
          ++acc.gain_runs;
        }
      }
      report.rows.push_back(finish_row(cfg.snr_grid_db[p], kind, acc, k, m, crb_deg));
    }
  }

  for (int p = 0; p < points; ++p) {
    for (int r = 0; r < cfg.runs; ++r) {
      const RunOutcome& o = outcomes[static_cast<std::size_t>(p * cfg.runs + r)];
      for (std::size_t e = 0; e < cfg.estimators.size(); ++e) {
        const EstimatorOutcome& eo = o.estimators[e];
        if (!eo.ok) {
          report.failures.push_back("point " + format_number(cfg.snr_grid_db[p]) + " dB / run " +
                                    std::to_string(r) + " / " + to_string(cfg.estimators[e]) +
                                    ": " + eo.error);
        } else if (cfg.scenario == Scenario::single_run) {
          report.estimates.push_back(RunEstimates{cfg.snr_grid_db[p], cfg.estimators[e], eo.doas_deg});
        }
      }
    }
  }
  return report;
}

}  // namespace

const RmseRow* RmseReport::find(double sweep_value, EstimatorKind e) const {
  for (const auto& r : rows) {
    if (r.sweep_value == sweep_value && r.estimator == e) return &r;
  }
  return nullptr;
}

GainPhase draw_gain_phase(const ExperimentConfig& cfg, int point, int run) {
  Rng rng(substream_seed(cfg.seed, static_cast<std::uint64_t>(point),
                         static_cast<std::uint64_t>(run)));
  return draw_gain_phase(cfg, rng);
}

RmseReport run_experiment_serial(const ExperimentConfig& cfg) {
  cfg.validate();
  const int points = static_cast<int>(cfg.snr_grid_db.size());
  std::vector<RunOutcome> outcomes(static_cast<std::size_t>(points * cfg.runs));
  for (int p = 0; p < points; ++p) {
    for (int r = 0; r < cfg.runs; ++r) {
      outcomes[static_cast<std::size_t>(p * cfg.runs + r)] = simulate_run(cfg, p, r);
    }
  }
  return aggregate(cfg, outcomes);
}

RmseReport run_experiment(const ExperimentConfig& cfg, const ExecutionOptions& exec) {
  cfg.validate();
  const int points = static_cast<int>(cfg.snr_grid_db.size());
  const int tasks = points * cfg.runs;
  std::vector<RunOutcome> outcomes(static_cast<std::size_t>(tasks));
  const int threads = exec.threads > 0 ? exec.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (int t = 0; t < tasks; ++t) {
    outcomes[static_cast<std::size_t>(t)] = simulate_run(cfg, t / cfg.runs, t % cfg.runs);
  }
  return aggregate(cfg, outcomes);
}

std::vector<CrbRow> crb_table(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.noise_free) throw std::invalid_argument("crb: undefined for a noise-free configuration");
  const ArrayConfig geom = cfg.array.build();
  const int k = cfg.num_targets();
  const TargetScene scene = make_scene(cfg, std::vector<cd>(static_cast<std::size_t>(k), cd(1.0, 0.0)));
  const bool fixed = std::holds_alternative<ExplicitErrors>(cfg.errors);
  const int draws = fixed ? 1 : cfg.runs;

  std::vector<CrbRow> rows;
  for (std::size_t p = 0; p < cfg.snr_grid_db.size(); ++p) {
    const double sigma2 = NoiseSpec::from_snr_db(cfg.snr_grid_db[p]).sigma2();
    std::vector<double> var(static_cast<std::size_t>(k), 0.0);
    for (int r = 0; r < draws; ++r) {
      const GainPhase gp = draw_gain_phase(cfg, static_cast<int>(p), r);
      const CrbResult crb =
          fisher_matrix(scene, gp, geom, ComplexMatrix::Identity(k, k), sigma2, cfg.snapshots);
      for (int t = 0; t < k; ++t) var[t] += crb.doa_std_deg[t] * crb.doa_std_deg[t];
    }
    for (int t = 0; t < k; ++t) {
      rows.push_back(CrbRow{cfg.snr_grid_db[p], cfg.angles_deg[t], std::sqrt(var[t] / draws)});
    }
  }
  return rows;
}

SpectrumDump spectrum_dump(const ExperimentConfig& cfg, double step_deg) {
  cfg.validate();
  Rng rng(substream_seed(cfg.seed, 0, 0));
  const GainPhase gp = draw_gain_phase(cfg, rng);
  std::vector<cd> betas;
  for (int k = 0; k < cfg.num_targets(); ++k) betas.push_back(std::polar(1.0, rng.uniform(0.0, 2.0 * kPi)));
  const TargetScene scene = make_scene(cfg, betas);
  const ArrayConfig geom = cfg.array.build();
  const SubspaceDecomp d = subspace(
      sample_covariance(generate_snapshots(scene, gp, geom, cfg.snapshots,
                                           noise_for(cfg, cfg.snr_grid_db.front()), rng)),
      cfg.num_targets());

  const std::vector<double> grid = angle_grid(deg_to_rad(-90.0 + step_deg),
                                              deg_to_rad(90.0 - step_deg), deg_to_rad(step_deg));
  SpectrumDump out;
  for (double t : grid) out.angles_deg.push_back(rad_to_deg(t));
  out.nominal = music_spectrum(d, nominal_provider(geom), grid);
  out.true_gamma = music_spectrum(d, true_provider(geom, gp), grid);
  try {
    const JointEstimate j = joint_estimate(d, geom, cfg.joint);
    if (j.gain_phase) out.calibrated = music_spectrum(d, calibrated_provider(geom, j.gain_phase->delta), grid);
  } catch (const std::exception&) {
    out.calibrated.clear();
  }
  return out;
}

}  // namespace mimocal::harness
