// End-to-end acceptance checks.  Prints one line per criterion and exits
// nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "mimocal/crb.hpp"
#include "mimocal/estimators.hpp"
#include "mimocal/harness.hpp"
#include "mimocal/sim.hpp"

using namespace mimocal;
using harness::EstimatorKind;
using harness::RmseReport;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

int g_failures = 0;

void report(int id, const std::string& title, const Outcome& o, double secs) {
  std::printf("%s  [%d] %s (%.1f s)%s%s\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), secs,
              o.detail.empty() ? "" : ": ", o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++g_failures;
}

void run_criterion(int id, const std::string& title, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  report(id, title, o, seconds_since(t0));
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

harness::ExperimentConfig preset(const std::string& name) {
  return harness::load_config(std::string(MIMOCAL_PRESET_DIR) + "/" + name + ".json");
}

TargetScene three_targets() {
  return TargetScene({{deg_to_rad(10.0), 1.0, 0.10},
                      {deg_to_rad(20.0), 1.0, 0.22},
                      {deg_to_rad(30.0), 1.0, 0.34}});
}

GainPhase example_gamma() {
  return GainPhase::from_polar({1.13, 0.89, 1.1, 1.05, 0.98, 0.90, 1.15, 0.88},
                               {-0.020, 0.180, 0.130, -0.038, 0.101, -0.057, -0.187, -0.247});
}

SubspaceDecomp noise_free_subspace(const GainPhase& gp, const ArrayConfig& cfg, std::uint64_t seed) {
  const SnapshotSet s = generate_snapshots(three_targets(), gp, cfg, 100, NoiseSpec::noise_free(), seed);
  return subspace(sample_covariance(s), 3);
}

double worst_deg(const std::vector<double>& est) {
  const auto truth = three_targets().angles();
  if (est.size() != truth.size()) return INFINITY;
  double w = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) w = std::max(w, std::abs(rad_to_deg(est[i] - truth[i])));
  return w;
}

double rmse(const RmseReport& r, double x, EstimatorKind e) {
  const auto* row = r.find(x, e);
  if (!row) throw std::runtime_error("missing row " + harness::to_string(e) + " at " + harness::format_number(x));
  return row->doa_rmse_deg;
}

std::vector<double> points_from(const RmseReport& r, double lo) {
  std::vector<double> xs;
  for (const auto& row : r.rows)
    if (row.sweep_value >= lo && std::find(xs.begin(), xs.end(), row.sweep_value) == xs.end())
      xs.push_back(row.sweep_value);
  return xs;
}

constexpr int kParallelThreads = 4;

}  // namespace

int main() {
  std::printf("mimocal %s acceptance\n", harness::kVersion);

  run_criterion(1, "noise-free DOAs exact for proposed/traditional ESPRIT and MUSIC", [] {
    Outcome o;
    const auto t0 = Clock::now();
    const ArrayConfig cfg = ArrayConfig::uniform(10);
    double worst_prop = 0.0;
    for (std::uint64_t draw = 0; draw < 50; ++draw) {
      Rng rng(substream_seed(4401, 0, draw));
      std::vector<double> g, p;
      for (int i = 2; i < 10; ++i) g.push_back(rng.uniform(0.8, 1.2));
      for (int i = 2; i < 10; ++i) p.push_back(rng.uniform(-kPi / 10, kPi / 10));
      const SubspaceDecomp d = noise_free_subspace(GainPhase::from_polar(g, p), cfg, draw);
      worst_prop = std::max(worst_prop, worst_deg(esprit_proposed(d, cfg, 3)));
    }
    const SubspaceDecomp ideal = noise_free_subspace(GainPhase::identity(10), cfg, 99);
    const double trad = worst_deg(esprit_traditional(ideal, cfg, 3));
    const double music = worst_deg(music_estimate(ideal, nominal_provider(cfg), default_music_grid(), 3));
    const double secs = seconds_since(t0);
    o.require(worst_prop <= 1e-6, fmt("proposed max err %.3g deg", worst_prop));
    o.require(trad <= 1e-6, fmt("traditional max err %.3g deg", trad));
    o.require(music <= 1e-6, fmt("MUSIC max err %.3g deg", music));
    o.require(secs < 10.0, fmt("took %.1f s", secs));
    if (o.pass) o.detail = fmt("max err %.2g / %.2g / %.2g deg", worst_prop, trad, music);
    return o;
  });

  run_criterion(2, "fixed gain/phase vector recovered from noise-free data", [] {
    Outcome o;
    const ArrayConfig cfg = ArrayConfig::uniform(10);
    const GainPhase gp = example_gamma();
    const JointEstimate j = joint_estimate(noise_free_subspace(gp, cfg, 17), cfg);
    if (!j.gain_phase) {
      o.require(false, "no gain/phase estimate");
      return o;
    }
    const double err = (j.gain_phase->per_antenna - gp.values()).cwiseAbs().maxCoeff();
    o.require(err <= 1e-6, fmt("max entry error %.3g", err));
    if (o.pass) o.detail = fmt("max entry error %.2g", err);
    return o;
  });

  RmseReport fig1, fig2, fig4;
  const auto timed_run = [](const harness::ExperimentConfig& c, double& secs) {
    const auto t0 = Clock::now();
    RmseReport r = harness::run_experiment(c, {kParallelThreads});
    secs = seconds_since(t0);
    return r;
  };

  run_criterion(3, "SNR sweep: ordering, monotone proposed curves, baseline floor", [&] {
    Outcome o;
    double secs = 0.0;
    fig1 = timed_run(preset("fig1_snr_sweep"), secs);
    const auto xs = points_from(fig1, 10.0);
    o.require(!xs.empty(), "no SNR points >= 10 dB");
    for (double x : xs) {
      const double joint = rmse(fig1, x, EstimatorKind::joint);
      const double prop = rmse(fig1, x, EstimatorKind::esprit_proposed);
      const double base = std::min(rmse(fig1, x, EstimatorKind::music_nominal),
                                   rmse(fig1, x, EstimatorKind::esprit_traditional));
      o.require(joint < prop && prop < base,
                fmt("ordering broken at %g dB (joint %.4g, proposed %.4g, ", x, joint, prop) +
                    fmt("best baseline %.4g)", base));
    }
    for (EstimatorKind e : {EstimatorKind::esprit_proposed, EstimatorKind::joint}) {
      int rises = 0;
      for (std::size_t i = 1; i < xs.size(); ++i) rises += rmse(fig1, xs[i], e) > rmse(fig1, xs[i - 1], e);
      o.require(rises <= 1, harness::to_string(e) + " not monotone (" + std::to_string(rises) + " rises)");
    }
    for (EstimatorKind e : {EstimatorKind::music_nominal, EstimatorKind::esprit_traditional}) {
      const double lo = rmse(fig1, xs.front(), e);
      const double hi = rmse(fig1, xs.back(), e);
      o.require(hi > 0.5 * lo, harness::to_string(e) + fmt(" has no floor (%.4g vs %.4g)", hi, lo));
    }
    o.require(secs < 15 * 60.0, fmt("sweep took %.0f s", secs));
    if (o.pass) {
      o.detail = fmt("joint/proposed/MUSIC/trad at 30 dB: %.4g / %.4g / ", rmse(fig1, 30, EstimatorKind::joint),
                     rmse(fig1, 30, EstimatorKind::esprit_proposed)) +
                 fmt("%.4g / %.4g", rmse(fig1, 30, EstimatorKind::music_nominal),
                     rmse(fig1, 30, EstimatorKind::esprit_traditional));
    }
    return o;
  });

  run_criterion(4, "iteration sweep: iteration 2 within 5% of iteration 5", [&] {
    Outcome o;
    double secs = 0.0;
    fig2 = timed_run(preset("fig2_iteration_sweep"), secs);
    const auto* r2 = fig2.find(2, EstimatorKind::joint);
    const auto* r5 = fig2.find(5, EstimatorKind::joint);
    if (!r2 || !r5 || !r2->gain_rmse || !r5->gain_rmse) {
      o.require(false, "iteration rows missing");
      return o;
    }
    const auto close = [&](double a, double b, const std::string& what) {
      o.require(std::abs(a - b) <= 0.05 * b, what + fmt(": %.5g vs %.5g", a, b));
    };
    close(r2->doa_rmse_deg, r5->doa_rmse_deg, "DOA");
    close(*r2->gain_rmse, *r5->gain_rmse, "gain");
    close(*r2->phase_rmse_rad, *r5->phase_rmse_rad, "phase");
    if (o.pass) o.detail = fmt("DOA %.5g vs %.5g deg", r2->doa_rmse_deg, r5->doa_rmse_deg);
    return o;
  });

  run_criterion(5, "wide uncalibrated spacing beats the half-wavelength array", [&] {
    Outcome o;
    double secs = 0.0;
    fig4 = timed_run(preset("fig4_spacing_sweep"), secs);
    if (fig1.rows.empty()) {
      o.require(false, "SNR sweep unavailable");
      return o;
    }
    double worst_ratio = 0.0;
    for (double x : points_from(fig4, 10.0)) {
      const double wide = rmse(fig4, x, EstimatorKind::joint);
      const double half = rmse(fig1, x, EstimatorKind::joint);
      worst_ratio = std::max(worst_ratio, wide / half);
      o.require(wide < half, fmt("at %g dB: %.4g vs %.4g", x, wide, half));
    }
    if (o.pass) o.detail = fmt("worst ratio %.3f", worst_ratio);
    return o;
  });

  run_criterion(6, "CRB: Fisher symmetric PSD, derivatives, 1/L scaling, bound respected", [&] {
    Outcome o;
    const ArrayConfig cfg = ArrayConfig::uniform(10);
    const TargetScene scene = three_targets();
    const GainPhase gp = example_gamma();
    const ComplexMatrix rb = ComplexMatrix::Identity(3, 3);

    const CrbResult r = fisher_matrix(scene, gp, cfg, rb, 0.1, 100);
    const double asym = (r.fisher - r.fisher.transpose()).cwiseAbs().maxCoeff();
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(r.fisher, Eigen::EigenvaluesOnly);
    o.require(asym == 0.0, fmt("asymmetry %.3g", asym));
    o.require(es.eigenvalues().minCoeff() >= 0.0, fmt("min eigenvalue %.3g", es.eigenvalues().minCoeff()));

    // Central differences of A against the analytic derivatives.
    const auto da = manifold_derivatives(scene, gp, cfg);
    const double h = 1e-6;
    double worst = 0.0;
    for (int i = 0; i < static_cast<int>(da.size()); ++i) {
      auto shifted = [&](double s) {
        std::vector<Target> ts = scene.targets();
        ComplexVector g = gp.values();
        if (i < 3) ts[i].theta += s;
        else if (i < 3 + 8) g(i - 1) += s;
        else g(i - 9) += cd(0, s);
        return virtual_manifold(TargetScene(ts), GainPhase(g), cfg);
      };
      const ComplexMatrix fd = (shifted(h) - shifted(-h)) / (2 * h);
      worst = std::max(worst, (fd - da[i]).cwiseAbs().maxCoeff() / da[i].cwiseAbs().maxCoeff());
    }
    o.require(worst <= 1e-5, fmt("derivative relative error %.3g", worst));

    const CrbResult l1000 = fisher_matrix(scene, gp, cfg, rb, 0.1, 1000);
    double scale_err = 0.0;
    for (int t = 0; t < 3; ++t)
      scale_err = std::max(scale_err, std::abs(r.crb_matrix(t, t) / l1000.crb_matrix(t, t) - 10.0) / 10.0);
    o.require(scale_err <= 1e-9, fmt("1/L scaling off by %.3g", scale_err));

    if (fig1.rows.empty()) {
      o.require(false, "SNR sweep unavailable");
    } else {
      for (double x : points_from(fig1, 25.0)) {
        const auto* row = fig1.find(x, EstimatorKind::joint);
        o.require(row->doa_rmse_deg >= 0.5 * row->crb_deg,
                  fmt("at %g dB RMSE %.4g below half the CRB %.4g", x, row->doa_rmse_deg, row->crb_deg));
      }
    }
    if (o.pass) {
      o.detail = fmt("derivative err %.2g, joint/CRB at 30 dB %.3f", worst,
                     rmse(fig1, 30, EstimatorKind::joint) / fig1.find(30, EstimatorKind::joint)->crb_deg);
    }
    return o;
  });

  run_criterion(7, "presets give identical CSVs serially and in parallel", [&] {
    Outcome o;
    const std::pair<const char*, const RmseReport*> runs[] = {
        {"fig1_snr_sweep", &fig1}, {"fig2_iteration_sweep", &fig2},
        {"fig4_spacing_sweep", &fig4}, {"single_run", nullptr}};
    for (const auto& [name, parallel] : runs) {
      const harness::ExperimentConfig c = preset(name);
      const std::string serial = harness::report_csv(harness::run_experiment_serial(c));
      const std::string par = parallel && !parallel->rows.empty()
                                  ? harness::report_csv(*parallel)
                                  : harness::report_csv(harness::run_experiment(c, {kParallelThreads}));
      o.require(serial == par, std::string(name) + " differs");
    }
    if (o.pass) o.detail = "4 presets, " + std::to_string(kParallelThreads) + " threads vs serial";
    return o;
  });

  std::printf("%d criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
