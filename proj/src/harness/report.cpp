#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "mimocal/harness.hpp"

namespace mimocal::harness {

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string optional_number(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string();
}

std::string plot_script(const RmseReport& report, const std::string& csv_name) {
  const bool iterations = report.scenario == Scenario::iteration_sweep;
  std::ostringstream s;
  s << "#!/usr/bin/env python3\n"
    << "# Plots " << csv_name << "; regenerate with the mimocal CLI.\n"
    << "import csv\n"
    << "import os\n"
    << "import matplotlib\n"
    << "matplotlib.use(\"Agg\")\n"
    << "import matplotlib.pyplot as plt\n\n"
    << "HERE = os.path.dirname(os.path.abspath(__file__))\n"
    << "rows = list(csv.DictReader(open(os.path.join(HERE, \"" << csv_name << "\"))))\n"
    << "series = {}\n"
    << "for r in rows:\n"
    << "    series.setdefault(r[\"estimator\"], []).append(r)\n\n";
  if (iterations) {
    s << "fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))\n"
      << "for name, rs in series.items():\n"
      << "    x = [float(r[\"sweep_value\"]) for r in rs]\n"
      << "    ax1.plot(x, [float(r[\"doa_rmse_deg\"]) for r in rs], \"o-\", label=name)\n"
      << "    g = [(float(r[\"sweep_value\"]), float(r[\"gain_rmse\"]), float(r[\"phase_rmse_rad\"]))\n"
      << "         for r in rs if r[\"gain_rmse\"]]\n"
      << "    ax2.plot([v[0] for v in g], [v[1] for v in g], \"s-\", label=\"gain\")\n"
      << "    ax2.plot([v[0] for v in g], [v[2] for v in g], \"^-\", label=\"phase (rad)\")\n"
      << "ax1.set_xlabel(\"iteration\")\n"
      << "ax1.set_ylabel(\"DOA RMSE (deg)\")\n"
      << "ax2.set_xlabel(\"iteration\")\n"
      << "ax2.set_ylabel(\"RMSE\")\n"
      << "ax1.legend()\n"
      << "ax2.legend()\n";
  } else {
    s << "fig, ax = plt.subplots(figsize=(6, 4))\n"
      << "crb = {}\n"
      << "for name, rs in series.items():\n"
      << "    x = [float(r[\"sweep_value\"]) for r in rs]\n"
      << "    ax.semilogy(x, [float(r[\"doa_rmse_deg\"]) for r in rs], \"o-\", label=name)\n"
      << "    for r in rs:\n"
      << "        crb[float(r[\"sweep_value\"])] = float(r[\"crb_deg\"])\n"
      << "xs = sorted(crb)\n"
      << "ax.semilogy(xs, [crb[x] for x in xs], \"k--\", label=\"CRB\")\n"
      << "ax.set_xlabel(\"SNR (dB)\")\n"
      << "ax.set_ylabel(\"DOA RMSE (deg)\")\n"
      << "ax.grid(True, which=\"both\", alpha=0.3)\n"
      << "ax.legend()\n";
  }
  s << "fig.tight_layout()\n"
    << "fig.savefig(os.path.join(HERE, \"" << report.name << ".png\"), dpi=150)\n";
  return s.str();
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string report_csv(const RmseReport& report) {
  std::ostringstream s;
  s << "sweep_value,estimator,doa_rmse_deg,gain_rmse,phase_rmse_rad,crb_deg,runs_failed\n";
  for (const auto& r : report.rows) {
    s << format_number(r.sweep_value) << ',' << to_string(r.estimator) << ','
      << format_number(r.doa_rmse_deg) << ',' << optional_number(r.gain_rmse) << ','
      << optional_number(r.phase_rmse_rad) << ',' << format_number(r.crb_deg) << ','
      << r.runs_failed << '\n';
  }
  return s.str();
}

std::string crb_csv(const std::vector<CrbRow>& rows) {
  std::ostringstream s;
  s << "snr_db,angle_deg,crb_deg\n";
  for (const auto& r : rows) {
    s << format_number(r.snr_db) << ',' << format_number(r.angle_deg) << ','
      << format_number(r.crb_deg) << '\n';
  }
  return s.str();
}

std::string spectrum_csv(const SpectrumDump& dump) {
  std::ostringstream s;
  s << "angle_deg,music_nominal,music_true_gamma,music_calibrated\n";
  for (std::size_t i = 0; i < dump.angles_deg.size(); ++i) {
    s << format_number(dump.angles_deg[i]) << ',' << format_number(dump.nominal[i]) << ','
      << format_number(dump.true_gamma[i]) << ','
      << (dump.calibrated.empty() ? std::string() : format_number(dump.calibrated[i])) << '\n';
  }
  return s.str();
}

EmittedFiles emit_report(const RmseReport& report, const ExperimentConfig& cfg,
                         const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + out_dir.string() + ": " + ec.message());

  EmittedFiles files{out_dir / (report.name + ".csv"), out_dir / (report.name + "_plot.py"),
                     out_dir / (report.name + "_manifest.json")};
  write_file(files.csv, report_csv(report));
  write_file(files.plot_script, plot_script(report, files.csv.filename().string()));

  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(cfg)));
  const nlohmann::json manifest{{"name", report.name},
                                {"scenario", to_string(report.scenario)},
                                {"config_hash", hash},
                                {"seed", cfg.seed},
                                {"version", kVersion},
                                {"csv", files.csv.filename().string()},
                                {"runs_failed_total",
                                 static_cast<long long>(report.failures.size())}};
  write_file(files.manifest, manifest.dump(2) + "\n");
  return files;
}

}  // namespace mimocal::harness
