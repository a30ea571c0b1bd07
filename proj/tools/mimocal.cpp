// Command-line front end for the Monte Carlo experiments.
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <omp.h>

#include <CLI11.hpp>

#include "mimocal/harness.hpp"

namespace fs = std::filesystem;
using namespace mimocal::harness;

namespace {

#ifndef MIMOCAL_PRESET_DIR
#define MIMOCAL_PRESET_DIR "presets"
#endif

std::vector<fs::path> list_presets() {
  std::vector<fs::path> out;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(MIMOCAL_PRESET_DIR, ec)) {
    if (entry.path().extension() == ".json") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// A path on disk, or the stem of a bundled preset.
ExperimentConfig resolve_config(const std::string& arg) {
  if (fs::exists(arg)) return load_config(arg);
  const fs::path preset = fs::path(MIMOCAL_PRESET_DIR) / (arg + ".json");
  if (fs::exists(preset)) return load_config(preset);
  throw std::runtime_error("no config file or preset named '" + arg + "'");
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint DOA and gain/phase estimation with a partially calibrated MIMO array"};
  app.require_subcommand(1);

  std::string config_arg;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed_override;
  int threads = 0;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_arg, "Config file or preset name")->required();
    sub->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
    sub->add_option("--seed-override", seed_override, "Replace the config's seed");
    sub->add_option("--threads", threads, "Worker threads (0 = OpenMP default)")
        ->check(CLI::NonNegativeNumber);
  };

  CLI::App* run = app.add_subcommand("run", "Run a Monte Carlo experiment and write CSV");
  add_common(run);
  CLI::App* crb = app.add_subcommand("crb", "Tabulate the Cramer-Rao bound for a config");
  add_common(crb);
  CLI::App* spectrum = app.add_subcommand("spectrum", "Dump MUSIC spectra of one run");
  add_common(spectrum);
  double spectrum_step = 0.05;
  spectrum->add_option("--step-deg", spectrum_step, "Grid step in degrees")->capture_default_str();
  CLI::App* presets = app.add_subcommand("presets", "List bundled figure configs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (presets->parsed()) {
      for (const auto& p : list_presets()) {
        const ExperimentConfig cfg = load_config(p);
        std::cout << p.stem().string() << "\t" << to_string(cfg.scenario) << "\t" << p.string()
                  << "\n";
      }
      return 0;
    }

    ExperimentConfig cfg = resolve_config(config_arg);
    if (seed_override) cfg.seed = *seed_override;
    if (threads > 0) omp_set_num_threads(threads);

    if (run->parsed()) {
      const RmseReport report = run_experiment(cfg, ExecutionOptions{threads});
      for (const auto& f : report.failures) std::cerr << "run failed: " << f << "\n";
      for (const auto& e : report.estimates) {
        std::cout << format_number(e.snr_db) << " dB " << to_string(e.estimator) << ":";
        for (double d : e.doas_deg) std::cout << " " << format_number(d);
        std::cout << "\n";
      }
      const EmittedFiles files = emit_report(report, cfg, out_dir);
      std::cout << report_csv(report);
      std::cout << "wrote " << files.csv.string() << ", " << files.plot_script.string() << ", "
                << files.manifest.string() << "\n";
    } else if (crb->parsed()) {
      const std::string text = crb_csv(crb_table(cfg));
      const fs::path path = fs::path(out_dir) / (cfg.name + "_crb.csv");
      write_text(path, text);
      std::cout << text << "wrote " << path.string() << "\n";
    } else if (spectrum->parsed()) {
      const fs::path path = fs::path(out_dir) / (cfg.name + "_spectrum.csv");
      write_text(path, spectrum_csv(spectrum_dump(cfg, spectrum_step)));
      std::cout << "wrote " << path.string() << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
