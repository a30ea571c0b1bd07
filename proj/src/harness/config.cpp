#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "mimocal/harness.hpp"

namespace mimocal::harness {

using nlohmann::json;

namespace {

struct NamedScenario {
  Scenario value;
  const char* name;
};
constexpr NamedScenario kScenarios[] = {{Scenario::snr_sweep, "snr_sweep"},
                                        {Scenario::iteration_sweep, "iteration_sweep"},
                                        {Scenario::spacing_sweep, "spacing_sweep"},
                                        {Scenario::single_run, "single_run"}};

struct NamedEstimator {
  EstimatorKind value;
  const char* name;
};
constexpr NamedEstimator kEstimators[] = {
    {EstimatorKind::music_nominal, "music_nominal"},
    {EstimatorKind::esprit_traditional, "esprit_traditional"},
    {EstimatorKind::esprit_proposed, "esprit_proposed"},
    {EstimatorKind::joint, "joint"}};

void fail(const std::string& what) { throw std::invalid_argument("config: " + what); }

ArraySpec parse_array(const json& j) {
  ArraySpec a;
  a.num_antennas = j.at("num_antennas").get<int>();
  a.wavelength = j.value("wavelength", 1.0);
  a.calibrated_spacing = j.at("calibrated_spacing").get<double>();
  a.uncalibrated_spacing = j.value("uncalibrated_spacing", a.calibrated_spacing);
  return a;
}

json array_json(const ArraySpec& a) {
  return json{{"num_antennas", a.num_antennas},
              {"wavelength", a.wavelength},
              {"calibrated_spacing", a.calibrated_spacing},
              {"uncalibrated_spacing", a.uncalibrated_spacing}};
}

std::pair<double, double> parse_range(const json& j, const char* key) {
  const auto v = j.at(key).get<std::vector<double>>();
  if (v.size() != 2 || !(v[0] <= v[1])) fail(std::string(key) + " must be [lo, hi] with lo <= hi");
  return {v[0], v[1]};
}

}  // namespace

std::string to_string(Scenario s) {
  for (const auto& n : kScenarios) {
    if (n.value == s) return n.name;
  }
  return "unknown";
}

std::string to_string(EstimatorKind e) {
  for (const auto& n : kEstimators) {
    if (n.value == e) return n.name;
  }
  return "unknown";
}

Scenario parse_scenario(const std::string& s) {
  for (const auto& n : kScenarios) {
    if (s == n.name) return n.value;
  }
  fail("unknown scenario '" + s + "'");
  return Scenario::snr_sweep;
}

EstimatorKind parse_estimator(const std::string& s) {
  for (const auto& n : kEstimators) {
    if (s == n.name) return n.value;
  }
  fail("unknown estimator '" + s + "'");
  return EstimatorKind::joint;
}

ArraySpec ExperimentConfig::baseline_geometry() const {
  if (baseline_array) return *baseline_array;
  ArraySpec b = array;
  b.uncalibrated_spacing = b.calibrated_spacing;
  return b;
}

void ExperimentConfig::validate() const {
  if (name.empty()) fail("name must be non-empty");
  if (runs < 1) fail("runs must be >= 1");
  if (snapshots < 1) fail("snapshots must be >= 1");
  if (snr_grid_db.empty()) fail("snr_grid_db must be non-empty");
  if (angles_deg.empty()) fail("scene needs at least one angle");
  for (double a : angles_deg) {
    if (!(a > -90.0 && a < 90.0)) fail("angles must lie in (-90, 90) degrees");
  }
  if (!dopplers.empty() && dopplers.size() != angles_deg.size()) {
    fail("dopplers must list one value per angle");
  }
  if (estimators.empty()) fail("at least one estimator is required");
  if (joint.max_iterations < 0) fail("joint.max_iterations must be >= 0");

  const ArrayConfig geom = array.build();
  if (num_targets() >= geom.num_antennas()) fail("need fewer targets than antennas");
  if (scenario == Scenario::spacing_sweep) (void)baseline_geometry().build();

  if (const auto* ex = std::get_if<ExplicitErrors>(&errors)) {
    const auto m = static_cast<std::size_t>(array.num_antennas);
    if (ex->gains.size() != m || ex->phases.size() != m) {
      fail("explicit gains/phases must have num_antennas entries");
    }
    if (ex->gains[0] != 1.0 || ex->gains[1] != 1.0 || ex->phases[0] != 0.0 ||
        ex->phases[1] != 0.0) {
      fail("the two calibrated antennas must have gain 1 and phase 0");
    }
  } else {
    const auto& u = std::get<UniformErrors>(errors);
    if (!(u.gain_lo > 0.0)) fail("gain range must be positive");
  }

  if (scenario == Scenario::iteration_sweep) {
    if (snr_grid_db.size() != 1) fail("iteration_sweep takes exactly one SNR value");
    if (estimators.size() != 1 || estimators[0] != EstimatorKind::joint) {
      fail("iteration_sweep runs the joint estimator only");
    }
  }
  if (scenario == Scenario::single_run && runs != 1) fail("single_run requires runs = 1");
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(std::string("malformed JSON: ") + e.what());
  }
  ExperimentConfig c;
  try {
    c.name = j.value("name", c.name);
    c.scenario = parse_scenario(j.at("scenario").get<std::string>());
    c.array = parse_array(j.at("array"));
    if (j.contains("baseline_array")) c.baseline_array = parse_array(j.at("baseline_array"));

    const json& scene = j.at("scene");
    c.angles_deg = scene.at("angles_deg").get<std::vector<double>>();
    c.dopplers = scene.value("dopplers", std::vector<double>{});

    if (j.contains("errors")) {
      const json& e = j.at("errors");
      const std::string mode = e.at("mode").get<std::string>();
      if (mode == "uniform") {
        UniformErrors u;
        std::tie(u.gain_lo, u.gain_hi) = parse_range(e, "gain_range");
        std::tie(u.phase_lo, u.phase_hi) = parse_range(e, "phase_range_rad");
        c.errors = u;
      } else if (mode == "explicit") {
        c.errors = ExplicitErrors{e.at("gains").get<std::vector<double>>(),
                                  e.at("phases_rad").get<std::vector<double>>()};
      } else if (mode == "none") {
        std::vector<double> g(static_cast<std::size_t>(c.array.num_antennas), 1.0);
        c.errors = ExplicitErrors{g, std::vector<double>(g.size(), 0.0)};
      } else {
        fail("errors.mode must be uniform, explicit or none");
      }
    }

    c.snr_grid_db = j.at("snr_grid_db").get<std::vector<double>>();
    c.noise_free = j.value("noise_free", false);
    c.runs = j.value("runs", c.runs);
    c.snapshots = j.value("snapshots", c.snapshots);
    if (j.contains("estimators")) {
      c.estimators.clear();
      for (const auto& s : j.at("estimators")) c.estimators.push_back(parse_estimator(s));
    }
    if (j.contains("joint")) {
      const json& o = j.at("joint");
      c.joint.max_iterations = o.value("max_iterations", c.joint.max_iterations);
      c.joint.tol = deg_to_rad(o.value("tol_deg", rad_to_deg(c.joint.tol)));
      c.joint.search.window = deg_to_rad(o.value("window_deg", rad_to_deg(c.joint.search.window)));
      c.joint.search.step = deg_to_rad(o.value("step_deg", rad_to_deg(c.joint.search.step)));
      c.joint.search.fine_step =
          deg_to_rad(o.value("fine_step_deg", rad_to_deg(c.joint.search.fine_step)));
    }
    c.seed = j.value("seed", c.seed);
  } catch (const json::exception& e) {
    fail(std::string("schema error: ") + e.what());
  } catch (const ModelError& e) {
    fail(e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

std::string dump_config(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["scenario"] = to_string(c.scenario);
  j["array"] = array_json(c.array);
  if (c.baseline_array) j["baseline_array"] = array_json(*c.baseline_array);
  j["scene"] = json{{"angles_deg", c.angles_deg}, {"dopplers", c.dopplers}};
  if (const auto* u = std::get_if<UniformErrors>(&c.errors)) {
    j["errors"] = json{{"mode", "uniform"},
                       {"gain_range", {u->gain_lo, u->gain_hi}},
                       {"phase_range_rad", {u->phase_lo, u->phase_hi}}};
  } else {
    const auto& e = std::get<ExplicitErrors>(c.errors);
    j["errors"] = json{{"mode", "explicit"}, {"gains", e.gains}, {"phases_rad", e.phases}};
  }
  j["snr_grid_db"] = c.snr_grid_db;
  j["noise_free"] = c.noise_free;
  j["runs"] = c.runs;
  j["snapshots"] = c.snapshots;
  json est = json::array();
  for (auto e : c.estimators) est.push_back(to_string(e));
  j["estimators"] = est;
  j["joint"] = json{{"max_iterations", c.joint.max_iterations},
                    {"tol_deg", rad_to_deg(c.joint.tol)},
                    {"window_deg", rad_to_deg(c.joint.search.window)},
                    {"step_deg", rad_to_deg(c.joint.search.step)},
                    {"fine_step_deg", rad_to_deg(c.joint.search.fine_step)}};
  j["seed"] = c.seed;
  return j.dump(2);
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : dump_config(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace mimocal::harness
