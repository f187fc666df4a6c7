// Copyright 2026 The ionphoton Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

// Experiment configuration (YAML; JSON documents are accepted as well).
// Every frequency in a file is in Hz and converted to rad/s here. Errors name
// the file position and the dotted field path.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "atom_model.hpp"
#include "calibration.hpp"
#include "constants.hpp"
#include "detection_sim.hpp"
#include "errors.hpp"
#include "spectroscopy.hpp"

namespace ionphoton {

struct ScanGrid {
  double start_hz = -60e6;
  double stop_hz = 30e6;
  int points = 61;

  std::vector<double> detunings_hz() const {
    if (points <= 0) throw ConfigError("scan grid is empty (points must be >= 1)");
    std::vector<double> g(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i)
      g[static_cast<std::size_t>(i)] = points == 1 ? start_hz : start_hz + (stop_hz - start_hz) * i / (points - 1);
    return g;
  }
};

struct SequenceConfig {
  double window_s = 2e-6;
  double step_s = 1e-9;
  double rise_time_s = 90e-9;
  double switch_delay_s = 90e-9;
  double dark_time_s = 500e-9;
  Envelope::Shape shape = Envelope::Shape::kErfRamp;
  bool repump_enabled = true;
};

struct FitConfig {
  FitOptions options;
  std::optional<FitVector> initial;  // NaN entries default to the physics configuration
};

enum class ArrivalModel { kExponential, kWavepacket, kCsv };

struct SourceConfig {
  SourceModel model;
  ArrivalModel arrival = ArrivalModel::kExponential;
  double tau_s = 8e-9, delay_s = 0.0;
  std::string csv_path;
};

struct AnalysisConfig {
  double window_s = 200e-9;
  std::optional<double> period_s;
  double tau_min_s = -50e-6;
  double tau_max_s = 50e-6;
  double bin_s = 100e-9;
  bool gate = true;
  double dark_rate_a = 10.0, dark_rate_b = 10.0, dark_sigma = 2.0;
};

struct WitnessConfig {
  int curve_points = 200;
  double v_min = kThresholdBranchStart;
};

struct ExperimentConfig {
  std::string source_name = "<config>";
  LevelScheme scheme = build_level_scheme();
  FieldEnvironment env;
  std::optional<LaserField> cooling, repump;
  DetectionGeometry geometry = DetectionGeometry::full_collection();
  ScanGrid scan;
  SequenceConfig sequence;
  FitConfig fit;
  DetectorModel det_a{1.0, 0.0, "A"}, det_b{1.0, 0.0, "B"};
  SourceConfig source;
  RunConfig run;
  AnalysisConfig analysis;
  WitnessConfig witness;
  std::set<std::string> sections;  // top-level sections present in the file

  bool has(const std::string& s) const { return sections.count(s) > 0; }
  void require(const std::string& s, const std::string& command) const {
    if (!has(s)) throw ConfigError(source_name + ": section '" + s + "' is required by '" + command + "'");
  }

  /// Physical parameter vector of the fit model from the lasers and field.
  FitVector physics_vector() const;
};

namespace detail {

class ConfigReader {
 public:
  explicit ConfigReader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& path, const std::string& what) const {
    std::ostringstream os;
    os << source_;
    if (node && node.Mark().line >= 0) os << ':' << node.Mark().line + 1 << ':' << node.Mark().column + 1;
    os << ": field '" << path << "': " << what;
    throw ConfigError(os.str());
  }

  void allow(const YAML::Node& node, const std::string& path, std::initializer_list<const char*> keys) const {
    if (!node.IsMap()) fail(node, path, "expected a mapping");
    for (const auto& kv : node) {
      const std::string key = kv.first.as<std::string>();
      bool ok = false;
      for (const char* k : keys) ok = ok || key == k;
      if (!ok) fail(kv.first, path.empty() ? key : path + "." + key, "unknown field");
    }
  }

  double number(const YAML::Node& parent, const std::string& path, const char* key, std::optional<double> fallback,
                double lo = -INFINITY, double hi = INFINITY) const {
    const YAML::Node n = parent[key];
    const std::string p = join(path, key);
    if (!n) {
      if (!fallback) fail(parent, p, "missing required field");
      return *fallback;
    }
    double v = 0.0;
    try {
      if (!n.IsScalar()) fail(n, p, "expected a number");
      v = n.as<double>();
    } catch (const YAML::Exception&) {
      fail(n, p, "expected a number, got '" + n.Scalar() + "'");
    }
    if (!std::isfinite(v)) fail(n, p, "value must be finite");
    if (v < lo || v > hi) {
      std::ostringstream os;
      os << "value " << v << " outside [" << lo << ", " << hi << "]";
      fail(n, p, os.str());
    }
    return v;
  }

  std::uint64_t integer(const YAML::Node& parent, const std::string& path, const char* key,
                        std::optional<std::uint64_t> fallback) const {
    const YAML::Node n = parent[key];
    const std::string p = join(path, key);
    if (!n) {
      if (!fallback) fail(parent, p, "missing required field");
      return *fallback;
    }
    const std::string s = n.IsScalar() ? n.Scalar() : "";
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
      fail(n, p, "expected a non-negative integer, got '" + s + "'");
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
      fail(n, p, "integer out of range");
    }
  }

  bool boolean(const YAML::Node& parent, const std::string& path, const char* key, bool fallback) const {
    const YAML::Node n = parent[key];
    if (!n) return fallback;
    try {
      return n.as<bool>();
    } catch (const YAML::Exception&) {
      fail(n, join(path, key), "expected true or false");
    }
  }

  std::string text(const YAML::Node& parent, const std::string& path, const char* key,
                   std::optional<std::string> fallback) const {
    const YAML::Node n = parent[key];
    if (!n) {
      if (!fallback) fail(parent, join(path, key), "missing required field");
      return *fallback;
    }
    if (!n.IsScalar()) fail(n, join(path, key), "expected a string");
    return n.Scalar();
  }

  Vec3 unit_vector(const YAML::Node& n, const std::string& path) const {
    if (!n.IsSequence() || n.size() != 3) fail(n, path, "expected a list of 3 numbers");
    Vec3 v;
    for (int i = 0; i < 3; ++i) {
      try {
        v[i] = n[i].as<double>();
      } catch (const YAML::Exception&) {
        fail(n[i], path, "expected a number");
      }
    }
    if (std::abs(v.norm() - 1.0) > 1e-9) fail(n, path, "vector must have unit norm");
    return v.normalized();
  }

  /// Complex 3-vector: either [x, y, z] (real) or [[re, im], [re, im], [re, im]].
  Vec3c complex_vector(const YAML::Node& n, const std::string& path) const {
    if (!n.IsSequence() || n.size() != 3) fail(n, path, "expected a list of 3 entries");
    Vec3c v;
    for (int i = 0; i < 3; ++i) {
      try {
        if (n[i].IsSequence()) {
          if (n[i].size() != 2) fail(n[i], path, "complex entries are [re, im]");
          v[i] = Complex(n[i][0].as<double>(), n[i][1].as<double>());
        } else {
          v[i] = Complex(n[i].as<double>(), 0.0);
        }
      } catch (const YAML::Exception&) {
        fail(n[i], path, "expected a number or [re, im]");
      }
    }
    return v;
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

 private:
  std::string source_;
};

inline SphericalVector read_polarization(const ConfigReader& r, const YAML::Node& n, const std::string& path) {
  if (!n) return transverse_polarization(constants::kPi / 2, 0.0);
  r.allow(n, path, {"theta_rad", "chi_rad", "spherical"});
  if (n["spherical"]) {
    if (n["theta_rad"] || n["chi_rad"]) r.fail(n, path, "give either spherical or theta_rad/chi_rad");
    const Vec3c v = r.complex_vector(n["spherical"], path + ".spherical");
    const SphericalVector s{v[0], v[1], v[2]};
    if (std::abs(norm(s) - 1.0) > 1e-12) r.fail(n["spherical"], path + ".spherical", "polarization must have unit norm");
    return s;
  }
  return transverse_polarization(r.number(n, path, "theta_rad", constants::kPi / 2),
                                 r.number(n, path, "chi_rad", 0.0));
}

inline LaserField read_laser(const ConfigReader& r, const YAML::Node& n, const std::string& path, bool cooling) {
  r.allow(n, path, {"rabi_hz", "detuning_hz", "polarization"});
  const double rabi = constants::kTwoPi * r.number(n, path, "rabi_hz", std::nullopt, 0.0);
  const double det = constants::kTwoPi * r.number(n, path, "detuning_hz", std::nullopt);
  const SphericalVector pol = read_polarization(r, n["polarization"], path + ".polarization");
  return cooling ? LaserField::cooling(rabi, det, pol) : LaserField::repump(rabi, det, pol);
}

}  // namespace detail

inline ExperimentConfig parse_config(const std::string& text, const std::string& source_name = "<config>") {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source_name + ":" + std::to_string(e.mark.line + 1) + ":" + std::to_string(e.mark.column + 1) +
                      ": syntax error: " + e.msg);
  }
  ExperimentConfig cfg;
  cfg.source_name = source_name;
  const detail::ConfigReader r(source_name);
  if (!root || root.IsNull()) return cfg;
  r.allow(root, "", {"constants", "field", "lasers", "geometry", "scan", "sequence", "fit", "detectors", "source",
                     "run", "analysis", "witness"});
  for (const auto& kv : root) cfg.sections.insert(kv.first.as<std::string>());

  if (const auto c = root["constants"]) {
    r.allow(c, "constants", {"lande_g", "decay_rate_hz", "wavelength_m"});
    AtomicConstants k;
    if (const auto g = c["lande_g"]) {
      r.allow(g, "constants.lande_g", {"S12", "P12", "D32"});
      if (g["S12"]) k.lande_s = r.number(g, "constants.lande_g", "S12", std::nullopt);
      if (g["P12"]) k.lande_p = r.number(g, "constants.lande_g", "P12", std::nullopt);
      if (g["D32"]) k.lande_d = r.number(g, "constants.lande_g", "D32", std::nullopt);
    }
    if (const auto d = c["decay_rate_hz"]) {
      r.allow(d, "constants.decay_rate_hz", {"P12_S12", "P12_D32"});
      if (d["P12_S12"]) k.gamma_p_to_s = constants::kTwoPi * r.number(d, "constants.decay_rate_hz", "P12_S12", std::nullopt);
      if (d["P12_D32"]) k.gamma_p_to_d = constants::kTwoPi * r.number(d, "constants.decay_rate_hz", "P12_D32", std::nullopt);
    }
    if (const auto w = c["wavelength_m"]) {
      r.allow(w, "constants.wavelength_m", {"P12_S12", "P12_D32"});
      if (w["P12_S12"]) k.wavelength_p_to_s = r.number(w, "constants.wavelength_m", "P12_S12", std::nullopt);
      if (w["P12_D32"]) k.wavelength_p_to_d = r.number(w, "constants.wavelength_m", "P12_D32", std::nullopt);
    }
    try {
      cfg.scheme = build_level_scheme(k);
    } catch (const ConfigError& e) {
      r.fail(c, "constants", e.what());
    }
  }

  if (const auto f = root["field"]) {
    r.allow(f, "field", {"b_tesla", "direction"});
    cfg.env.b_tesla = r.number(f, "field", "b_tesla", std::nullopt, 0.0);
    cfg.env.direction = f["direction"] ? r.unit_vector(f["direction"], "field.direction") : Vec3::UnitZ();
  }

  if (const auto l = root["lasers"]) {
    r.allow(l, "lasers", {"cooling", "repump"});
    if (l["cooling"]) cfg.cooling = detail::read_laser(r, l["cooling"], "lasers.cooling", true);
    if (l["repump"]) cfg.repump = detail::read_laser(r, l["repump"], "lasers.repump", false);
  }

  if (const auto g = root["geometry"]) {
    r.allow(g, "geometry", {"all_modes", "efficiency", "direction", "analyzer"});
    DetectionGeometry geo;
    geo.all_modes = r.boolean(g, "geometry", "all_modes", false);
    geo.efficiency = r.number(g, "geometry", "efficiency", 1.0, 0.0, 1.0);
    if (!geo.all_modes) {
      if (!g["direction"]) r.fail(g, "geometry.direction", "missing required field (or set all_modes: true)");
      if (!g["analyzer"]) r.fail(g, "geometry.analyzer", "missing required field (or set all_modes: true)");
      geo.direction = r.unit_vector(g["direction"], "geometry.direction");
      geo.analyzer = r.complex_vector(g["analyzer"], "geometry.analyzer");
      try {
        geo.validate();
      } catch (const ConfigError& e) {
        r.fail(g, "geometry", e.what());
      }
    }
    cfg.geometry = geo;
  }

  if (const auto s = root["scan"]) {
    r.allow(s, "scan", {"start_hz", "stop_hz", "points"});
    cfg.scan.start_hz = r.number(s, "scan", "start_hz", cfg.scan.start_hz);
    cfg.scan.stop_hz = r.number(s, "scan", "stop_hz", cfg.scan.stop_hz);
    cfg.scan.points = static_cast<int>(r.integer(s, "scan", "points", static_cast<std::uint64_t>(cfg.scan.points)));
  }

  if (const auto s = root["sequence"]) {
    r.allow(s, "sequence", {"window_s", "step_s", "rise_time_s", "switch_delay_s", "dark_time_s", "shape",
                            "repump_enabled"});
    auto& q = cfg.sequence;
    q.window_s = r.number(s, "sequence", "window_s", q.window_s, 1e-12);
    q.step_s = r.number(s, "sequence", "step_s", q.step_s, 1e-15, q.window_s);
    q.rise_time_s = r.number(s, "sequence", "rise_time_s", q.rise_time_s, 1e-15);
    q.switch_delay_s = r.number(s, "sequence", "switch_delay_s", q.switch_delay_s, 0.0);
    q.dark_time_s = r.number(s, "sequence", "dark_time_s", q.dark_time_s, 0.0);
    const std::string shape = r.text(s, "sequence", "shape", std::string("erf"));
    if (shape == "erf") q.shape = Envelope::Shape::kErfRamp;
    else if (shape == "linear") q.shape = Envelope::Shape::kLinearRamp;
    else r.fail(s["shape"], "sequence.shape", "expected 'erf' or 'linear'");
    q.repump_enabled = r.boolean(s, "sequence", "repump_enabled", true);
  }

  if (const auto f = root["fit"]) {
    r.allow(f, "fit", {"free", "initial", "lower", "upper", "max_iterations"});
    auto& o = cfg.fit.options;
    auto index_of = [&](const YAML::Node& n, const std::string& path) -> std::size_t {
      const std::string name = n.IsScalar() ? n.Scalar() : "";
      for (std::size_t k = 0; k < kNumFitParams; ++k)
        if (name == fit_param_name(k)) return k;
      r.fail(n, path, "unknown fit parameter '" + name + "'");
    };
    if (const auto fr = f["free"]) {
      if (!fr.IsSequence()) r.fail(fr, "fit.free", "expected a list of parameter names");
      o.free.fill(false);
      for (const auto& n : fr) o.free[index_of(n, "fit.free")] = true;
    }
    // Angular-frequency parameters are given in Hz like every other frequency.
    auto unit = [](std::size_t k) { return k <= kDetuningCooling ? constants::kTwoPi : 1.0; };
    auto read_vector = [&](const char* key, FitVector base) {
      const auto n = f[key];
      const std::string path = std::string("fit.") + key;
      if (!n.IsMap()) r.fail(n, path, "expected a mapping of parameter name to value");
      for (const auto& kv : n) {
        const std::size_t k = index_of(kv.first, path);
        base[k] = unit(k) * r.number(n, path, fit_param_name(k), std::nullopt);
      }
      return base;
    };
    if (f["lower"]) o.lower = read_vector("lower", o.lower);
    if (f["upper"]) o.upper = read_vector("upper", o.upper);
    if (f["initial"]) {
      FitVector unset;
      unset.fill(std::nan(""));  // entries not given fall back to the physics configuration
      cfg.fit.initial = read_vector("initial", unset);
    }
    o.max_iterations = static_cast<int>(r.integer(f, "fit", "max_iterations", 200));
  }

  if (const auto d = root["detectors"]) {
    r.allow(d, "detectors", {"A", "B"});
    auto read_det = [&](const char* key, DetectorModel& det) {
      const auto n = d[key];
      if (!n) return;
      const std::string path = std::string("detectors.") + key;
      r.allow(n, path, {"quantum_efficiency", "dark_rate_cps"});
      det.label = key;
      det.quantum_efficiency = r.number(n, path, "quantum_efficiency", std::nullopt, 0.0, 1.0);
      det.dark_rate = r.number(n, path, "dark_rate_cps", 0.0, 0.0);
    };
    read_det("A", cfg.det_a);
    read_det("B", cfg.det_b);
  }

  if (const auto s = root["source"]) {
    r.allow(s, "source", {"p_emit", "p_multi", "eta_mode", "eta_1", "eta_2", "arrival"});
    auto& m = cfg.source.model;
    m.p_emit = r.number(s, "source", "p_emit", 1.0, 0.0, 1.0);
    m.p_multi = r.number(s, "source", "p_multi", 0.0, 0.0, 1.0);
    m.eta_mode = r.number(s, "source", "eta_mode", 1.0, 0.0, 1.0);
    m.eta_1 = r.number(s, "source", "eta_1", 0.5, 0.0, 1.0);
    m.eta_2 = r.number(s, "source", "eta_2", 0.5, 0.0, 1.0);
    if (const auto a = s["arrival"]) {
      r.allow(a, "source.arrival", {"model", "tau_s", "delay_s", "path"});
      const std::string model = r.text(a, "source.arrival", "model", std::nullopt);
      if (model == "exponential") {
        cfg.source.arrival = ArrivalModel::kExponential;
        cfg.source.tau_s = r.number(a, "source.arrival", "tau_s", cfg.source.tau_s, 1e-15);
        cfg.source.delay_s = r.number(a, "source.arrival", "delay_s", 0.0, 0.0);
      } else if (model == "wavepacket") {
        cfg.source.arrival = ArrivalModel::kWavepacket;
      } else if (model == "csv") {
        cfg.source.arrival = ArrivalModel::kCsv;
        cfg.source.csv_path = r.text(a, "source.arrival", "path", std::nullopt);
      } else {
        r.fail(a["model"], "source.arrival.model", "expected 'exponential', 'wavepacket' or 'csv'");
      }
    }
    m.arrival = ArrivalDistribution::exponential(cfg.source.tau_s, cfg.source.delay_s);
  }

  if (const auto s = root["run"]) {
    r.allow(s, "run", {"configuration", "period_s", "window_s", "n_triggers", "seed"});
    const std::string c = r.text(s, "run", "configuration", std::string("reflected"));
    if (c == "reflected") cfg.run.configuration = Configuration::kReflected;
    else if (c == "symmetric") cfg.run.configuration = Configuration::kSymmetric;
    else r.fail(s["configuration"], "run.configuration", "expected 'reflected' or 'symmetric'");
    cfg.run.period = r.number(s, "run", "period_s", cfg.run.period, 1e-12);
    cfg.run.window = r.number(s, "run", "window_s", cfg.run.window, 1e-12, cfg.run.period);
    cfg.run.n_triggers = r.integer(s, "run", "n_triggers", std::uint64_t{0});
    cfg.run.seed = r.integer(s, "run", "seed", std::uint64_t{0});
  }

  if (const auto s = root["analysis"]) {
    r.allow(s, "analysis", {"window_s", "period_s", "tau_min_s", "tau_max_s", "bin_s", "gate", "dark_rate_cps",
                            "dark_sigma_cps"});
    auto& a = cfg.analysis;
    a.window_s = r.number(s, "analysis", "window_s", a.window_s, 1e-12);
    if (s["period_s"]) a.period_s = r.number(s, "analysis", "period_s", std::nullopt, 1e-12);
    a.tau_min_s = r.number(s, "analysis", "tau_min_s", a.tau_min_s);
    a.tau_max_s = r.number(s, "analysis", "tau_max_s", a.tau_max_s);
    if (!(a.tau_max_s > a.tau_min_s)) r.fail(s, "analysis.tau_max_s", "must exceed tau_min_s");
    a.bin_s = r.number(s, "analysis", "bin_s", a.bin_s, 1e-12);
    a.gate = r.boolean(s, "analysis", "gate", true);
    if (const auto d = s["dark_rate_cps"]) {
      if (!d.IsSequence() || d.size() != 2) r.fail(d, "analysis.dark_rate_cps", "expected [rate_A, rate_B]");
      try {
        a.dark_rate_a = d[0].as<double>();
        a.dark_rate_b = d[1].as<double>();
      } catch (const YAML::Exception&) {
        r.fail(d, "analysis.dark_rate_cps", "expected numbers");
      }
      if (!(a.dark_rate_a >= 0.0 && a.dark_rate_b >= 0.0)) r.fail(d, "analysis.dark_rate_cps", "rates must be >= 0");
    }
    a.dark_sigma = r.number(s, "analysis", "dark_sigma_cps", a.dark_sigma, 0.0);
  }

  if (const auto s = root["witness"]) {
    r.allow(s, "witness", {"curve_points", "v_min"});
    cfg.witness.curve_points = static_cast<int>(r.integer(s, "witness", "curve_points", 200));
    cfg.witness.v_min = r.number(s, "witness", "v_min", cfg.witness.v_min, 1e-6, 1.0);
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

inline FitVector ExperimentConfig::physics_vector() const {
  FitVector p{};
  if (!cooling || !repump) throw ConfigError(source_name + ": both lasers.cooling and lasers.repump are required");
  p[kRabiCooling] = cooling->rabi;
  p[kRabiRepump] = repump->rabi;
  p[kDetuningCooling] = cooling->detuning;
  // Recover the angles from the common polarization (that of the cooling
  // beam) through the Stokes parameters of its Jones vector (along B, across B).
  const auto& e = cooling->polarization;
  const Complex along = e[1];
  const Complex across = Complex(0.0, -std::sqrt(2.0)) * e[2];
  const Complex cross = std::conj(along) * across;
  p[kPolTheta] = 0.5 * std::atan2(2.0 * cross.real(), std::norm(along) - std::norm(across));
  p[kPolChi] = 0.5 * std::asin(std::clamp(2.0 * cross.imag(), -1.0, 1.0));
  p[kFieldTesla] = env.b_tesla;
  p[kScale] = 1.0;
  p[kBackground] = 0.0;
  return p;
}

// ---------------------------------------------------------------------------
// Scan data CSV: detuning_hz, rate_cps[, sigma_cps]; header optional.

inline ScanData read_scan_csv(std::istream& in, const std::string& name = "<scan>") {
  ScanData d;
  std::string line;
  std::size_t line_no = 0;
  int columns = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (d.size() == 0 && columns < 0 && !f.empty() && f[0].find_first_of("0123456789") != 0 && f[0][0] != '-' &&
        f[0][0] != '+' && f[0][0] != '.') {
      columns = static_cast<int>(f.size());  // header
      continue;
    }
    if (f.size() < 2 || f.size() > 3)
      throw FormatError(name + ":" + std::to_string(line_no) + ": expected 2 or 3 columns");
    double v[3] = {0, 0, 0};
    for (std::size_t i = 0; i < f.size(); ++i) {
      std::size_t used = 0;
      try {
        v[i] = std::stod(f[i], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != f[i].size() || !std::isfinite(v[i]))
        throw FormatError(name + ":" + std::to_string(line_no) + ": invalid number '" + f[i] + "'");
    }
    if (!d.sigma.empty() && f.size() == 2) throw FormatError(name + ":" + std::to_string(line_no) + ": missing sigma");
    if (d.size() > 0 && d.sigma.empty() && f.size() == 3)
      throw FormatError(name + ":" + std::to_string(line_no) + ": unexpected sigma column");
    d.detuning_hz.push_back(v[0]);
    d.rate.push_back(v[1]);
    if (f.size() == 3) d.sigma.push_back(v[2]);
  }
  if (d.size() == 0) throw FormatError(name + ": no data rows");
  if (d.sigma.empty()) d.fill_poisson_sigma();
  return d;
}

inline ScanData read_scan_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scan data " + path);
  return read_scan_csv(in, path);
}

/// Wavepacket CSV: time_s, density_per_s (as written by the wavepacket command).
inline WavepacketDensity read_wavepacket_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open wavepacket file " + path);
  WavepacketDensity w;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line.rfind("time_s", 0) == 0) continue;
    const auto c = line.find(',');
    try {
      if (c == std::string::npos) throw std::invalid_argument("columns");
      w.times.push_back(std::stod(line.substr(0, c)));
      w.density.push_back(std::stod(line.substr(c + 1)));
    } catch (const std::exception&) {
      throw FormatError(path + ":" + std::to_string(line_no) + ": expected time_s,density_per_s");
    }
  }
  if (w.times.size() < 2) throw FormatError(path + ": wavepacket needs at least two rows");
  w.probability = trapezoid(w.density, w.step());
  return w;
}

}  // namespace ionphoton
