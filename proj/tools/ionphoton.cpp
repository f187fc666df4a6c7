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


// Command-line front end: scan, wavepacket, fit, simulate, analyze, witness.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <ionphoton/config.hpp>
#include <ionphoton/ionphoton.hpp>

namespace fs = std::filesystem;
using namespace ionphoton;

namespace {

enum ExitCode { kOk = 0, kInternal = 1, kConfigExit = 2, kNumericExit = 3, kFormatExit = 4 };

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  unsigned workers = 1;
};

void add_common(CLI::App* sub, Common& c, bool config_required) {
  auto* opt = sub->add_option("--config", c.config, "Experiment configuration (YAML or JSON)");
  if (config_required) opt->required();
  sub->add_option("--seed", c.seed, "Master seed (overrides run.seed)");
  sub->add_option("--out", c.out, "Output directory")->capture_default_str();
  sub->add_option("--workers", c.workers, "Worker threads; results do not depend on it")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

ExperimentConfig config_or_empty(const Common& c) {
  return c.config.empty() ? parse_config("", "<defaults>") : load_config(c.config);
}

std::ofstream open_output(const Common& c, const std::string& name, bool binary = false) {
  std::error_code ec;
  fs::create_directories(c.out, ec);
  const fs::path p = fs::path(c.out) / name;
  std::ofstream f(p, binary ? std::ios::binary | std::ios::out | std::ios::trunc : std::ios::out | std::ios::trunc);
  if (!f) throw ConfigError("cannot write " + p.string());
  return f;
}

void write_report(const Common& c, const std::string& name, const Report& r) {
  auto f = open_output(c, name);
  r.write(f);
  r.write(std::cout);
}

void require_lasers(const ExperimentConfig& cfg, const std::string& cmd) {
  cfg.require("lasers", cmd);
  if (!cfg.cooling) throw ConfigError(cfg.source_name + ": lasers.cooling is required by '" + cmd + "'");
  if (!cfg.repump) throw ConfigError(cfg.source_name + ": lasers.repump is required by '" + cmd + "'");
}

// --------------------------------------------------------------------------

struct ScanArgs {
  std::optional<double> start_hz, stop_hz;
  std::optional<int> points;
};

int cmd_scan(const Common& c, const ScanArgs& a) {
  ExperimentConfig cfg = load_config(c.config);
  require_lasers(cfg, "scan");
  if (a.start_hz) cfg.scan.start_hz = *a.start_hz;
  if (a.stop_hz) cfg.scan.stop_hz = *a.stop_hz;
  if (a.points) cfg.scan.points = *a.points;
  const std::vector<double> grid_hz = cfg.scan.detunings_hz();
  std::vector<double> grid(grid_hz.size());
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = constants::kTwoPi * grid_hz[i];
  const auto points = dark_resonance_scan(cfg.scheme, *cfg.cooling, *cfg.repump, cfg.env, grid, cfg.geometry, c.workers);

  auto csv = open_output(c, "scan.csv");
  csv << "detuning_hz,rate_cps\n";
  std::size_t issues = 0, unusable = 0;
  double min_rate = INFINITY, min_at = NAN, max_rate = -INFINITY;
  for (std::size_t i = 0; i < points.size(); ++i) {
    csv << fmt12(grid_hz[i]) << ',' << fmt12(points[i].rate) << '\n';
    if (points[i].issue) ++issues;
    if (!usable(points[i])) {
      ++unusable;
      continue;
    }
    if (points[i].rate < min_rate) min_rate = points[i].rate, min_at = grid_hz[i];
    max_rate = std::max(max_rate, points[i].rate);
  }
  Report r;
  r.add("command", "scan").add("points", static_cast<std::uint64_t>(points.size()));
  r.add("flagged_points", static_cast<std::uint64_t>(issues)).add("failed_points", static_cast<std::uint64_t>(unusable));
  r.add("min_rate_cps", min_rate).add("min_rate_detuning_hz", min_at).add("max_rate_cps", max_rate);
  for (std::size_t i = 0; i < points.size(); ++i)
    if (points[i].issue) r.add("issue_at_" + fmt12(grid_hz[i]) + "_hz", *points[i].issue);
  write_report(c, "scan_summary.yaml", r);
  return unusable > 0 ? kNumericExit : kOk;
}

// --------------------------------------------------------------------------

WavepacketDensity compute_wavepacket(const ExperimentConfig& cfg) {
  const auto& q = cfg.sequence;
  LaserField repump = *cfg.repump;
  if (!q.repump_enabled) repump.rabi = 0.0;
  const PulseSequence seq =
      trigger_sequence(*cfg.cooling, repump, q.window_s, q.rise_time_s, q.switch_delay_s, q.dark_time_s, q.shape);
  return photon_wavepacket(cfg.scheme, seq, cfg.geometry, cfg.env, {q.window_s, q.step_s});
}

int cmd_wavepacket(const Common& c) {
  const ExperimentConfig cfg = load_config(c.config);
  require_lasers(cfg, "wavepacket");
  const WavepacketDensity wp = compute_wavepacket(cfg);
  auto csv = open_output(c, "wavepacket.csv");
  csv << "time_s,density_per_s\n";
  for (std::size_t i = 0; i < wp.times.size(); ++i) csv << fmt12(wp.times[i]) << ',' << fmt12(wp.density[i]) << '\n';
  const BeatResult beat = beat_frequency(wp);
  Report r;
  r.add("command", "wavepacket").add("window_s", cfg.sequence.window_s).add("step_s", cfg.sequence.step_s);
  r.add("emission_probability", wp.probability);
  r.add("mean_arrival_time_s", wp.probability > 0 ? std::optional<double>(wp.mean_arrival_time()) : std::nullopt);
  r.add("beat_detected", beat.detected);
  r.add("beat_frequency_hz", beat.detected ? std::optional<double>(beat.frequency_hz) : std::nullopt);
  r.add("beat_resolution_hz", beat.resolution_hz);
  r.add("beat_relative_amplitude", beat.amplitude);
  r.add("d32_splitting_dm1_hz", d_manifold_splitting_hz(cfg.scheme, cfg.env, 1));
  r.add("d32_splitting_dm2_hz", d_manifold_splitting_hz(cfg.scheme, cfg.env, 2));
  write_report(c, "wavepacket_summary.yaml", r);
  return kOk;
}

// --------------------------------------------------------------------------

struct FitArgs {
  std::string data;
  std::optional<std::string> free;
};

int cmd_fit(const Common& c, const FitArgs& a) {
  const ExperimentConfig cfg = load_config(c.config);
  require_lasers(cfg, "fit");
  FitOptions options = cfg.fit.options;
  if (a.free) {
    options.free.fill(false);
    std::stringstream ss(*a.free);
    for (std::string name; std::getline(ss, name, ',');) {
      if (name.empty() || name == "none") continue;
      bool found = false;
      for (std::size_t k = 0; k < kNumFitParams; ++k)
        if (name == fit_param_name(k)) options.free[k] = found = true;
      if (!found) throw ConfigError("--free: unknown fit parameter '" + name + "'");
    }
  }
  ScanData data = read_scan_csv(a.data);
  FitVector guess = cfg.physics_vector();
  if (cfg.fit.initial)
    for (std::size_t k = 0; k < kNumFitParams; ++k)
      if (!std::isnan((*cfg.fit.initial)[k])) guess[k] = (*cfg.fit.initial)[k];
  ScanModel model;
  model.scheme = cfg.scheme;
  model.field_direction = cfg.env.direction;
  model.geometry = cfg.geometry;
  model.workers = c.workers;
  const FitResult res = fit_dark_resonance(data, model, guess, options);

  auto in_file_units = [](std::size_t k, double v) { return k <= kDetuningCooling ? v / constants::kTwoPi : v; };
  auto unit_suffix = [](std::size_t k) -> std::string {
    switch (k) {
      case kRabiCooling: case kRabiRepump: case kDetuningCooling: return "_hz";
      case kPolTheta: case kPolChi: return "_rad";
      case kFieldTesla: return "_tesla";
      case kBackground: return "_cps";
      default: return "";
    }
  };
  Report r;
  r.add("command", "fit").add("points", static_cast<std::uint64_t>(res.n_points));
  r.add("free_parameters", static_cast<std::uint64_t>(res.n_free));
  r.add("converged", res.converged).add("iterations", res.iterations).add("singular_jacobian", res.singular_jacobian);
  r.add("message", res.message);
  r.add("chi_square", res.chi_square).add("reduced_chi_square", res.reduced_chi_square);
  for (std::size_t k = 0; k < kNumFitParams; ++k) {
    const std::string name = std::string(fit_param_name(k)) + unit_suffix(k);
    r.add(name, in_file_units(k, res.params[k]));
    r.add(name + "_sigma", options.free[k] ? std::optional<double>(in_file_units(k, res.uncertainty[k])) : std::nullopt);
    r.add(name + "_free", static_cast<bool>(options.free[k]));
  }
  write_report(c, "fit_report.yaml", r);

  auto csv = open_output(c, "fit_curve.csv");
  const auto curve = model_curve(model, res.params, data.detuning_hz);
  csv << "detuning_hz,rate_cps,sigma_cps,model_cps\n";
  for (std::size_t i = 0; i < data.size(); ++i)
    csv << fmt12(data.detuning_hz[i]) << ',' << fmt12(data.rate[i]) << ',' << fmt12(data.sigma[i]) << ','
        << fmt12(curve[i]) << '\n';
  return kOk;
}

// --------------------------------------------------------------------------

struct SimulateArgs {
  std::optional<std::uint64_t> triggers;
  bool csv = false;
};

int cmd_simulate(const Common& c, const SimulateArgs& a) {
  ExperimentConfig cfg = load_config(c.config);
  cfg.require("run", "simulate");
  cfg.require("detectors", "simulate");
  cfg.require("source", "simulate");
  if (c.seed) cfg.run.seed = *c.seed;
  if (a.triggers) cfg.run.n_triggers = *a.triggers;
  cfg.run.validate();
  SourceModel src = cfg.source.model;
  if (cfg.source.arrival == ArrivalModel::kWavepacket) {
    require_lasers(cfg, "simulate (source.arrival.model: wavepacket)");
    src.arrival = ArrivalDistribution::tabulated(compute_wavepacket(cfg));
  } else if (cfg.source.arrival == ArrivalModel::kCsv) {
    src.arrival = ArrivalDistribution::tabulated(read_wavepacket_csv(cfg.source.csv_path));
  }
  const WindowProbs expect = analytic_window_probs(src, cfg.det_a, cfg.det_b, cfg.run);

  auto out = open_output(c, "tags.ttag", true);
  TtagWriter writer(out);
  std::optional<std::ofstream> csv;
  struct CsvSink : TagSink {
    std::ostream* os = nullptr;
    void consume(std::span<const TagRecord> block) override {
      for (const auto& t : block) *os << channel_letter(t.channel) << ',' << t.timestamp_ps << '\n';
    }
  } csv_sink;
  std::vector<TagSink*> sinks{&writer};
  if (a.csv) {
    csv.emplace(open_output(c, "tags.csv"));
    *csv << "channel,timestamp_ps\n";
    csv_sink.os = &*csv;
    sinks.push_back(&csv_sink);
  }
  FanoutSink fan(sinks);
  SimulateOptions so;
  so.workers = c.workers;
  simulate_run(src, cfg.det_a, cfg.det_b, cfg.run, fan, so);

  Report r;
  r.add("command", "simulate").add("format", "TTAG v1");
  r.add("configuration", cfg.run.configuration == Configuration::kReflected ? "reflected" : "symmetric");
  r.add("n_triggers", cfg.run.n_triggers).add("seed", cfg.run.seed);
  r.add("period_ps", cfg.run.period_ps()).add("window_ps", cfg.run.window_ps());
  r.add("records", writer.count());
  r.add("p_emit", src.p_emit).add("p_multi", src.p_multi).add("eta_mode", src.eta_mode);
  r.add("eta_1", src.eta_1).add("eta_2", src.eta_2);
  r.add("qe_a", cfg.det_a.quantum_efficiency).add("qe_b", cfg.det_b.quantum_efficiency);
  r.add("dark_rate_a_cps", cfg.det_a.dark_rate).add("dark_rate_b_cps", cfg.det_b.dark_rate);
  r.add("analytic_ps", expect.clicks().ps).add("analytic_pc", expect.clicks().pc);
  write_report(c, "tags.ttag.yaml", r);
  return kOk;
}

// --------------------------------------------------------------------------

struct AnalyzeArgs {
  std::string input;
  std::optional<double> window_s, period_s;
};

int cmd_analyze(const Common& c, const AnalyzeArgs& a) {
  const ExperimentConfig cfg = config_or_empty(c);
  AnalysisConfig an = cfg.analysis;
  if (a.window_s) an.window_s = *a.window_s;
  if (a.period_s) an.period_s = *a.period_s;
  if (!(an.window_s > 0.0)) throw ConfigError("--window-s must be positive");
  if (an.period_s && !(*an.period_s >= an.window_s)) throw ConfigError("--period-s must be at least the window");
  if (an.period_s) {
    an.tau_min_s = -2.5 * *an.period_s;
    an.tau_max_s = 2.5 * *an.period_s;
  }
  const auto window_ps = RunConfig::quantize_ps(an.window_s);
  if (window_ps == 0) throw ConfigError("window is below the 4 ps tag resolution");
  WindowClassifier classifier(window_ps);
  G2Accumulator g2(an.gate ? std::optional<std::uint64_t>(window_ps) : std::nullopt);
  FanoutSink fan({&classifier, &g2});
  read_tag_file(a.input, fan);

  const auto bin_ps = static_cast<std::int64_t>(std::llround(an.bin_s * 1e12));
  const G2Histogram h = g2.histogram(static_cast<std::int64_t>(std::llround(an.tau_min_s * 1e12)),
                                     static_cast<std::int64_t>(std::llround(an.tau_max_s * 1e12)),
                                     std::max<std::int64_t>(bin_ps, 1));
  auto hist = open_output(c, "g2_histogram.csv");
  hist << "tau_ps,counts\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) hist << fmt12(h.bin_center_ps(i)) << ',' << h.counts[i] << '\n';

  const WindowCounts& wc = classifier.counts();
  Report r;
  r.add("command", "analyze").add("window_s", an.window_s);
  r.add("n_triggers", wc.n_triggers).add("n_a", wc.clicked_a()).add("n_b", wc.clicked_b());
  r.add("n_single", wc.single()).add("n_coincidence", wc.both);
  auto stats_csv = open_output(c, "click_statistics.csv");
  stats_csv << "quantity,estimate,ci95_low,ci95_high\n";
  if (wc.n_triggers == 0) {
    // No trigger windows: every estimate is undefined.
    for (const char* q : {"ps", "pc", "alpha", "g2_0"}) {
      r.add(q, std::optional<double>());
      stats_csv << q << ",nan,nan,nan\n";
    }
  } else {
    const ClickStatistics s = click_statistics(wc, an.window_s);
    r.add("ps", s.ps).add("ps_ci95_low", s.ps_ci.lo).add("ps_ci95_high", s.ps_ci.hi);
    r.add("pc", s.pc).add("pc_ci95_low", s.pc_ci.lo).add("pc_ci95_high", s.pc_ci.hi);
    r.add("alpha", s.alpha).add("alpha_ci95_low", s.alpha ? std::optional(s.alpha_ci.lo) : std::nullopt);
    r.add("alpha_ci95_high", s.alpha ? std::optional(s.alpha_ci.hi) : std::nullopt);
    r.add("g2_0", s.g2_0).add("g2_0_ci95_low", s.g2_0 ? std::optional(s.g2_ci.lo) : std::nullopt);
    r.add("g2_0_ci95_high", s.g2_0 ? std::optional(s.g2_ci.hi) : std::nullopt);
    auto row = [&](const char* q, std::optional<double> v, Interval ci) {
      stats_csv << q << ',' << fmt12(v.value_or(NAN)) << ',' << fmt12(v ? ci.lo : NAN) << ',' << fmt12(v ? ci.hi : NAN)
                << '\n';
    };
    row("ps", s.ps, s.ps_ci);
    row("pc", s.pc, s.pc_ci);
    row("alpha", s.alpha, s.alpha_ci);
    row("g2_0", s.g2_0, s.g2_ci);
    const DarkCorrectedAlpha dc = dark_corrected_alpha(s, an.dark_rate_a, an.dark_rate_b, an.dark_sigma);
    r.add("dark_rate_a_cps", an.dark_rate_a).add("dark_rate_b_cps", an.dark_rate_b);
    r.add("accidental_pc", dc.accidental_pc).add("intrinsic_pc_upper95", dc.pc_upper);
    r.add("intrinsic_alpha_upper95", dc.alpha_upper);
  }
  r.add("g2_pairs", h.total_pairs).add("g2_zero_pulse_pairs", h.zero_pulse_pairs).add("g2_pulsed_0", h.g2_0);
  write_report(c, "analysis_summary.yaml", r);
  return kOk;
}

// --------------------------------------------------------------------------

struct WitnessArgs {
  std::optional<std::string> stats;
  std::optional<std::string> counts;
  std::optional<int> curve_points;
};

int cmd_witness(const Common& c, const WitnessArgs& a) {
  const ExperimentConfig cfg = config_or_empty(c);
  if (a.stats.has_value() == a.counts.has_value())
    throw ConfigError("witness needs exactly one of --stats FILE or --counts N_SINGLE,N_COINC,N_TRIGGERS");
  std::uint64_t ns = 0, nc = 0, nt = 0;
  if (a.stats) {
    YAML::Node s;
    try {
      s = YAML::LoadFile(*a.stats);
      ns = s["n_single"].as<std::uint64_t>();
      nc = s["n_coincidence"].as<std::uint64_t>();
      nt = s["n_triggers"].as<std::uint64_t>();
    } catch (const YAML::BadFile&) {
      throw ConfigError("cannot open statistics file " + *a.stats);
    } catch (const YAML::Exception& e) {
      throw FormatError(*a.stats + ": expected n_single, n_coincidence and n_triggers (" + e.msg + ")");
    }
  } else {
    std::stringstream ss(*a.counts);
    std::vector<std::uint64_t> v;
    for (std::string f; std::getline(ss, f, ',');) {
      if (f.empty() || f.find_first_not_of("0123456789") != std::string::npos)
        throw ConfigError("--counts expects three non-negative integers");
      v.push_back(std::stoull(f));
    }
    if (v.size() != 3) throw ConfigError("--counts expects N_SINGLE,N_COINC,N_TRIGGERS");
    ns = v[0], nc = v[1], nt = v[2];
  }
  if (nt == 0) throw ConfigError("witness: zero triggers");
  const QngVerdict v = evaluate_witness(ns, nc, nt);

  Report r;
  r.add("command", "witness").add("n_triggers", nt).add("n_single", ns).add("n_coincidence", nc);
  r.add("ps", v.measured.ps).add("ps_sigma", v.sigma_ps).add("ps_ci95_low", v.ps_ci.lo).add("ps_ci95_high", v.ps_ci.hi);
  r.add("pc", v.measured.pc).add("pc_sigma", v.sigma_pc).add("pc_ci95_low", v.pc_ci.lo).add("pc_ci95_high", v.pc_ci.hi);
  r.add("pc_one_sided_upper95", v.pc_upper).add("pc_sigma_from_upper_limit", v.pc_one_sided);
  r.add("qng_threshold_pc", v.threshold_pc).add("qng_violation", v.violation).add("qng_distance_sd", v.distance_sd);
  r.add("classical_bound_ps", v.classical_ps).add("nonclassical", v.nonclassical);
  r.add("classical_distance_sd", v.classical_distance_sd);
  r.add("verdict", v.violation ? "quantum non-Gaussian" : (v.nonclassical ? "nonclassical" : "classical-compatible"));
  write_report(c, "verdict.yaml", r);

  const int n = a.curve_points.value_or(cfg.witness.curve_points);
  if (n < 2) throw ConfigError("curve points must be at least 2");
  auto csv = open_output(c, "threshold_curve.csv");
  csv << "v,ps,pc_qng,pc_classical\n";
  for (int i = 0; i < n; ++i) {
    const double V = cfg.witness.v_min + (1.0 - cfg.witness.v_min) * i / (n - 1);
    const ClickProbs p = qng_threshold_point(V);
    const double pc_cl = p.ps <= 0.5 ? classical_bound_pc(p.ps) : NAN;
    csv << fmt12(V) << ',' << fmt12(p.ps) << ',' << fmt12(p.pc) << ',' << fmt12(pc_cl) << '\n';
  }
  return kOk;
}

int exit_code_for(const Error& e) {
  switch (e.category()) {
    case Error::Category::kConfig: return kConfigExit;
    case Error::Category::kNumeric: return kNumericExit;
    case Error::Category::kFormat: return kFormatExit;
  }
  return kInternal;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trapped-ion single-photon source simulation and analysis"};
  app.require_subcommand(1);

  Common common;
  ScanArgs scan_args;
  auto* scan = app.add_subcommand("scan", "Steady-state dark-resonance scan over the repump detuning");
  add_common(scan, common, true);
  scan->add_option("--start-hz", scan_args.start_hz, "First repump detuning");
  scan->add_option("--stop-hz", scan_args.stop_hz, "Last repump detuning");
  scan->add_option("--points", scan_args.points, "Number of grid points");

  auto* wavepacket = app.add_subcommand("wavepacket", "Single-photon arrival-time density and quantum beats");
  add_common(wavepacket, common, true);

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "Fit model parameters to a measured dark-resonance scan");
  add_common(fit, common, true);
  fit->add_option("--data", fit_args.data, "Scan CSV: detuning_hz,rate_cps[,sigma_cps]")->required();
  fit->add_option("--free", fit_args.free, "Comma-separated free parameters (overrides fit.free)");

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo HBT detection run written as TTAG");
  add_common(simulate, common, true);
  simulate->add_option("--triggers", sim_args.triggers, "Number of triggers (overrides run.n_triggers)");
  simulate->add_flag("--csv", sim_args.csv, "Also write tags.csv");

  AnalyzeArgs an_args;
  auto* analyze = app.add_subcommand("analyze", "Window statistics and g2 histogram of a tag file");
  add_common(analyze, common, false);
  analyze->add_option("--input", an_args.input, "TTAG or CSV tag file")->required();
  analyze->add_option("--window-s", an_args.window_s, "Detection window after each trigger");
  analyze->add_option("--period-s", an_args.period_s, "Trigger period (sets the g2 delay range to +-2.5 periods)");

  WitnessArgs w_args;
  auto* witness = app.add_subcommand("witness", "Quantum non-Gaussianity and classicality verdicts");
  add_common(witness, common, false);
  witness->add_option("--stats", w_args.stats, "analysis_summary.yaml from the analyze command");
  witness->add_option("--counts", w_args.counts, "N_SINGLE,N_COINC,N_TRIGGERS");
  witness->add_option("--curve-points", w_args.curve_points, "Points of the emitted threshold curve");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigExit;
  }

  try {
    if (scan->parsed()) return cmd_scan(common, scan_args);
    if (wavepacket->parsed()) return cmd_wavepacket(common);
    if (fit->parsed()) return cmd_fit(common, fit_args);
    if (simulate->parsed()) return cmd_simulate(common, sim_args);
    if (analyze->parsed()) return cmd_analyze(common, an_args);
    if (witness->parsed()) return cmd_witness(common, w_args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const YAML::Exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kInternal;
}
