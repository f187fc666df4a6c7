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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "constants.hpp"
#include "errors.hpp"
#include "parallel.hpp"
#include "qng.hpp"
#include "random.hpp"
#include "spectroscopy.hpp"
#include "tag_analysis.hpp"
#include "tag_stream.hpp"

namespace ionphoton {

struct DetectorModel {
  double quantum_efficiency = 1.0;
  double dark_rate = 0.0;  // counts/s
  std::string label = "A";

  void validate() const {
    if (!(quantum_efficiency >= 0.0 && quantum_efficiency <= 1.0))
      throw ConfigError("detector " + label + ": quantum efficiency must lie in [0,1]");
    if (!(dark_rate >= 0.0) || !std::isfinite(dark_rate))
      throw ConfigError("detector " + label + ": dark rate must be non-negative");
  }
};

/// Photon arrival-time distribution relative to the trigger. Either a
/// tabulated wavepacket (inverse-CDF sampling, piecewise-linear CDF) or an
/// exponential decay with a fixed delay.
class ArrivalDistribution {
 public:
  static ArrivalDistribution exponential(double tau, double delay = 0.0) {
    if (!(tau > 0.0) || !(delay >= 0.0)) throw ConfigError("exponential arrival: tau > 0 and delay >= 0 required");
    ArrivalDistribution d;
    d.tau_ = tau;
    d.delay_ = delay;
    return d;
  }

  static ArrivalDistribution tabulated(const WavepacketDensity& wp) {
    if (wp.times.size() < 2 || wp.times.size() != wp.density.size())
      throw ConfigError("tabulated arrival: need at least two grid points");
    ArrivalDistribution d;
    d.times_ = wp.times;
    d.cdf_.assign(wp.times.size(), 0.0);
    for (std::size_t i = 1; i < wp.times.size(); ++i) {
      const double a = std::max(wp.density[i - 1], 0.0), b = std::max(wp.density[i], 0.0);
      d.cdf_[i] = d.cdf_[i - 1] + 0.5 * (a + b) * (wp.times[i] - wp.times[i - 1]);
    }
    if (!(d.cdf_.back() > 0.0)) throw ConfigError("tabulated arrival: density integrates to zero");
    for (auto& c : d.cdf_) c /= d.cdf_.back();
    return d;
  }

  bool is_tabulated() const { return !times_.empty(); }

  /// P(arrival < t).
  double cdf(double t) const {
    if (!is_tabulated()) return t <= delay_ ? 0.0 : -std::expm1(-(t - delay_) / tau_);
    if (t <= times_.front()) return 0.0;
    if (t >= times_.back()) return 1.0;
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - times_.begin());
    const double f = (t - times_[i - 1]) / (times_[i] - times_[i - 1]);
    return cdf_[i - 1] + f * (cdf_[i] - cdf_[i - 1]);
  }

  double sample(double u) const {
    if (!is_tabulated()) return delay_ - tau_ * std::log1p(-u);
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) return times_.back();
    const std::size_t i = std::max<std::size_t>(1, static_cast<std::size_t>(it - cdf_.begin()));
    const double span = cdf_[i] - cdf_[i - 1];
    const double f = span > 0.0 ? (u - cdf_[i - 1]) / span : 0.0;
    return times_[i - 1] + f * (times_[i] - times_[i - 1]);
  }

 private:
  double tau_ = 1e-8, delay_ = 0.0;
  std::vector<double> times_, cdf_;
};

enum class Configuration { kReflected, kSymmetric };

struct SourceModel {
  double p_emit = 1.0;
  ArrivalDistribution arrival = ArrivalDistribution::exponential(8e-9);
  double eta_mode = 1.0;  // reflected configuration
  double eta_1 = 0.5;     // symmetric configuration, path to A
  double eta_2 = 0.5;     // symmetric configuration, path to B
  double p_multi = 0.0;   // probability of a second photon given an emission

  void validate() const {
    for (auto [v, name] : {std::pair{p_emit, "p_emit"}, {eta_mode, "eta_mode"}, {eta_1, "eta_1"},
                           {eta_2, "eta_2"}, {p_multi, "p_multi"}})
      if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string("source: ") + name + " must lie in [0,1]");
  }
};

struct RunConfig {
  Configuration configuration = Configuration::kReflected;
  double period = 1.0 / 200e3;  // s
  double window = 200e-9;       // s
  std::uint64_t n_triggers = 0;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(period > 0.0) || !std::isfinite(period)) throw ConfigError("run: trigger period must be positive");
    if (!(window > 0.0 && window <= period)) throw ConfigError("run: window must lie in (0, period]");
    if (n_triggers == 0) throw ConfigError("run: n_triggers must be positive");
  }

  /// Period and window on the 4 ps instrument grid.
  std::uint64_t period_ps() const { return quantize_ps(period); }
  std::uint64_t window_ps() const { return quantize_ps(window); }

  static std::uint64_t quantize_ps(double seconds) {
    constexpr auto q = constants::kTagResolutionPs;
    return static_cast<std::uint64_t>(std::llround(seconds * 1e12 / static_cast<double>(q))) * q;
  }
};

/// Per-photon detection probabilities, summed over the full period.
struct PhotonFate {
  double to_a = 0.0;
  double to_b = 0.0;
};

inline PhotonFate photon_fate(const SourceModel& src, const DetectorModel& a, const DetectorModel& b,
                              Configuration c) {
  if (c == Configuration::kReflected)
    return {src.eta_mode * 0.5 * a.quantum_efficiency, src.eta_mode * 0.5 * b.quantum_efficiency};
  const PhotonFate f{src.eta_1 * a.quantum_efficiency, src.eta_2 * b.quantum_efficiency};
  if (f.to_a + f.to_b > 1.0 + 1e-15) throw ConfigError("symmetric configuration: eta_1*QE_A + eta_2*QE_B exceeds 1");
  return f;
}

/// Closed-form per-window (Ps, Pc) of the simulate_run model: photon fate x
/// dark-count occupancy, enumerated exactly. Ps counts windows in which
/// exactly one detector clicked, Pc windows in which both did.
struct WindowProbs {
  double none = 0.0, only_a = 0.0, only_b = 0.0, both = 0.0;
  ClickProbs clicks() const { return {only_a + only_b, both}; }
};

inline WindowProbs analytic_window_probs(const SourceModel& src, const DetectorModel& det_a,
                                         const DetectorModel& det_b, const RunConfig& cfg) {
  src.validate();
  det_a.validate();
  det_b.validate();
  const PhotonFate fate = photon_fate(src, det_a, det_b, cfg.configuration);
  const double w_ps = static_cast<double>(cfg.window_ps());
  const double f_in = src.arrival.cdf(w_ps * 1e-12);
  const double a = fate.to_a * f_in, b = fate.to_b * f_in, n = 1.0 - a - b;

  // Photon part: probabilities that A only / B only / both / neither saw an
  // in-window photon.
  const double p1 = src.p_emit * (1.0 - src.p_multi), p2 = src.p_emit * src.p_multi;
  std::array<double, 4> ph{};  // 0 neither, 1 A only, 2 B only, 3 both
  ph[1] = p1 * a + p2 * (a * a + 2.0 * a * n);
  ph[2] = p1 * b + p2 * (b * b + 2.0 * b * n);
  ph[3] = p2 * 2.0 * a * b;
  ph[0] = (1.0 - src.p_emit) + p1 * n + p2 * n * n;

  const double da = -std::expm1(-det_a.dark_rate * w_ps * 1e-12);
  const double db = -std::expm1(-det_b.dark_rate * w_ps * 1e-12);
  WindowProbs w;
  for (int s = 0; s < 4; ++s)
    for (int ka = 0; ka < 2; ++ka)
      for (int kb = 0; kb < 2; ++kb) {
        const double p = ph[s] * (ka ? da : 1.0 - da) * (kb ? db : 1.0 - db);
        const bool click_a = (s == 1 || s == 3) || ka;
        const bool click_b = (s == 2 || s == 3) || kb;
        if (click_a && click_b) w.both += p;
        else if (click_a) w.only_a += p;
        else if (click_b) w.only_b += p;
        else w.none += p;
      }
  return w;
}

inline ClickProbs analytic_click_probs(const SourceModel& src, const DetectorModel& det_a, const DetectorModel& det_b,
                                       const RunConfig& cfg) {
  return analytic_window_probs(src, det_a, det_b, cfg).clicks();
}

namespace detail {

/// Per-trigger sampling tables shared by all triggers of a run.
struct TriggerModel {
  // Photon outcomes that produce at least one detection: (n_A, n_B).
  std::array<std::pair<int, int>, 5> outcomes{{{1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}}};
  std::array<double, 5> outcome_cdf{};  // conditional on at least one detection
  double active[3] = {};                // photon, dark A, dark B: P(component produces a tag)
  double lambda[2] = {};                // expected dark counts per window
  double quiet = 1.0;                   // P(no tag besides the trigger)
  std::array<double, 8> combo_cdf{};    // over masks 1..7, conditional on not quiet
  const ArrivalDistribution* arrival = nullptr;
  std::uint64_t period_ps = 0, window_ps = 0;
};

inline TriggerModel make_trigger_model(const SourceModel& src, const DetectorModel& a, const DetectorModel& b,
                                       const RunConfig& cfg) {
  TriggerModel m;
  const PhotonFate f = photon_fate(src, a, b, cfg.configuration);
  const double lost = 1.0 - f.to_a - f.to_b;
  const double p1 = src.p_emit * (1.0 - src.p_multi), p2 = src.p_emit * src.p_multi;
  const std::array<double, 5> w = {p1 * f.to_a + p2 * 2.0 * f.to_a * lost, p1 * f.to_b + p2 * 2.0 * f.to_b * lost,
                                   p2 * f.to_a * f.to_a, p2 * 2.0 * f.to_a * f.to_b, p2 * f.to_b * f.to_b};
  double total = 0.0;
  for (double x : w) total += x;
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    acc += w[i];
    m.outcome_cdf[i] = total > 0.0 ? acc / total : 0.0;
  }
  m.outcome_cdf.back() = 1.0;
  m.window_ps = cfg.window_ps();
  m.period_ps = cfg.period_ps();
  const double window_s = static_cast<double>(m.window_ps) * 1e-12;
  m.lambda[0] = a.dark_rate * window_s;
  m.lambda[1] = b.dark_rate * window_s;
  m.active[0] = total;
  m.active[1] = -std::expm1(-m.lambda[0]);
  m.active[2] = -std::expm1(-m.lambda[1]);
  m.quiet = (1.0 - m.active[0]) * std::exp(-m.lambda[0]) * std::exp(-m.lambda[1]);
  double cum = 0.0;
  for (int mask = 1; mask < 8; ++mask) {
    double p = 1.0;
    for (int c = 0; c < 3; ++c) p *= (mask >> c & 1) ? m.active[c] : 1.0 - m.active[c];
    cum += p;
    m.combo_cdf[mask] = cum;
  }
  m.arrival = &src.arrival;
  return m;
}

/// Zero-truncated Poisson draw by inversion.
inline int positive_poisson(double lambda, double u) {
  const double norm = -std::expm1(-lambda);
  double term = std::exp(-lambda) * lambda / norm;  // P(k = 1 | k >= 1)
  double cum = term;
  int k = 1;
  while (u >= cum && k < 1000) {
    ++k;
    term *= lambda / k;
    cum += term;
    if (term == 0.0) break;
  }
  return k;
}

/// Appends the tags of trigger `index` (trigger first, then sorted events).
inline void simulate_trigger(const TriggerModel& m, std::uint64_t seed, std::uint64_t index,
                             std::vector<TagRecord>& out) {
  const std::uint64_t t0 = index * m.period_ps;
  out.push_back({t0, Channel::kT});
  SplitMix64 rng = SplitMix64::substream(seed, index);
  const double u = rng.uniform();
  if (u < m.quiet) return;

  const double v = u - m.quiet;
  int mask = 7;
  for (int k = 1; k < 8; ++k)
    if (v < m.combo_cdf[k]) {
      mask = k;
      break;
    }

  constexpr auto q = constants::kTagResolutionPs;
  TagRecord events[1024];
  std::size_t n = 0;
  auto add = [&](double offset_s, Channel c) {
    const double ps = offset_s * 1e12;
    if (!(ps >= 0.0)) return;
    const auto ticks = static_cast<std::uint64_t>(ps / static_cast<double>(q)) * q;
    if (ticks >= m.period_ps || n >= std::size(events)) return;
    events[n++] = {t0 + ticks, c};
  };
  if (mask & 1) {
    const double w = rng.uniform();
    std::size_t o = 0;
    while (o + 1 < m.outcome_cdf.size() && w >= m.outcome_cdf[o]) ++o;
    for (int i = 0; i < m.outcomes[o].first; ++i) add(m.arrival->sample(rng.uniform()), Channel::kA);
    for (int i = 0; i < m.outcomes[o].second; ++i) add(m.arrival->sample(rng.uniform()), Channel::kB);
  }
  const double window_s = static_cast<double>(m.window_ps) * 1e-12;
  for (int d = 0; d < 2; ++d)
    if (mask & (2 << d)) {
      const int k = positive_poisson(m.lambda[d], rng.uniform());
      for (int i = 0; i < k; ++i) add(rng.uniform() * window_s, d == 0 ? Channel::kA : Channel::kB);
    }
  std::sort(events, events + n, [](const TagRecord& x, const TagRecord& y) {
    return x.timestamp_ps != y.timestamp_ps ? x.timestamp_ps < y.timestamp_ps : x.channel < y.channel;
  });
  out.insert(out.end(), events, events + n);
}

}  // namespace detail

struct SimulateOptions {
  unsigned workers = 1;
  std::uint64_t block_triggers = 1 << 16;
};

/// Monte-Carlo HBT run streamed into a sink in trigger order. Every trigger
/// draws from its own substream, so output is identical for any worker count
/// and block size.
inline void simulate_run(const SourceModel& src, const DetectorModel& det_a, const DetectorModel& det_b,
                         const RunConfig& cfg, TagSink& sink, const SimulateOptions& options = {}) {
  src.validate();
  det_a.validate();
  det_b.validate();
  cfg.validate();
  if (cfg.period_ps() == 0 || cfg.window_ps() == 0) throw ConfigError("run: period and window must exceed 4 ps");
  if (static_cast<double>(cfg.period_ps()) * static_cast<double>(cfg.n_triggers) > 1.8e19)
    throw ConfigError("run: total duration overflows 64-bit picosecond timestamps");
  const detail::TriggerModel model = detail::make_trigger_model(src, det_a, det_b, cfg);
  const std::uint64_t block = std::max<std::uint64_t>(1, options.block_triggers);
  const std::uint64_t n_blocks = (cfg.n_triggers + block - 1) / block;
  const unsigned workers = std::max(1u, options.workers);
  const std::uint64_t batch = workers * 2ULL;
  std::vector<std::vector<TagRecord>> buffers(batch);
  for (std::uint64_t first = 0; first < n_blocks; first += batch) {
    const std::uint64_t count = std::min(batch, n_blocks - first);
    parallel_for(count, workers, [&](std::size_t j) {
      auto& buf = buffers[j];
      buf.clear();
      const std::uint64_t lo = (first + j) * block;
      const std::uint64_t hi = std::min(cfg.n_triggers, lo + block);
      for (std::uint64_t i = lo; i < hi; ++i) detail::simulate_trigger(model, cfg.seed, i, buf);
    });
    for (std::uint64_t j = 0; j < count; ++j) sink.consume(buffers[j]);
  }
  sink.finish();
}

inline TagStream simulate_run(const SourceModel& src, const DetectorModel& det_a, const DetectorModel& det_b,
                              const RunConfig& cfg, const SimulateOptions& options = {}) {
  CollectingSink sink;
  simulate_run(src, det_a, det_b, cfg, sink, options);
  return std::move(sink.stream);
}

/// Window-category counts drawn directly from the multinomial implied by
/// analytic_window_probs. Used where trigger counts far beyond what a tag
/// stream can hold are needed.
inline WindowCounts sample_window_counts(const WindowProbs& p, std::uint64_t n_triggers, std::uint64_t seed) {
  SplitMix64 rng = SplitMix64::substream(seed, 0x5eedULL);
  std::mt19937_64 engine(rng());
  WindowCounts c;
  c.n_triggers = n_triggers;
  std::uint64_t remaining = n_triggers;
  double mass = 1.0;
  auto draw = [&](double prob) -> std::uint64_t {
    if (remaining == 0 || prob <= 0.0) return 0;
    const double f = std::clamp(prob / mass, 0.0, 1.0);
    mass -= prob;
    // binomial_distribution takes a signed count; split large counts.
    std::uint64_t got = 0, left = remaining;
    constexpr std::uint64_t chunk = 1ULL << 40;
    while (left > 0) {
      const std::uint64_t m = std::min(left, chunk);
      std::binomial_distribution<long long> bin(static_cast<long long>(m), f);
      got += static_cast<std::uint64_t>(bin(engine));
      left -= m;
    }
    remaining -= got;
    return got;
  };
  c.both = draw(p.both);
  c.only_a = draw(p.only_a);
  c.only_b = draw(p.only_b);
  c.none = remaining;
  return c;
}

/// Mode efficiency (reflected configuration) for which the analytic Ps hits
/// `target_ps`; bisection on [0, 1].
inline double tune_mode_efficiency(SourceModel src, const DetectorModel& a, const DetectorModel& b,
                                   RunConfig cfg, double target_ps) {
  cfg.configuration = Configuration::kReflected;
  src.eta_mode = 1.0;
  if (analytic_click_probs(src, a, b, cfg).ps < target_ps)
    throw ConfigError("target Ps not reachable with unit mode efficiency");
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    src.eta_mode = 0.5 * (lo + hi);
    (analytic_click_probs(src, a, b, cfg).ps < target_ps ? lo : hi) = src.eta_mode;
  }
  return 0.5 * (lo + hi);
}

}  // namespace ionphoton
