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
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "errors.hpp"
#include "statistics.hpp"
#include "tag_stream.hpp"

namespace ionphoton {

/// Trigger windows by click pattern.
struct WindowCounts {
  std::uint64_t n_triggers = 0, none = 0, only_a = 0, only_b = 0, both = 0;
  std::uint64_t single() const { return only_a + only_b; }
  std::uint64_t clicked_a() const { return only_a + both; }
  std::uint64_t clicked_b() const { return only_b + both; }

  WindowCounts& operator+=(const WindowCounts& o) {
    n_triggers += o.n_triggers;
    none += o.none;
    only_a += o.only_a;
    only_b += o.only_b;
    both += o.both;
    return *this;
  }
};

/// Streaming classification of each trigger window [t_T, t_T + window).
/// Detector tags before the first trigger or outside a window are ignored.
class WindowClassifier : public TagSink {
 public:
  explicit WindowClassifier(std::uint64_t window_ps) : window_ps_(window_ps) {
    if (window_ps == 0) throw ConfigError("window must be positive");
  }

  void consume(std::span<const TagRecord> block) override {
    for (const TagRecord& t : block) {
      if (t.channel == Channel::kT) {
        close();
        open_ = true;
        start_ = t.timestamp_ps;
        a_ = b_ = false;
      } else if (open_ && t.timestamp_ps - start_ < window_ps_) {
        (t.channel == Channel::kA ? a_ : b_) = true;
      }
    }
  }

  void finish() override { close(); }

  const WindowCounts& counts() const { return counts_; }

 private:
  void close() {
    if (!open_) return;
    ++counts_.n_triggers;
    if (a_ && b_) ++counts_.both;
    else if (a_) ++counts_.only_a;
    else if (b_) ++counts_.only_b;
    else ++counts_.none;
    open_ = false;
  }

  std::uint64_t window_ps_;
  bool open_ = false, a_ = false, b_ = false;
  std::uint64_t start_ = 0;
  WindowCounts counts_;
};

struct ClickStatistics {
  std::uint64_t n_triggers = 0;
  double window = 0.0;  // s
  std::uint64_t n_a = 0;          // windows with an A click
  std::uint64_t n_b = 0;          // windows with a B click
  std::uint64_t n_single = 0;     // exactly one detector clicked
  std::uint64_t n_coincidence = 0;
  double ps = 0.0, pc = 0.0;
  Interval ps_ci, pc_ci;
  std::optional<double> alpha;  // Pc / Ps^2, absent when Ps = 0
  Interval alpha_ci;
  std::optional<double> g2_0;   // n_c N / (n_a n_b), absent when n_a n_b = 0
  Interval g2_ci;
};

/// Estimates and 95% intervals. The alpha and g2 intervals combine the exact
/// Pc interval with the exact Ps interval (alpha) or fixed singles (g2).
inline ClickStatistics click_statistics(const WindowCounts& c, double window_s) {
  if (c.n_triggers == 0) throw FormatError("no trigger events in the stream");
  ClickStatistics s;
  s.n_triggers = c.n_triggers;
  s.window = window_s;
  s.n_a = c.clicked_a();
  s.n_b = c.clicked_b();
  s.n_single = c.single();
  s.n_coincidence = c.both;
  const double n = static_cast<double>(c.n_triggers);
  s.ps = static_cast<double>(s.n_single) / n;
  s.pc = static_cast<double>(s.n_coincidence) / n;
  s.ps_ci = clopper_pearson(s.n_single, c.n_triggers);
  s.pc_ci = clopper_pearson(s.n_coincidence, c.n_triggers);
  if (s.ps > 0.0) {
    s.alpha = s.pc / (s.ps * s.ps);
    s.alpha_ci = {s.pc_ci.lo / (s.ps_ci.hi * s.ps_ci.hi),
                  s.ps_ci.lo > 0.0 ? s.pc_ci.hi / (s.ps_ci.lo * s.ps_ci.lo) : std::numeric_limits<double>::infinity()};
  }
  if (s.n_a > 0 && s.n_b > 0) {
    const double norm = n * n / (static_cast<double>(s.n_a) * static_cast<double>(s.n_b));
    s.g2_0 = s.pc * norm;
    s.g2_ci = {s.pc_ci.lo * norm, s.pc_ci.hi * norm};
  }
  return s;
}

inline ClickStatistics window_statistics(const TagStream& s, double window_s) {
  WindowClassifier c(static_cast<std::uint64_t>(std::llround(window_s * 1e12)));
  c.consume(s.records);
  c.finish();
  return click_statistics(c.counts(), window_s);
}

// ---------------------------------------------------------------------------

struct G2Histogram {
  std::int64_t tau_min_ps = 0;
  std::int64_t bin_ps = 1;
  std::vector<std::uint64_t> counts;
  std::uint64_t total_pairs = 0;
  std::uint64_t n_triggers = 0;
  std::uint64_t n_a = 0, n_b = 0;        // detector tags used (after gating)
  std::uint64_t zero_pulse_pairs = 0;    // A-B pairs from the same trigger
  std::optional<double> g2_0;            // zero_pulse_pairs * n_triggers / (n_a n_b)

  double bin_center_ps(std::size_t i) const {
    return static_cast<double>(tau_min_ps) + (static_cast<double>(i) + 0.5) * static_cast<double>(bin_ps);
  }
};

/// Collects detector tags (with the index of the preceding trigger) for g2.
/// With a gate only tags inside [t_T, t_T + gate) are kept.
class G2Accumulator : public TagSink {
 public:
  explicit G2Accumulator(std::optional<std::uint64_t> gate_ps = std::nullopt) : gate_ps_(gate_ps) {}

  void consume(std::span<const TagRecord> block) override {
    for (const TagRecord& t : block) {
      if (t.channel == Channel::kT) {
        ++n_triggers_;
        last_trigger_ = t.timestamp_ps;
        continue;
      }
      const bool have_trigger = n_triggers_ > 0;
      if (gate_ps_ && (!have_trigger || t.timestamp_ps - last_trigger_ >= *gate_ps_)) continue;
      const std::int64_t idx = have_trigger ? static_cast<std::int64_t>(n_triggers_ - 1) : -1;
      (t.channel == Channel::kA ? a_ : b_).push_back({t.timestamp_ps, idx});
    }
  }

  /// All A-B pairs with t_B - t_A in [tau_min, tau_max).
  G2Histogram histogram(std::int64_t tau_min_ps, std::int64_t tau_max_ps, std::int64_t bin_ps) const {
    if (bin_ps <= 0) throw ConfigError("g2 bin width must be positive");
    if (tau_max_ps <= tau_min_ps) throw ConfigError("g2 delay range must be non-empty");
    G2Histogram h;
    h.tau_min_ps = tau_min_ps;
    h.bin_ps = bin_ps;
    h.counts.assign(static_cast<std::size_t>((tau_max_ps - tau_min_ps + bin_ps - 1) / bin_ps), 0);
    h.n_triggers = n_triggers_;
    h.n_a = a_.size();
    h.n_b = b_.size();
    std::size_t lo = 0;
    for (const Tag& a : a_) {
      const auto ta = static_cast<std::int64_t>(a.t);
      while (lo < b_.size() && static_cast<std::int64_t>(b_[lo].t) - ta < tau_min_ps) ++lo;
      for (std::size_t j = lo; j < b_.size(); ++j) {
        const std::int64_t d = static_cast<std::int64_t>(b_[j].t) - ta;
        if (d >= tau_max_ps) break;
        ++h.counts[static_cast<std::size_t>((d - tau_min_ps) / bin_ps)];
        ++h.total_pairs;
      }
    }
    // Same-trigger pairs: product of per-trigger A and B multiplicities.
    std::size_t i = 0, j = 0;
    while (i < a_.size() && j < b_.size()) {
      if (a_[i].trigger < b_[j].trigger) ++i;
      else if (b_[j].trigger < a_[i].trigger) ++j;
      else {
        const std::int64_t k = a_[i].trigger;
        std::uint64_t na = 0, nb = 0;
        while (i < a_.size() && a_[i].trigger == k) ++na, ++i;
        while (j < b_.size() && b_[j].trigger == k) ++nb, ++j;
        if (k >= 0) h.zero_pulse_pairs += na * nb;
      }
    }
    if (h.n_a > 0 && h.n_b > 0 && h.n_triggers > 0)
      h.g2_0 = static_cast<double>(h.zero_pulse_pairs) * static_cast<double>(h.n_triggers) /
               (static_cast<double>(h.n_a) * static_cast<double>(h.n_b));
    return h;
  }

 private:
  struct Tag {
    std::uint64_t t;
    std::int64_t trigger;
  };
  std::optional<std::uint64_t> gate_ps_;
  std::uint64_t n_triggers_ = 0, last_trigger_ = 0;
  std::vector<Tag> a_, b_;
};

inline G2Histogram g2_histogram(const TagStream& s, std::int64_t tau_min_ps, std::int64_t tau_max_ps,
                                std::int64_t bin_ps, std::optional<std::uint64_t> gate_ps = std::nullopt) {
  G2Accumulator acc(gate_ps);
  acc.consume(s.records);
  return acc.histogram(tau_min_ps, tau_max_ps, bin_ps);
}

// ---------------------------------------------------------------------------

struct DarkCorrectedAlpha {
  double ps = 0.0;
  double accidental_pc = 0.0;   // expected dark x signal and dark x dark coincidences per window
  double residual_pc = 0.0;     // measured Pc minus accidentals (may be negative)
  double pc_upper = 0.0;        // one-sided upper bound on the intrinsic Pc
  double alpha_upper = 0.0;     // pc_upper / Ps^2
};

/// One-sided upper bound on the intrinsic alpha after subtracting accidental
/// coincidences predicted by a Poisson dark-count model. Counting and
/// dark-rate margins (both one-sided at `level`) are added in quadrature.
inline DarkCorrectedAlpha dark_corrected_alpha(const ClickStatistics& s, double dark_a, double dark_b,
                                               double dark_sigma, double level = 0.95) {
  if (!(dark_a >= 0.0 && dark_b >= 0.0 && dark_sigma >= 0.0)) throw ConfigError("dark rates must be non-negative");
  if (s.n_triggers == 0) throw FormatError("no trigger events in the statistics");
  const double n = static_cast<double>(s.n_triggers);
  const double fa = static_cast<double>(s.n_a) / n, fb = static_cast<double>(s.n_b) / n;

  auto accidental = [&](double ra, double rb) {
    const double pa = -std::expm1(-ra * s.window), pb = -std::expm1(-rb * s.window);
    // Signal click probabilities with the dark contribution removed.
    const double sa = std::clamp(1.0 - (1.0 - fa) / (1.0 - pa), 0.0, 1.0);
    const double sb = std::clamp(1.0 - (1.0 - fb) / (1.0 - pb), 0.0, 1.0);
    return sa * pb + sb * pa + std::max(0.0, 1.0 - sa - sb) * pa * pb;
  };

  DarkCorrectedAlpha out;
  out.ps = s.ps;
  out.accidental_pc = accidental(dark_a, dark_b);
  out.residual_pc = s.pc - out.accidental_pc;
  const double count_margin = clopper_pearson_upper(s.n_coincidence, s.n_triggers, level) - s.pc;
  double dark_margin = 0.0;
  if (dark_sigma > 0.0) {
    const double h = std::max(1e-6 * std::max(dark_a, dark_b), 1e-9);
    const double ga = (accidental(dark_a + h, dark_b) - accidental(std::max(0.0, dark_a - h), dark_b)) /
                      (dark_a + h - std::max(0.0, dark_a - h));
    const double gb = (accidental(dark_a, dark_b + h) - accidental(dark_a, std::max(0.0, dark_b - h))) /
                      (dark_b + h - std::max(0.0, dark_b - h));
    const double z = boost::math::quantile(boost::math::normal_distribution<double>(), level);
    dark_margin = z * dark_sigma * std::hypot(ga, gb);
  }
  out.pc_upper = std::max(0.0, out.residual_pc + std::hypot(count_margin, dark_margin));
  out.alpha_upper = s.ps > 0.0 ? out.pc_upper / (s.ps * s.ps) : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace ionphoton
