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
#include <complex>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "ionphoton/atom_model.hpp"
#include "ionphoton/bloch_solver.hpp"
#include "ionphoton/errors.hpp"
#include "ionphoton/evolution.hpp"
#include "ionphoton/parallel.hpp"

namespace ionphoton {

// ---------------------------------------------------------------------------
// Dark-resonance scans

struct ScanPoint {
  double detuning = 0.0;  // repump detuning, rad/s
  double rate = 0.0;      // detected photons per second
  std::optional<std::string> issue;

  bool ok() const { return !issue; }
};

/// Stationary detected rate for one configuration. A degenerate null space is
/// still answered when the rate functional vanishes on every stationary state
/// (e.g. all population shelved in a dark manifold); otherwise the point is
/// marked with the error instead of a rate.
inline ScanPoint stationary_rate(const Liouvillian& generator, const Eigen::MatrixXcd& detection) {
  ScanPoint p;
  try {
    p.rate = scattering_rate(steady_state(generator), detection);
  } catch (const AmbiguousSteadyStateError& e) {
    const Eigen::MatrixXcd basis = stationary_subspace(generator);
    const Eigen::Index n = generator.dim();
    double worst = 0.0;
    for (Eigen::Index k = 0; k < basis.cols(); ++k) {
      const Eigen::VectorXcd v = basis.col(k);
      const Eigen::Map<const Eigen::MatrixXcd> rho(v.data(), n, n);
      worst = std::max(worst, std::abs((detection * rho).trace()));
    }
    const double scale = std::max(detection.cwiseAbs().maxCoeff(), 1e-300);
    if (worst <= 1e-9 * scale) {
      p.rate = 0.0;
      p.issue = std::string(e.what()) + "; rate is zero on every stationary state";
    } else {
      p.rate = std::nan("");
      p.issue = e.what();
    }
  } catch (const Error& e) {
    p.rate = std::nan("");
    p.issue = e.what();
  }
  return p;
}

/// Points whose only issue is a degenerate-but-dark null space are usable.
inline bool usable(const ScanPoint& p) { return std::isfinite(p.rate); }

/// Stationary fluorescence versus repump detuning. Grid points are
/// independent and may run in parallel; results are stored by index.
inline std::vector<ScanPoint> dark_resonance_scan(const LevelSystem& sys,
                                                  std::vector<LaserField> lasers,
                                                  std::size_t repump_index,
                                                  const Eigen::MatrixXcd& detection,
                                                  std::span<const double> repump_detunings,
                                                  unsigned workers = 1) {
  if (repump_detunings.empty()) throw DomainError("dark-resonance scan needs a non-empty grid");
  std::vector<ScanPoint> out(repump_detunings.size());
  parallel_for(repump_detunings.size(), workers, [&](std::size_t i) {
    std::vector<LaserField> local = lasers;
    local.at(repump_index).detuning = repump_detunings[i];
    ScanPoint p = stationary_rate(build_liouvillian(sys, local, 0.0), detection);
    p.detuning = repump_detunings[i];
    out[i] = std::move(p);
  });
  return out;
}

inline std::vector<ScanPoint> dark_resonance_scan(const LevelScheme& scheme, const LaserField& cooling,
                                                  const LaserField& repump, const FieldEnvironment& env,
                                                  std::span<const double> repump_detunings,
                                                  const DetectionGeometry& geometry,
                                                  unsigned workers = 1) {
  std::vector<LaserField> lasers{cooling, repump};
  const LevelSystem sys = atomic_system(scheme, lasers, env);
  return dark_resonance_scan(sys, std::move(lasers), 1, detection_operator(scheme, geometry, env),
                             repump_detunings, workers);
}

// ---------------------------------------------------------------------------
// Pulsed single-photon wavepackets

struct PulseSegment {
  double duration = 0.0;            // s
  std::vector<Envelope> envelopes;  // one per sequence laser, time relative to segment start
};

/// Laser set (fixing the rotating frames) and the ordered segments that gate
/// it. The detection window opens at the start of the last segment.
struct PulseSequence {
  std::vector<LaserField> lasers;
  std::vector<PulseSegment> segments;
  // Default preparation: equal mixture of the four D3/2 sublevels, no coherences.
  std::optional<DensityMatrix> initial_state;

  void validate() const {
    if (segments.empty()) throw ConfigError("pulse sequence has no segments");
    for (const auto& s : segments) {
      if (!(s.duration > 0.0)) throw ConfigError("pulse segment durations must be positive");
      if (s.envelopes.size() != lasers.size())
        throw ConfigError("each pulse segment needs one envelope per laser");
    }
  }
};

/// The photon-generation stage of the trigger cycle: the ion starts shelved
/// in D3/2, stays dark for `dark_time`, then the repump switches on with an
/// erf profile of the given 10-90% rise time, reaching half amplitude
/// `switch_delay` after the window opens. The cooling laser stays off; it is
/// carried only to fix the S rotating frame.
inline PulseSequence trigger_sequence(const LaserField& cooling, const LaserField& repump,
                                      double window, double rise_time = 90e-9,
                                      double switch_delay = 90e-9, double dark_time = 500e-9,
                                      Envelope::Shape shape = Envelope::Shape::kErfRamp) {
  PulseSequence seq;
  seq.lasers = {cooling, repump};
  if (dark_time > 0.0)
    seq.segments.push_back({dark_time, {Envelope::constant(0.0), Envelope::constant(0.0)}});
  seq.segments.push_back(
      {window, {Envelope::constant(0.0), Envelope::ramp(shape, switch_delay, rise_time)}});
  return seq;
}

struct WavepacketDensity {
  std::vector<double> times;    // s, uniform step, window-relative
  std::vector<double> density;  // 1/s
  double probability = 0.0;     // integral of the density over the window

  double step() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }

  /// Unit-area copy (all zeros stay zeros).
  WavepacketDensity normalized() const {
    WavepacketDensity w = *this;
    if (probability > 0.0)
      for (auto& d : w.density) d /= probability;
    w.probability = probability > 0.0 ? 1.0 : 0.0;
    return w;
  }

  double mean_arrival_time() const {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      num += times[i] * density[i];
      den += density[i];
    }
    return den > 0.0 ? num / den : std::nan("");
  }

  /// Probability that the arrival time is below t (trapezoid on the grid).
  double cumulative(double t) const {
    double acc = 0.0;
    for (std::size_t i = 1; i < times.size() && times[i - 1] < t; ++i) {
      const double hi = std::min(times[i], t);
      const double frac = (hi - times[i - 1]) / (times[i] - times[i - 1]);
      const double d_hi = density[i - 1] + frac * (density[i] - density[i - 1]);
      acc += 0.5 * (density[i - 1] + d_hi) * (hi - times[i - 1]);
    }
    return acc;
  }
};

inline double trapezoid(std::span<const double> y, double dx) {
  if (y.size() < 2) return 0.0;
  double s = 0.5 * (y.front() + y.back());
  for (std::size_t i = 1; i + 1 < y.size(); ++i) s += y[i];
  return s * dx;
}

struct WavepacketWindow {
  double length = 1e-6;  // s
  double step = 1e-9;    // s
};

/// Detected-photon arrival density over the window: rho(t) is propagated
/// through the sequence and the density is the scattering rate into the
/// detection mode at each grid time.
inline WavepacketDensity photon_wavepacket(const LevelScheme& scheme, const PulseSequence& sequence,
                                           const DetectionGeometry& geometry,
                                           const FieldEnvironment& env, const WavepacketWindow& window,
                                           const EvolveOptions& options = {}) {
  sequence.validate();
  if (!(window.length > 0.0 && window.step > 0.0 && window.step <= window.length))
    throw ConfigError("wavepacket window needs 0 < step <= length");
  const LevelSystem sys = atomic_system(scheme, sequence.lasers, env);
  const Eigen::MatrixXcd detection = detection_operator(scheme, geometry, env);

  std::vector<Eigen::Index> shelved;
  for (int m2 : {-3, -1, 1, 3})
    shelved.push_back(static_cast<Eigen::Index>(scheme.index_of({Manifold::kD32, m2})));
  DensityMatrix rho = sequence.initial_state.value_or(DensityMatrix::mixture(sys.dim, shelved));

  auto segment_generator = [&](const PulseSegment& seg) {
    std::vector<LaserField> lasers = sequence.lasers;
    for (std::size_t k = 0; k < lasers.size(); ++k) lasers[k].envelope = seg.envelopes[k];
    return build_liouvillian(sys, lasers);
  };

  for (std::size_t s = 0; s + 1 < sequence.segments.size(); ++s) {
    const auto& seg = sequence.segments[s];
    const std::vector<double> ends{0.0, seg.duration};
    rho = evolve(rho, segment_generator(seg), ends, options).back();
  }

  const auto count = static_cast<std::size_t>(std::llround(window.length / window.step)) + 1;
  WavepacketDensity wp;
  wp.times.resize(count);
  for (std::size_t i = 0; i < count; ++i) wp.times[i] = static_cast<double>(i) * window.step;
  const auto trajectory = evolve(rho, segment_generator(sequence.segments.back()), wp.times, options);
  wp.density.resize(count);
  for (std::size_t i = 0; i < count; ++i)
    wp.density[i] = std::max(0.0, scattering_rate(trajectory[i], detection));
  wp.probability = trapezoid(wp.density, window.step);
  return wp;
}

// ---------------------------------------------------------------------------
// Quantum-beat analysis

struct BeatResult {
  bool detected = false;
  double frequency_hz = 0.0;
  double resolution_hz = 0.0;  // 1 / window
  double amplitude = 0.0;      // relative modulation depth of the strongest component
  double prominence = 0.0;     // peak over the median of the residual spectrum
};

/// Dominant modulation of the arrival density on top of its smooth envelope.
/// The switch-on edge is skipped (analysis runs from where the density has
/// fallen to 90% of its maximum down to 1e-3 of it), the envelope is removed
/// by a polynomial fit to log(density), and the relative residual is
/// Hann-windowed and zero-padded before the FFT. A beat
/// needs a relative depth of at least `min_amplitude`, a peak `min_prominence`
/// times the spectral median, and three periods within the analysed span.
inline BeatResult beat_frequency(const WavepacketDensity& wp, double min_amplitude = 1e-6,
                                 double min_prominence = 10.0) {
  BeatResult result;
  const std::size_t n = wp.density.size();
  if (n < 16) return result;
  const double dt = wp.step();
  result.resolution_hz = 1.0 / (dt * static_cast<double>(n));

  const auto peak_it = std::max_element(wp.density.begin(), wp.density.end());
  if (!(*peak_it > 0.0)) return result;
  std::size_t first = static_cast<std::size_t>(peak_it - wp.density.begin());
  // Skip the switch-on shoulder; its curvature is not log-polynomial.
  while (first + 1 < n && wp.density[first] > 0.9 * *peak_it) ++first;
  std::size_t last = first;
  while (last + 1 < n && wp.density[last + 1] > 1e-3 * *peak_it) ++last;
  const std::size_t m = last - first + 1;
  if (m < 16) return result;

  // Smooth envelope: degree-6 polynomial in log density on t scaled to [-1, 1].
  constexpr int degree = 6;
  Eigen::MatrixXd vander(static_cast<Eigen::Index>(m), degree + 1);
  Eigen::VectorXd logy(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    const double x = m > 1 ? 2.0 * static_cast<double>(i) / static_cast<double>(m - 1) - 1.0 : 0.0;
    double pw = 1.0;
    for (int k = 0; k <= degree; ++k, pw *= x) vander(static_cast<Eigen::Index>(i), k) = pw;
    logy(static_cast<Eigen::Index>(i)) = std::log(wp.density[first + i]);
  }
  const Eigen::VectorXd coef = vander.colPivHouseholderQr().solve(logy);
  const Eigen::VectorXd envelope = vander * coef;

  std::size_t padded = 1;
  while (padded < 8 * m) padded <<= 1;
  std::vector<double> x(padded, 0.0);
  double wsum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double w = 0.5 - 0.5 * std::cos(constants::kTwoPi * static_cast<double>(i) / static_cast<double>(m - 1));
    x[i] = w * std::expm1(logy(static_cast<Eigen::Index>(i)) - envelope(static_cast<Eigen::Index>(i)));
    wsum += w;
  }
  std::vector<std::complex<double>> spectrum;
  Eigen::FFT<double> fft;
  fft.fwd(spectrum, x);
  std::vector<double> mag(padded / 2 + 1);
  for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = 2.0 * std::abs(spectrum[k]) / wsum;

  const double span = dt * static_cast<double>(m);
  const double df = 1.0 / (dt * static_cast<double>(padded));
  const auto k_min = static_cast<std::size_t>(std::ceil(3.0 / span / df));
  if (k_min + 2 >= mag.size()) return result;
  std::size_t best = 0;
  for (std::size_t k = k_min; k + 1 < mag.size(); ++k)
    if (mag[k] > mag[k - 1] && mag[k] >= mag[k + 1] && (best == 0 || mag[k] > mag[best])) best = k;
  if (best == 0) return result;

  std::vector<double> tail(mag.begin() + static_cast<std::ptrdiff_t>(k_min), mag.end());
  std::nth_element(tail.begin(), tail.begin() + static_cast<std::ptrdiff_t>(tail.size() / 2), tail.end());
  const double median = tail[tail.size() / 2];
  result.amplitude = mag[best];
  result.prominence = mag[best] / std::max(median, 1e-300);
  if (result.amplitude < min_amplitude || result.prominence < min_prominence) return result;

  // Parabolic refinement on the log magnitude, clamped to half a bin.
  const double a = std::log(mag[best - 1]), b = std::log(mag[best]), c = std::log(mag[best + 1]);
  double offset = 0.0;
  if (const double den = a - 2.0 * b + c; den < 0.0) offset = std::clamp(0.5 * (a - c) / den, -0.5, 0.5);
  result.detected = true;
  result.frequency_hz = (static_cast<double>(best) + offset) * df;
  return result;
}

/// Zeeman splitting in Hz between D3/2 sublevels whose m_J differ by delta_m.
inline double d_manifold_splitting_hz(const LevelScheme& scheme, const FieldEnvironment& env,
                                      int delta_m = 1) {
  return std::abs(zeeman_shift(scheme, {Manifold::kD32, 1}, env) -
                  zeeman_shift(scheme, {Manifold::kD32, 1 - 2 * delta_m}, env)) /
         constants::kTwoPi;
}

}  // namespace ionphoton
