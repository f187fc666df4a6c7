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
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "constants.hpp"
#include "errors.hpp"
#include "statistics.hpp"

namespace ionphoton {

/// Gaussian state obtained from vacuum by squeezing (variance V in x),
/// rotation by phi and displacement by sqrt(r) along x.
struct SqueezedStateParams {
  double V = 1.0;
  double phi = 0.0;
  double r = 0.0;

  void validate() const {
    if (!(V > 0.0) || !std::isfinite(V)) throw DomainError("squeezing variance V must be positive");
    if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("displacement parameter r must be non-negative");
    if (!std::isfinite(phi)) throw DomainError("rotation angle must be finite");
  }
};

struct FockProbs {
  double p0 = 1.0;
  double p1 = 0.0;
  double p2plus = 0.0;
};

struct ClickProbs {
  double ps = 0.0;
  double pc = 0.0;
};

inline FockProbs squeezed_fock_probs(const SqueezedStateParams& p) {
  p.validate();
  const double V = p.V, c2 = std::cos(2.0 * p.phi);
  FockProbs f;
  f.p0 = 2.0 * std::sqrt(V) / (1.0 + V) * std::exp(p.r * (-1.0 - V + (V - 1.0) * c2) / (4.0 * (1.0 + V)));
  f.p1 = p.r * (1.0 + V * V - (V * V - 1.0) * c2) / (2.0 * (1.0 + V) * (1.0 + V)) * f.p0;
  f.p2plus = 1.0 - f.p0 - f.p1;
  constexpr double tol = 1e-12;
  for (double v : {f.p0, f.p1, f.p2plus})
    if (!(v >= -tol && v <= 1.0 + tol)) throw DomainError("Fock probabilities left [0,1]");
  f.p2plus = std::max(f.p2plus, 0.0);
  return f;
}

/// Wigner function of the state described by p at phase-space point (x, p).
inline double squeezed_wigner(const SqueezedStateParams& s, double x, double p) {
  const double c = std::cos(s.phi), sn = std::sin(s.phi);
  const double xd = x - std::sqrt(s.r);
  const double xr = xd * c + p * sn;
  const double pr = -xd * sn + p * c;
  const double u = xr / std::sqrt(s.V), w = std::sqrt(s.V) * pr;
  return std::exp(-0.5 * (u * u + w * w)) / constants::kTwoPi;
}

/// Wigner representation of the projector onto |0> or |1>, normalised so
/// that P_n = integral of W_n * W.
inline double fock_projector_wigner(int n, double x, double p) {
  const double rho2 = x * x + p * p;
  const double g = 2.0 * std::exp(-0.5 * rho2);
  return n == 0 ? g : (rho2 - 1.0) * g;
}

/// P_n by tensor Gauss-Legendre quadrature over [-12, 12]^2. The panel count
/// is doubled until two successive estimates agree to `tol`.
inline double wigner_fock_overlap(const SqueezedStateParams& s, int n, double tol = 1e-12) {
  if (n != 0 && n != 1) throw DomainError("wigner_fock_overlap: n must be 0 or 1");
  s.validate();
  using Rule = boost::math::quadrature::gauss<double, 20>;
  constexpr double half_width = 12.0;

  auto integrate = [&](int panels) {
    std::vector<double> nodes, weights;
    const double h = 2.0 * half_width / panels;
    const auto& abs = Rule::abscissa();
    const auto& wts = Rule::weights();
    for (int k = 0; k < panels; ++k) {
      const double mid = -half_width + (k + 0.5) * h;
      for (std::size_t i = 0; i < abs.size(); ++i) {
        // The stored rule is symmetric: nodes +/- abs[i] (abs[0] may be 0).
        nodes.push_back(mid + 0.5 * h * abs[i]);
        weights.push_back(0.5 * h * wts[i]);
        if (abs[i] != 0.0) {
          nodes.push_back(mid - 0.5 * h * abs[i]);
          weights.push_back(0.5 * h * wts[i]);
        }
      }
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < nodes.size(); ++j)
        row += weights[j] * fock_projector_wigner(n, nodes[i], nodes[j]) * squeezed_wigner(s, nodes[i], nodes[j]);
      sum += weights[i] * row;
    }
    return sum;
  };

  double previous = integrate(4);
  double change = std::numeric_limits<double>::infinity();
  for (int panels = 8; panels <= 128; panels *= 2) {
    const double current = integrate(panels);
    change = std::abs(current - previous);
    if (change <= tol) return current;
    previous = current;
  }
  throw QuadratureError("Wigner overlap quadrature did not converge", change);
}

/// The two-photon component splits with probability 1/2 at the beamsplitter.
inline ClickProbs clicks_from_fock(const FockProbs& f) {
  return {f.p1 + 0.5 * f.p2plus, 0.5 * f.p2plus};
}

/// Largest single-click probability of any mixture of coherent states with
/// coincidence probability pc.
inline double classical_bound_ps(double pc) {
  if (!(pc >= 0.0 && pc <= 1.0)) throw DomainError("classical_bound_ps: Pc must lie in [0,1]");
  return 2.0 * (std::sqrt(pc) - pc);
}

/// Inverse of classical_bound_ps on its rising branch (Ps <= 1/2).
inline double classical_bound_pc(double ps) {
  if (!(ps >= 0.0 && ps <= 0.5)) throw OutOfRangeError("classical_bound_pc: Ps outside [0, 0.5]", 0.0, 0.5);
  const double root = ps / (1.0 + std::sqrt(1.0 - 2.0 * ps));  // (1 - sqrt(1-2Ps))/2, stable
  return root * root;
}

namespace detail {

inline void threshold_terms(long double v, long double& ps, long double& pc) {
  const long double e = std::exp((v - 1.0L) / (2.0L * v));
  const long double d = std::sqrt(v) * (1.0L + v) * (1.0L + v);
  ps = 0.5L + (1.0L - v * (2.0L + v)) * e / d;
  pc = 0.5L - (1.0L + v * v) * e / d;
}

}  // namespace detail

/// Threshold point (Ps, Pc) parametrised by the squeezing variance V.
inline ClickProbs qng_threshold_point(double V) {
  if (!(V > 0.0 && V <= 1.0)) throw DomainError("qng_threshold_point: V must lie in (0, 1]");
  if (V == 1.0) return {0.0, 0.0};
  long double ps, pc;
  detail::threshold_terms(V, ps, pc);
  return {static_cast<double>(ps), static_cast<double>(pc)};
}

/// Ps(V) rises from V = 0, peaks at V = sqrt(5) - 2 and falls to 0 at V = 1.
/// The threshold curve is the falling branch.
inline constexpr double kThresholdBranchStart = 0.23606797749978969641;  // sqrt(5) - 2

class ThresholdCurve {
 public:
  ThresholdCurve() {
    constexpr int samples = 20000;
    double prev_ps = std::numeric_limits<double>::infinity();
    double prev_pc = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= samples; ++i) {
      const double v = kThresholdBranchStart + (1.0 - kThresholdBranchStart) * i / samples;
      const ClickProbs c = qng_threshold_point(v);
      if (!(c.ps < prev_ps) && i > 0) throw DomainError("threshold curve: Ps(V) not monotone on its branch");
      if (!(c.pc < prev_pc) && i > 0) throw DomainError("threshold curve: Pc(V) not monotone on its branch");
      prev_ps = c.ps;
      prev_pc = c.pc;
    }
    ps_max_ = qng_threshold_point(kThresholdBranchStart).ps;
  }

  double ps_max() const { return ps_max_; }

  /// Squeezing V on the branch with Ps(V) = ps.
  double solve_v(double ps) const {
    if (!(ps >= 0.0 && ps <= ps_max_))
      throw OutOfRangeError("Ps outside the attainable span of the QNG threshold curve [0, " +
                                std::to_string(ps_max_) + "]",
                            0.0, ps_max_);
    if (ps == 0.0) return 1.0;
    double lo = kThresholdBranchStart, hi = 1.0;  // Ps(lo) >= ps > Ps(hi)
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      if (qng_threshold_point(mid).ps >= ps) lo = mid; else hi = mid;
    }
    const double err_lo = std::abs(qng_threshold_point(lo).ps - ps);
    const double err_hi = std::abs(qng_threshold_point(hi).ps - ps);
    const double v = err_lo <= err_hi ? lo : hi;
    if (std::min(err_lo, err_hi) > 1e-12) throw DomainError("threshold bisection missed the 1e-12 Ps tolerance");
    return v;
  }

  double pc_at(double ps) const {
    const double v = solve_v(ps);
    return v == 1.0 ? 0.0 : qng_threshold_point(v).pc;
  }

 private:
  double ps_max_ = 0.0;
};

/// Shared curve, checked for monotonicity on first use.
inline const ThresholdCurve& threshold_curve() {
  static const ThresholdCurve curve;
  return curve;
}

/// Coincidence threshold Pc* at single-click probability ps.
inline double qng_threshold_pc(double ps) { return threshold_curve().pc_at(ps); }

struct QngVerdict {
  std::uint64_t n_triggers = 0;
  std::uint64_t n_single = 0;
  std::uint64_t n_coincidence = 0;
  ClickProbs measured;
  double sigma_ps = 0.0;
  double sigma_pc = 0.0;
  Interval ps_ci;
  Interval pc_ci;
  bool pc_one_sided = false;   // zero coincidences: pc_upper is the 95% one-sided limit
  double pc_upper = 0.0;
  double threshold_pc = 0.0;   // Pc* at the measured Ps
  bool violation = false;      // Pc < Pc*
  double distance_sd = 0.0;    // (Pc* - Pc) / sigma_Pc
  double classical_ps = 0.0;   // 2(sqrt(Pc) - Pc)
  bool nonclassical = false;   // Ps > classical bound
  double classical_distance_sd = 0.0;  // (Ps - bound) / sigma_Ps
};

/// Witness evaluation from exclusive-single and coincidence window counts.
inline QngVerdict evaluate_witness(std::uint64_t n_single, std::uint64_t n_coincidence, std::uint64_t n_triggers) {
  if (n_triggers == 0) throw DomainError("evaluate_witness: zero triggers");
  if (n_single + n_coincidence > n_triggers) throw DomainError("evaluate_witness: counts exceed trigger number");
  QngVerdict v;
  v.n_triggers = n_triggers;
  v.n_single = n_single;
  v.n_coincidence = n_coincidence;
  const double n = static_cast<double>(n_triggers);
  v.measured = {static_cast<double>(n_single) / n, static_cast<double>(n_coincidence) / n};
  v.sigma_ps = binomial_sigma(n_single, n_triggers);
  v.ps_ci = clopper_pearson(n_single, n_triggers);
  v.pc_ci = clopper_pearson(n_coincidence, n_triggers);
  v.pc_upper = clopper_pearson_upper(n_coincidence, n_triggers);
  if (n_coincidence == 0) {
    v.pc_one_sided = true;
    v.sigma_pc = std::sqrt(v.pc_upper * (1.0 - v.pc_upper) / n);
  } else {
    v.sigma_pc = binomial_sigma(n_coincidence, n_triggers);
  }
  v.threshold_pc = qng_threshold_pc(v.measured.ps);
  v.violation = v.measured.pc < v.threshold_pc;
  v.distance_sd = (v.threshold_pc - v.measured.pc) / v.sigma_pc;
  v.classical_ps = classical_bound_ps(v.measured.pc);
  v.nonclassical = v.measured.ps > v.classical_ps;
  v.classical_distance_sd = v.sigma_ps > 0.0 ? (v.measured.ps - v.classical_ps) / v.sigma_ps
                                              : (v.nonclassical ? std::numeric_limits<double>::infinity() : 0.0);
  return v;
}

}  // namespace ionphoton
