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
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "atom_model.hpp"
#include "constants.hpp"
#include "errors.hpp"
#include "spectroscopy.hpp"

namespace ionphoton {

struct ScanData {
  std::vector<double> detuning_hz;  // repump detuning
  std::vector<double> rate;         // counts/s
  std::vector<double> sigma;        // counts/s

  std::size_t size() const { return detuning_hz.size(); }

  /// Fills missing uncertainties with the Poisson estimate sqrt(rate * t)/t
  /// for an integration time t per point (floored at one count).
  void fill_poisson_sigma(double integration_time = 1.0) {
    sigma.resize(rate.size());
    for (std::size_t i = 0; i < rate.size(); ++i)
      sigma[i] = std::sqrt(std::max(rate[i] * integration_time, 1.0)) / integration_time;
  }

  void validate() const {
    if (detuning_hz.empty()) throw ConfigError("scan data is empty");
    if (rate.size() != detuning_hz.size() || sigma.size() != detuning_hz.size())
      throw ConfigError("scan data columns have unequal lengths");
    for (std::size_t i = 0; i < sigma.size(); ++i) {
      if (!(sigma[i] > 0.0) || !std::isfinite(sigma[i]))
        throw ConfigError("scan data uncertainty must be positive (row " + std::to_string(i + 1) + ")");
      if (!std::isfinite(rate[i]) || !std::isfinite(detuning_hz[i]))
        throw ConfigError("scan data value is not finite (row " + std::to_string(i + 1) + ")");
    }
  }
};

enum FitParam : std::size_t {
  kRabiCooling,      // rad/s
  kRabiRepump,       // rad/s
  kDetuningCooling,  // rad/s
  kPolTheta,         // rad, common polarization orientation from B
  kPolChi,           // rad, common ellipticity
  kFieldTesla,       // T
  kScale,            // detected counts per scattered detection-mode photon
  kBackground,       // counts/s
  kNumFitParams
};

inline const char* fit_param_name(std::size_t i) {
  static constexpr const char* names[kNumFitParams] = {"rabi_cooling", "rabi_repump", "detuning_cooling",
                                                        "pol_theta",    "pol_chi",     "b_field",
                                                        "scale",        "background"};
  return i < kNumFitParams ? names[i] : "?";
}

using FitVector = std::array<double, kNumFitParams>;
using FitMask = std::array<bool, kNumFitParams>;

/// Everything the model curve needs besides the fitted parameters.
struct ScanModel {
  LevelScheme scheme = build_level_scheme();
  Vec3 field_direction = Vec3::UnitZ();
  DetectionGeometry geometry = DetectionGeometry::full_collection();
  unsigned workers = 1;
};

/// Stationary detected rate of the physical model (before scale/background)
/// at repump detunings given in Hz.
inline std::vector<double> physical_curve(const ScanModel& model, const FitVector& p,
                                          const std::vector<double>& detuning_hz) {
  const SphericalVector pol = transverse_polarization(p[kPolTheta], p[kPolChi]);
  const LaserField cooling = LaserField::cooling(p[kRabiCooling], p[kDetuningCooling], pol);
  const LaserField repump = LaserField::repump(p[kRabiRepump], 0.0, pol);
  const FieldEnvironment env{p[kFieldTesla], model.field_direction};
  std::vector<double> grid(detuning_hz.size());
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = constants::kTwoPi * detuning_hz[i];
  const auto points = dark_resonance_scan(model.scheme, cooling, repump, env, grid, model.geometry, model.workers);
  std::vector<double> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!usable(points[i])) throw DomainError("model scan failed at point " + std::to_string(i) + ": " +
                                              points[i].issue.value_or("unknown"));
    out[i] = points[i].rate;
  }
  return out;
}

inline std::vector<double> model_curve(const ScanModel& model, const FitVector& p,
                                       const std::vector<double>& detuning_hz) {
  std::vector<double> c = physical_curve(model, p, detuning_hz);
  for (double& v : c) v = p[kScale] * v + p[kBackground];
  return c;
}

/// (measured - model) / sigma per point.
inline std::vector<double> fit_residuals(const ScanData& data, const ScanModel& model, const FitVector& p) {
  data.validate();
  const auto m = model_curve(model, p, data.detuning_hz);
  std::vector<double> r(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) r[i] = (data.rate[i] - m[i]) / data.sigma[i];
  return r;
}

struct FitOptions {
  FitMask free{true, true, true, false, false, false, true, true};
  FitVector lower{0.0, 0.0, -constants::kTwoPi * 1e9, -constants::kPi, -constants::kPi / 4, 0.0, 0.0,
                  -std::numeric_limits<double>::infinity()};
  FitVector upper{constants::kTwoPi * 1e9, constants::kTwoPi * 1e9, constants::kTwoPi * 1e9, constants::kPi,
                  constants::kPi / 4, 1.0, std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity()};
  int max_iterations = 200;
  double relative_step = 1e-6;  // central-difference step, relative to the parameter scale
  // Profile search over a free cooling detuning before the damped iteration:
  // dark-resonance dips are narrower than typical scan steps, so chi-square
  // has false minima in this direction. Span 0 disables the search.
  double detuning_search_span_hz = 3e6;
  double detuning_search_step_hz = 0.05e6;
};

struct FitResult {
  FitVector params{};
  FitVector uncertainty{};       // sqrt of the covariance diagonal (0 for fixed parameters)
  Eigen::MatrixXd covariance;    // kNumFitParams square; rows/columns of fixed parameters are zero
  double chi_square = 0.0;
  double reduced_chi_square = 0.0;
  std::size_t n_points = 0, n_free = 0;
  bool converged = false;
  bool singular_jacobian = false;
  int iterations = 0;
  std::vector<double> chi_square_history;  // accepted iterations only
  std::string message;
};

namespace detail {

inline double chi_square(const std::vector<double>& r) {
  double s = 0.0;
  for (double x : r) s += x * x;
  return s;
}

}  // namespace detail

/// Levenberg-Marquardt on the weighted residuals. The linear scale and
/// background are eliminated by variable projection: for every trial of the
/// physical parameters they take their weighted least-squares optimum, so the
/// damped iteration only moves the physical parameters (differenced
/// centrally). The covariance uses the full Jacobian at the optimum.
inline FitResult fit_dark_resonance(const ScanData& data, const ScanModel& model, const FitVector& guess,
                                    const FitOptions& options = {}) {
  data.validate();
  std::vector<std::size_t> free, nonlinear;
  for (std::size_t k = 0; k < kNumFitParams; ++k)
    if (options.free[k]) {
      free.push_back(k);
      if (k != kScale && k != kBackground) nonlinear.push_back(k);
    }
  if (free.empty()) throw ConfigError("fit mask leaves no free parameters");
  if (data.size() < 2 * free.size())
    throw ConfigError("fit needs at least twice as many points as free parameters");
  for (std::size_t k = 0; k < kNumFitParams; ++k)
    if (!(guess[k] >= options.lower[k] && guess[k] <= options.upper[k]))
      throw ConfigError(std::string("initial ") + fit_param_name(k) + " outside its bounds");

  const std::size_t m = data.size(), n = free.size(), nl = nonlinear.size();
  const bool free_scale = options.free[kScale], free_background = options.free[kBackground];
  FitVector scale{};
  const FitVector floor_scale{constants::kTwoPi * 1e5, constants::kTwoPi * 1e5, constants::kTwoPi * 1e5, 1e-2, 1e-2,
                              1e-6, 1e-12, 1.0};
  for (std::size_t k = 0; k < kNumFitParams; ++k) scale[k] = std::max(std::abs(guess[k]), floor_scale[k]);

  // Optimal free linear parameters for a given physical curve (bounded).
  auto project_linear = [&](FitVector& p, const std::vector<double>& phys) {
    if (!free_scale && !free_background) return;
    double sww = 0, swf = 0, swff = 0, swy = 0, swfy = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const double w = 1.0 / (data.sigma[i] * data.sigma[i]);
      sww += w;
      swf += w * phys[i];
      swff += w * phys[i] * phys[i];
      swy += w * data.rate[i];
      swfy += w * phys[i] * data.rate[i];
    }
    auto clamp_k = [&](std::size_t k, double v) { return std::clamp(v, options.lower[k], options.upper[k]); };
    if (free_scale && free_background) {
      const double det = swff * sww - swf * swf;
      if (det > 1e-300 * std::max(1.0, swff * sww)) {
        p[kScale] = clamp_k(kScale, (swfy * sww - swf * swy) / det);
        p[kBackground] = clamp_k(kBackground, (swy - p[kScale] * swf) / sww);
        p[kScale] = swff > 0 ? clamp_k(kScale, (swfy - p[kBackground] * swf) / swff) : p[kScale];
        return;
      }
    }
    if (free_scale && swff > 0) p[kScale] = clamp_k(kScale, (swfy - p[kBackground] * swf) / swff);
    if (free_background) p[kBackground] = clamp_k(kBackground, (swy - p[kScale] * swf) / sww);
  };

  auto residuals_of = [&](const FitVector& p, const std::vector<double>& phys) {
    std::vector<double> r(m);
    for (std::size_t i = 0; i < m; ++i) r[i] = (data.rate[i] - (p[kScale] * phys[i] + p[kBackground])) / data.sigma[i];
    return r;
  };

  // Profiled evaluation: physical curve, then optimal linear parameters.
  auto evaluate = [&](FitVector& p, std::vector<double>& phys) {
    phys = physical_curve(model, p, data.detuning_hz);
    project_linear(p, phys);
    return residuals_of(p, phys);
  };

  FitResult result;
  result.n_points = m;
  result.n_free = n;
  FitVector p = guess;
  std::vector<double> phys;
  std::vector<double> r = evaluate(p, phys);
  double chi2 = detail::chi_square(r);

  if (options.free[kDetuningCooling] && options.detuning_search_span_hz > 0.0 &&
      options.detuning_search_step_hz > 0.0) {
    const double span = constants::kTwoPi * options.detuning_search_span_hz;
    const double step = constants::kTwoPi * options.detuning_search_step_hz;
    const int half = static_cast<int>(std::floor(span / step));
    for (int i = -half; i <= half; ++i) {
      FitVector trial = p;
      trial[kDetuningCooling] = guess[kDetuningCooling] + i * step;
      if (i == 0 || trial[kDetuningCooling] < options.lower[kDetuningCooling] ||
          trial[kDetuningCooling] > options.upper[kDetuningCooling])
        continue;
      std::vector<double> trial_phys;
      std::vector<double> trial_r;
      try {
        trial_r = evaluate(trial, trial_phys);
      } catch (const DomainError&) {
        continue;
      }
      const double c = detail::chi_square(trial_r);
      if (c < chi2) p = trial, phys = std::move(trial_phys), r = std::move(trial_r), chi2 = c;
    }
  }
  result.chi_square_history.push_back(chi2);

  // Jacobian of the profiled residual with respect to the scaled nonlinear parameters.
  auto profiled_jacobian = [&](const FitVector& p0) {
    Eigen::MatrixXd J(m, nl);
    for (std::size_t c = 0; c < nl; ++c) {
      const std::size_t k = nonlinear[c];
      const double h = options.relative_step * scale[k];
      FitVector hi = p0, lo = p0;
      hi[k] = std::min(p0[k] + h, options.upper[k]);
      lo[k] = std::max(p0[k] - h, options.lower[k]);
      std::vector<double> tmp;
      const auto rh = evaluate(hi, tmp);
      const auto rl = evaluate(lo, tmp);
      // Model derivative = -(residual derivative); sign chosen so J^T r is the descent direction.
      for (std::size_t i = 0; i < m; ++i) J(i, c) = -(rh[i] - rl[i]) / (hi[k] - lo[k]) * scale[k];
    }
    return J;
  };

  int it = 0;
  if (nl == 0) {
    result.converged = true;
    result.message = "linear parameters solved in closed form";
  } else {
    double lambda = 1e-3;
    Eigen::MatrixXd J = profiled_jacobian(p);
    for (; it < options.max_iterations; ++it) {
      const Eigen::Map<const Eigen::VectorXd> rv(r.data(), m);
      const Eigen::MatrixXd A = J.transpose() * J;
      const Eigen::VectorXd g = J.transpose() * rv;
      if (g.cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, chi2)) {
        result.converged = true;
        result.message = "gradient below tolerance";
        break;
      }
      bool accepted = false;
      while (lambda < 1e16) {
        Eigen::MatrixXd Am = A;
        for (std::size_t c = 0; c < nl; ++c) Am(c, c) += lambda * std::max(A(c, c), 1e-12);
        const Eigen::VectorXd step = Am.ldlt().solve(g);
        FitVector trial = p;
        for (std::size_t c = 0; c < nl; ++c) {
          const std::size_t k = nonlinear[c];
          trial[k] = std::clamp(p[k] + step(c) * scale[k], options.lower[k], options.upper[k]);
        }
        std::vector<double> trial_phys, trial_r;
        try {
          trial_r = evaluate(trial, trial_phys);
        } catch (const DomainError&) {
          lambda *= 10.0;
          continue;
        }
        const double trial_chi2 = detail::chi_square(trial_r);
        if (trial_chi2 < chi2) {
          double max_rel_step = 0.0;
          for (std::size_t k : nonlinear) max_rel_step = std::max(max_rel_step, std::abs(trial[k] - p[k]) / scale[k]);
          const double decrease = chi2 - trial_chi2;
          p = trial;
          r = std::move(trial_r);
          phys = std::move(trial_phys);
          chi2 = trial_chi2;
          result.chi_square_history.push_back(chi2);
          lambda = std::max(lambda / 10.0, 1e-12);
          accepted = true;
          if (decrease <= 1e-10 * chi2 || max_rel_step < 1e-10) {
            result.converged = true;
            result.message = "objective change below tolerance";
          }
          break;
        }
        lambda *= 10.0;
      }
      if (!accepted) {
        result.converged = true;
        result.message = "no further decrease possible";
        break;
      }
      if (result.converged) {
        ++it;
        break;
      }
      J = profiled_jacobian(p);
    }
    if (!result.converged) result.message = "iteration cap reached; best parameters so far";
  }
  result.iterations = it;
  result.params = p;
  result.chi_square = chi2;
  result.reduced_chi_square = m > n ? chi2 / static_cast<double>(m - n) : 0.0;

  // Full Jacobian of the model / sigma in scaled coordinates at the optimum.
  Eigen::MatrixXd Js(m, n);
  for (std::size_t c = 0; c < n; ++c) {
    const std::size_t k = free[c];
    if (k == kScale) {
      for (std::size_t i = 0; i < m; ++i) Js(i, c) = phys[i] / data.sigma[i] * scale[k];
    } else if (k == kBackground) {
      for (std::size_t i = 0; i < m; ++i) Js(i, c) = 1.0 / data.sigma[i] * scale[k];
    } else {
      const double h = options.relative_step * scale[k];
      FitVector hi = p, lo = p;
      hi[k] = std::min(p[k] + h, options.upper[k]);
      lo[k] = std::max(p[k] - h, options.lower[k]);
      const auto fh = physical_curve(model, hi, data.detuning_hz);
      const auto fl = physical_curve(model, lo, data.detuning_hz);
      for (std::size_t i = 0; i < m; ++i)
        Js(i, c) = p[kScale] * (fh[i] - fl[i]) / (hi[k] - lo[k]) / data.sigma[i] * scale[k];
    }
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Js);
  qr.setThreshold(1e-10);
  Eigen::MatrixXd cov_s;
  if (qr.rank() < static_cast<Eigen::Index>(n)) {
    result.singular_jacobian = true;
    result.message += "; Jacobian is rank deficient, covariance from pseudo-inverse";
    cov_s = (Js.transpose() * Js).completeOrthogonalDecomposition().pseudoInverse();
  } else {
    cov_s = (Js.transpose() * Js).inverse();
  }
  cov_s = 0.5 * (cov_s + cov_s.transpose()).eval();
  result.covariance = Eigen::MatrixXd::Zero(kNumFitParams, kNumFitParams);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      result.covariance(static_cast<Eigen::Index>(free[a]), static_cast<Eigen::Index>(free[b])) =
          cov_s(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) * scale[free[a]] * scale[free[b]];
  for (std::size_t k = 0; k < kNumFitParams; ++k)
    result.uncertainty[k] = std::sqrt(std::max(0.0, result.covariance(static_cast<Eigen::Index>(k),
                                                                        static_cast<Eigen::Index>(k))));
  return result;
}

}  // namespace ionphoton
