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
#include <cstddef>
#include <span>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "ionphoton/bloch_solver.hpp"
#include "ionphoton/constants.hpp"
#include "ionphoton/errors.hpp"

namespace ionphoton {

struct EvolveOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  // Upper bound on the step in seconds; by default 1/(20 f_max) where f_max is
  // the largest Zeeman, detuning, Rabi or decay frequency in the generator.
  std::optional<double> max_step;
  std::size_t max_steps_between_outputs = 20'000'000;
};

/// Integrates d vec(rho)/dt = L(t) vec(rho) with an adaptive Dormand-Prince
/// 5(4) pair. rho0 is the state at t_grid.front(); the returned trajectory
/// has one entry per grid point.
inline std::vector<DensityMatrix> evolve(const DensityMatrix& rho0, const Liouvillian& generator,
                                         std::span<const double> t_grid,
                                         const EvolveOptions& options = {}) {
  namespace odeint = boost::numeric::odeint;
  using State = std::vector<double>;

  const Eigen::Index n = generator.dim();
  if (rho0.dim() != n) throw DomainError("initial state dimension does not match the Liouvillian");
  if (t_grid.empty()) return {};
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1])) throw DomainError("time grid must be strictly increasing");

  const double unit = constants::kSolverTimeUnit;
  std::vector<double> times(t_grid.size());
  std::transform(t_grid.begin(), t_grid.end(), times.begin(), [unit](double t) { return t / unit; });

  const double span = times.back() - times.front();
  double max_dt = options.max_step ? *options.max_step / unit : 0.0;
  if (!options.max_step) {
    const double f_max = generator.max_frequency() / constants::kTwoPi;  // Hz
    max_dt = f_max > 0.0 ? 1.0 / (20.0 * f_max) / unit : std::max(span, 1.0);
  }

  const Eigen::Index n2 = n * n;
  State x(2 * static_cast<std::size_t>(n2));
  {
    const Eigen::VectorXcd v = rho0.vectorized();
    std::copy_n(reinterpret_cast<const double*>(v.data()), x.size(), x.begin());
  }

  const bool is_static = generator.is_static();
  auto rhs = [&](const State& s, State& ds, double t) {
    Eigen::Map<const Eigen::VectorXcd> in(reinterpret_cast<const Complex*>(s.data()), n2);
    Eigen::Map<Eigen::VectorXcd> out(reinterpret_cast<Complex*>(ds.data()), n2);
    out.noalias() = generator.fixed() * in;
    if (!is_static)
      for (const auto& m : generator.modulated()) {
        const double a = m.envelope(t * unit);
        if (a != 0.0) out.noalias() += a * (m.generator * in);
      }
  };

  std::vector<DensityMatrix> trajectory;
  trajectory.reserve(times.size());
  double t_reached = times.front();
  auto observer = [&](const State& s, double t) {
    Eigen::Map<const Eigen::VectorXcd> v(reinterpret_cast<const Complex*>(s.data()), n2);
    trajectory.push_back(DensityMatrix::from_vector(v, n));
    t_reached = t;
  };

  if (times.size() == 1) {
    observer(x, times.front());
    return trajectory;
  }

  try {
    auto stepper = odeint::make_dense_output(options.abs_tol, options.rel_tol, max_dt,
                                             odeint::runge_kutta_dopri5<State>());
    const double dt0 = std::min(max_dt, (times[1] - times[0]));
    odeint::integrate_times(stepper, rhs, x, times.begin(), times.end(), dt0, observer,
                            odeint::max_step_checker(options.max_steps_between_outputs));
  } catch (const std::exception& e) {
    throw IntegrationError(std::string("time integration failed: ") + e.what(), t_reached * unit);
  }
  for (const auto& rho : trajectory)
    if (!std::isfinite(rho.trace()))
      throw IntegrationError("time integration produced non-finite values", t_reached * unit);
  return trajectory;
}

}  // namespace ionphoton
