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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ionphoton/atom_model.hpp"
#include "ionphoton/constants.hpp"
#include "ionphoton/errors.hpp"

namespace ionphoton {

/// Non-zero entry (row, col, value) of a small sparse operator.
struct OperatorEntry {
  Eigen::Index row;
  Eigen::Index col;
  Complex value;
};

/// A laser drive: H(upper, lower) += (rabi / 2) * envelope(t) * value, plus
/// the Hermitian conjugate.
struct DriveTerm {
  std::size_t laser;
  std::vector<OperatorEntry> couplings;
};

/// Generic few-level open system in the rotating frame of its lasers. The
/// eight-level ion is one instance; hand-built two- and three-level systems
/// are others. Frequencies in rad/s.
struct LevelSystem {
  Eigen::Index dim = 0;
  std::vector<double> shift;          // static energy of each level
  std::vector<int> detuning_of;       // laser whose detuning adds to the level energy, or -1
  std::vector<DriveTerm> drives;
  std::vector<std::vector<OperatorEntry>> jumps;  // collapse operators, sqrt(rate) included
};

/// Ion level structure plus lasers in one rotating frame per laser: S levels
/// sit at Delta_g + Zeeman, D levels at Delta_r + Zeeman, P levels at Zeeman.
inline LevelSystem atomic_system(const LevelScheme& scheme, const std::vector<LaserField>& lasers,
                                 const FieldEnvironment& env) {
  env.validate();
  const auto n = static_cast<Eigen::Index>(scheme.levels.size());
  LevelSystem sys;
  sys.dim = n;
  sys.shift.resize(n);
  sys.detuning_of.assign(n, -1);
  for (Eigen::Index i = 0; i < n; ++i) sys.shift[i] = zeeman_shift(scheme, scheme.levels[i], env);

  for (std::size_t k = 0; k < lasers.size(); ++k) {
    const LaserField& laser = lasers[k];
    laser.validate();
    DriveTerm drive{k, {}};
    for (Eigen::Index l = 0; l < n; ++l) {
      const Level& lo = scheme.levels[l];
      if (lo.manifold != laser.lower) continue;
      if (sys.detuning_of[l] >= 0 && sys.detuning_of[l] != static_cast<int>(k))
        throw ConfigError(std::string("two lasers address the ") + to_string(lo.manifold) +
                          " manifold; only one rotating frame per manifold is supported");
      sys.detuning_of[l] = static_cast<int>(k);
      for (Eigen::Index u = 0; u < n; ++u) {
        const Level& up = scheme.levels[u];
        if (up.manifold != laser.upper) continue;
        const int dq = up.m2 - lo.m2;
        if (std::abs(dq) > 2) continue;
        const Complex amp = laser.polarization[dq / 2 + 1] * dipole_coupling(lo, up, dq / 2);
        if (amp != Complex(0.0)) drive.couplings.push_back({u, l, amp});
      }
    }
    sys.drives.push_back(std::move(drive));
  }

  // One collapse operator per (channel, q) keeps the coherence transfer between
  // sublevels that decay through the same polarization.
  for (const auto& [lower, channel] : {std::pair{Manifold::kS12, DecayChannel::kPtoS},
                                      std::pair{Manifold::kD32, DecayChannel::kPtoD}}) {
    const double root = std::sqrt(scheme.gamma(channel));
    for (int q = -1; q <= 1; ++q) {
      std::vector<OperatorEntry> jump;
      for (Eigen::Index u = 0; u < n; ++u) {
        if (scheme.levels[u].manifold != Manifold::kP12) continue;
        for (Eigen::Index l = 0; l < n; ++l) {
          const Level& lo = scheme.levels[l];
          if (lo.manifold != lower || scheme.levels[u].m2 - lo.m2 != 2 * q) continue;
          const double c = dipole_coupling(lo, scheme.levels[u], q);
          if (c != 0.0) jump.push_back({l, u, root * c});
        }
      }
      if (!jump.empty()) sys.jumps.push_back(std::move(jump));
    }
  }
  return sys;
}

/// 8x8 (or n x n) density matrix with its physical invariants.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(Eigen::MatrixXcd rho) : rho_(std::move(rho)) {}

  static DensityMatrix pure(Eigen::Index dim, Eigen::Index level) {
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(dim, dim);
    r(level, level) = 1.0;
    return DensityMatrix(std::move(r));
  }

  /// Equal incoherent mixture of the given levels.
  static DensityMatrix mixture(Eigen::Index dim, const std::vector<Eigen::Index>& levels) {
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(dim, dim);
    for (auto i : levels) r(i, i) = 1.0 / static_cast<double>(levels.size());
    return DensityMatrix(std::move(r));
  }

  const Eigen::MatrixXcd& matrix() const { return rho_; }
  Eigen::Index dim() const { return rho_.rows(); }
  Complex operator()(Eigen::Index i, Eigen::Index j) const { return rho_(i, j); }

  double trace() const { return rho_.trace().real(); }
  double hermiticity_defect() const { return (rho_ - rho_.adjoint()).norm(); }
  double min_eigenvalue() const {
    const Eigen::MatrixXcd h = 0.5 * (rho_ + rho_.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

  bool is_valid(double trace_tol = 1e-9, double herm_tol = 1e-10, double psd_tol = 1e-10) const {
    return std::abs(trace() - 1.0) <= trace_tol && hermiticity_defect() < herm_tol &&
           min_eigenvalue() > -psd_tol;
  }

  Eigen::VectorXcd vectorized() const {
    return Eigen::Map<const Eigen::VectorXcd>(rho_.data(), rho_.size());
  }
  static DensityMatrix from_vector(const Eigen::VectorXcd& v, Eigen::Index dim) {
    return DensityMatrix(Eigen::Map<const Eigen::MatrixXcd>(v.data(), dim, dim));
  }

 private:
  Eigen::MatrixXcd rho_;
};

/// Generator of d vec(rho)/dt for column-stacked vec(rho), in rad per solver
/// time unit (1 us). Time-dependent generators keep the envelope-modulated
/// drive parts separately: L(t) = fixed + sum_k envelope_k(t) * modulated_k.
class Liouvillian {
 public:
  struct Modulated {
    Envelope envelope;
    Eigen::MatrixXcd generator;
  };

  Liouvillian() = default;
  Liouvillian(Eigen::Index dim, Eigen::MatrixXcd fixed, std::vector<Modulated> modulated = {},
              double max_frequency = 0.0)
      : dim_(dim), fixed_(std::move(fixed)), modulated_(std::move(modulated)),
        max_frequency_(max_frequency) {}

  Eigen::Index dim() const { return dim_; }
  bool is_static() const { return modulated_.empty(); }
  const Eigen::MatrixXcd& fixed() const { return fixed_; }
  const std::vector<Modulated>& modulated() const { return modulated_; }
  /// Largest angular frequency in the generator, rad/s.
  double max_frequency() const { return max_frequency_; }

  /// Generator at time t (seconds); equals fixed() for static generators.
  Eigen::MatrixXcd at(double t) const {
    Eigen::MatrixXcd l = fixed_;
    for (const auto& m : modulated_) l += m.envelope(t) * m.generator;
    return l;
  }

  /// Static copy with every envelope frozen at time t.
  Liouvillian frozen(double t) const { return Liouvillian(dim_, at(t), {}, max_frequency_); }

  /// Row functional vec(rho) -> d tr(rho)/dt at time t; zero for any Lindblad form.
  Eigen::RowVectorXcd trace_functional(double t = 0.0) const {
    Eigen::RowVectorXcd tr = Eigen::RowVectorXcd::Zero(dim_ * dim_);
    for (Eigen::Index i = 0; i < dim_; ++i) tr(i + dim_ * i) = 1.0;
    return tr * at(t);
  }

 private:
  Eigen::Index dim_ = 0;
  Eigen::MatrixXcd fixed_;
  std::vector<Modulated> modulated_;
  double max_frequency_ = 0.0;
};

namespace detail {

inline Eigen::MatrixXcd dense(Eigen::Index n, const std::vector<OperatorEntry>& entries) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& e : entries) m(e.row, e.col) += e.value;
  return m;
}

// -i [H, .] as a superoperator on column-stacked vectors.
inline Eigen::MatrixXcd commutator_superop(const Eigen::MatrixXcd& h) {
  const Eigen::Index n = h.rows();
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  Eigen::MatrixXcd out(n * n, n * n);
  // vec(A X B) = (B^T kron A) vec(X)
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b)
      out.block(a * n, b * n, n, n) = id(b, a) * h - h(b, a) * id;
  return Complex(0.0, -1.0) * out;
}

inline Eigen::MatrixXcd dissipator_superop(const Eigen::MatrixXcd& j) {
  const Eigen::Index n = j.rows();
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  const Eigen::MatrixXcd jdj = j.adjoint() * j;
  const Eigen::MatrixXcd jc = j.conjugate();
  Eigen::MatrixXcd out(n * n, n * n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b)
      out.block(a * n, b * n, n, n) =
          jc(a, b) * j - 0.5 * id(a, b) * jdj - 0.5 * jdj(b, a) * id;
  return out;
}

}  // namespace detail

/// Lindblad generator -i[H, .] + sum_k D[J_k] for explicit operators in rad/s.
inline Eigen::MatrixXcd lindblad_generator(const Eigen::MatrixXcd& hamiltonian,
                                           const std::vector<Eigen::MatrixXcd>& jumps) {
  Eigen::MatrixXcd l = detail::commutator_superop(hamiltonian);
  for (const auto& j : jumps) l += detail::dissipator_superop(j);
  return l;
}

/// Builds the generator of a level system for the given lasers. With a time
/// the envelopes are evaluated there and the result is static; without one,
/// lasers with non-constant envelopes stay time dependent.
inline Liouvillian build_liouvillian(const LevelSystem& sys, const std::vector<LaserField>& lasers,
                                     std::optional<double> t = std::nullopt) {
  const Eigen::Index n = sys.dim;
  const double unit = constants::kSolverTimeUnit;
  double max_freq = 0.0;

  Eigen::MatrixXcd h_fixed = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double e = sys.shift[i];
    if (sys.detuning_of[i] >= 0) e += lasers.at(sys.detuning_of[i]).detuning;
    h_fixed(i, i) = e;
    max_freq = std::max(max_freq, std::abs(e));
  }

  std::vector<Liouvillian::Modulated> modulated;
  for (const DriveTerm& drive : sys.drives) {
    const LaserField& laser = lasers.at(drive.laser);
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
    for (const auto& c : drive.couplings) {
      const Complex v = 0.5 * laser.rabi * c.value;
      h(c.row, c.col) += v;
      h(c.col, c.row) += std::conj(v);
    }
    max_freq = std::max(max_freq, laser.rabi);
    if (t || laser.envelope.is_constant()) {
      h_fixed += laser.envelope(t.value_or(0.0)) * h;
    } else {
      modulated.push_back({laser.envelope, detail::commutator_superop(unit * h)});
    }
  }

  std::vector<Eigen::MatrixXcd> jumps;
  for (const auto& entries : sys.jumps) {
    jumps.push_back(std::sqrt(unit) * detail::dense(n, entries));
    for (const auto& e : entries) max_freq = std::max(max_freq, std::norm(e.value));
  }
  return Liouvillian(n, lindblad_generator(unit * h_fixed, jumps), std::move(modulated), max_freq);
}

/// Eight-level ion generator for the given lasers and field.
inline Liouvillian build_liouvillian(const LevelScheme& scheme, const std::vector<LaserField>& lasers,
                                     const FieldEnvironment& env,
                                     std::optional<double> t = std::nullopt) {
  return build_liouvillian(atomic_system(scheme, lasers, env), lasers, t);
}

/// Stationary state from the bordered system [L; tr] x = [0; 1]. A null space
/// of dimension above one is reported, never averaged.
inline DensityMatrix steady_state(const Liouvillian& generator) {
  if (!generator.is_static())
    throw DomainError("steady state requires a static Liouvillian (freeze the envelopes first)");
  const Eigen::Index n = generator.dim();
  const Eigen::Index n2 = n * n;

  // Fast path: the row of L for rho(0,0) is minus the sum of the other
  // diagonal rows, so swapping it for the trace row keeps the information and
  // gives a square system that is regular exactly when the null space is 1-D.
  {
    Eigen::MatrixXcd square = generator.fixed();
    square.row(0).setZero();
    for (Eigen::Index i = 0; i < n; ++i) square(0, i + n * i) = 1.0;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(square);
    // rcond() alone is unreliable for exactly singular input (zero pivots).
    const Eigen::VectorXd pivots = lu.matrixLU().diagonal().cwiseAbs();
    Eigen::VectorXcd x;
    bool regular = pivots.minCoeff() > 1e-12 * pivots.maxCoeff() && lu.rcond() > 1e-10;
    if (regular) {
      Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n2);
      rhs(0) = 1.0;
      x = lu.solve(rhs);
      regular = x.allFinite();
    }
    if (regular) {
      Eigen::MatrixXcd rho = Eigen::Map<Eigen::MatrixXcd>(x.data(), n, n);
      rho = 0.5 * (rho + rho.adjoint()).eval();
      rho /= rho.trace().real();
      return DensityMatrix(std::move(rho));
    }
  }

  Eigen::MatrixXcd bordered(n2 + 1, n2);
  bordered.topRows(n2) = generator.fixed();
  bordered.row(n2).setZero();
  for (Eigen::Index i = 0; i < n; ++i) bordered(n2, i + n * i) = 1.0;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(bordered);
  qr.setThreshold(1e-11);
  if (qr.rank() < n2) throw AmbiguousSteadyStateError(static_cast<std::size_t>(n2 + 1 - qr.rank()));

  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n2 + 1);
  rhs(n2) = 1.0;
  Eigen::VectorXcd x = qr.solve(rhs);
  Eigen::MatrixXcd rho = Eigen::Map<Eigen::MatrixXcd>(x.data(), n, n);
  rho = 0.5 * (rho + rho.adjoint()).eval();
  rho /= rho.trace().real();
  return DensityMatrix(std::move(rho));
}

/// Orthonormal basis of the generator's null space (via SVD); used to decide
/// what is still unambiguous when the stationary state is not unique.
inline Eigen::MatrixXcd stationary_subspace(const Liouvillian& generator, double rel_tol = 1e-10) {
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(generator.fixed(), Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double cutoff = rel_tol * std::max(1.0, s(0));
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > cutoff) ++rank;
  return svd.matrixV().rightCols(s.size() - rank);
}

/// Residual ||L vec(rho)|| in solver units.
inline double stationarity_residual(const Liouvillian& generator, const DensityMatrix& rho) {
  return (generator.fixed() * rho.vectorized()).norm();
}

/// Detected photon rate Tr(M rho) in 1/s for a detection operator M.
inline double scattering_rate(const DensityMatrix& rho, const Eigen::MatrixXcd& detection) {
  return (detection * rho.matrix()).trace().real();
}

inline double scattering_rate(const DensityMatrix& rho, const LevelScheme& scheme,
                              const DetectionGeometry& geometry, const FieldEnvironment& env) {
  return scattering_rate(rho, detection_operator(scheme, geometry, env));
}

}  // namespace ionphoton
