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

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ionphoton/angular_momentum.hpp"
#include "ionphoton/constants.hpp"
#include "ionphoton/errors.hpp"

namespace ionphoton {

using Complex = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using Vec3c = Eigen::Vector3cd;

enum class Manifold { kS12, kP12, kD32 };

inline int twice_j(Manifold m) { return m == Manifold::kD32 ? 3 : 1; }

inline const char* to_string(Manifold m) {
  switch (m) {
    case Manifold::kS12: return "S1/2";
    case Manifold::kP12: return "P1/2";
    case Manifold::kD32: return "D3/2";
  }
  return "?";
}

struct Level {
  Manifold manifold;
  int m2;  // twice m_J

  double m_j() const { return 0.5 * m2; }
  friend bool operator==(const Level&, const Level&) = default;
};

enum class DecayChannel { kPtoS, kPtoD };

// Index order used by every density matrix in the library.
inline constexpr std::size_t kNumLevels = 8;
inline constexpr std::array<Level, kNumLevels> kLevelOrder = {{
    {Manifold::kS12, -1}, {Manifold::kS12, +1},
    {Manifold::kP12, -1}, {Manifold::kP12, +1},
    {Manifold::kD32, -3}, {Manifold::kD32, -1}, {Manifold::kD32, +1}, {Manifold::kD32, +3},
}};

// Optional overrides for the atomic constants. Rates in rad/s, lengths in m.
struct AtomicConstants {
  std::optional<double> lande_s, lande_p, lande_d;
  std::optional<double> gamma_p_to_s, gamma_p_to_d;
  std::optional<double> wavelength_p_to_s, wavelength_p_to_d;
};

struct LevelScheme {
  std::array<Level, kNumLevels> levels = kLevelOrder;
  std::array<double, 3> lande{};        // indexed by Manifold
  std::array<double, 2> decay_rate{};   // indexed by DecayChannel, rad/s
  std::array<double, 2> wavelength{};   // indexed by DecayChannel, m

  double lande_g(Manifold m) const { return lande[static_cast<std::size_t>(m)]; }
  double gamma(DecayChannel c) const { return decay_rate[static_cast<std::size_t>(c)]; }
  double gamma_total() const { return decay_rate[0] + decay_rate[1]; }

  std::size_t index_of(const Level& level) const {
    for (std::size_t i = 0; i < levels.size(); ++i)
      if (levels[i] == level) return i;
    throw ConfigError(std::string("level not in scheme: ") + to_string(level.manifold) +
                      " m2=" + std::to_string(level.m2));
  }
};

/// Ba+ 138 defaults (Landé factors and P1/2 partial widths from the standard
/// literature values), with any override applied on top.
inline LevelScheme build_level_scheme(const AtomicConstants& overrides = {}) {
  auto pick = [](const std::optional<double>& v, double fallback, const char* name) {
    if (v && !(*v > 0.0))
      throw ConfigError(std::string("atomic constant '") + name + "' must be positive");
    return v.value_or(fallback);
  };
  LevelScheme scheme;
  scheme.lande = {pick(overrides.lande_s, 2.0023, "lande_s"),
                  pick(overrides.lande_p, 2.0 / 3.0, "lande_p"),
                  pick(overrides.lande_d, 4.0 / 5.0, "lande_d")};
  scheme.decay_rate = {pick(overrides.gamma_p_to_s, constants::kTwoPi * 15.1e6, "gamma_p_to_s"),
                       pick(overrides.gamma_p_to_d, constants::kTwoPi * 5.3e6, "gamma_p_to_d")};
  scheme.wavelength = {pick(overrides.wavelength_p_to_s, 493.4e-9, "wavelength_p_to_s"),
                       pick(overrides.wavelength_p_to_d, 649.7e-9, "wavelength_p_to_d")};
  return scheme;
}

struct FieldEnvironment {
  double b_tesla = 0.0;
  Vec3 direction = Vec3::UnitZ();

  void validate() const {
    if (!(b_tesla >= 0.0)) throw ConfigError("magnetic field magnitude must be >= 0");
    if (std::abs(direction.norm() - 1.0) > 1e-12)
      throw ConfigError("magnetic field direction must be a unit vector");
  }
};

/// Linear Zeeman shift g_J m_J mu_B B / hbar in rad/s.
inline double zeeman_shift(const LevelScheme& scheme, const Level& level, const FieldEnvironment& env) {
  return scheme.lande_g(level.manifold) * level.m_j() * constants::kBohrMagneton * env.b_tesla /
         constants::kHbar;
}

/// Clebsch-Gordan amplitude <J_l m_l; 1 q | J_u m_u> for a dipole-allowed
/// pair, lower in {S1/2, D3/2} and upper in P1/2.
inline double dipole_coupling(const Level& lower, const Level& upper, int q) {
  const bool allowed = upper.manifold == Manifold::kP12 &&
                       (lower.manifold == Manifold::kS12 || lower.manifold == Manifold::kD32);
  if (!allowed)
    throw InvalidTransitionError(std::string("no dipole coupling between ") +
                                 to_string(lower.manifold) + " and " + to_string(upper.manifold));
  if (q < -1 || q > 1) throw InvalidTransitionError("polarization component q must be -1, 0 or +1");
  return clebsch_gordan({twice_j(lower.manifold), lower.m2}, {2, 2 * q},
                        {twice_j(upper.manifold), upper.m2});
}

inline double dipole_coupling(const LevelScheme&, const Level& lower, const Level& upper, int q) {
  return dipole_coupling(lower, upper, q);
}

// Spherical components (sigma-, pi, sigma+) relative to the quantization axis,
// stored at index q + 1.
using SphericalVector = std::array<Complex, 3>;

inline double norm(const SphericalVector& v) {
  return std::sqrt(std::norm(v[0]) + std::norm(v[1]) + std::norm(v[2]));
}

/// Polarization of a beam travelling perpendicular to the quantization axis,
/// given by the orientation of its major axis measured from B (theta) and its
/// ellipticity angle (chi). theta = 0 is pure pi light, theta = pi/2 drives
/// sigma+ and sigma- equally.
inline SphericalVector transverse_polarization(double theta, double chi) {
  const Complex i(0.0, 1.0);
  const Complex along_b = std::cos(theta) * std::cos(chi) - i * std::sin(theta) * std::sin(chi);
  const Complex across = std::sin(theta) * std::cos(chi) + i * std::cos(theta) * std::sin(chi);
  const Complex sigma = i * across / std::sqrt(2.0);
  return {sigma, along_b, sigma};
}

/// Time envelope of a laser amplitude, values confined to [0, 1].
class Envelope {
 public:
  enum class Shape { kConstant, kErfRamp, kLinearRamp, kCustom };

  static Envelope constant(double value = 1.0) {
    if (!(value >= 0.0 && value <= 1.0)) throw ConfigError("envelope value must lie in [0, 1]");
    Envelope e;
    e.shape_ = Shape::kConstant;
    e.value_ = value;
    return e;
  }

  // Smooth switch-on reaching 50% at t_half with the given 10-90% rise time.
  static Envelope ramp(Shape shape, double t_half, double rise_10_90) {
    if (shape != Shape::kErfRamp && shape != Shape::kLinearRamp)
      throw ConfigError("ramp envelope needs an erf or linear shape");
    if (!(rise_10_90 > 0.0)) throw ConfigError("envelope rise time must be positive");
    Envelope e;
    e.shape_ = shape;
    e.t_half_ = t_half;
    e.rise_ = rise_10_90;
    return e;
  }

  static Envelope custom(std::function<double(double)> f) {
    Envelope e;
    e.shape_ = Shape::kCustom;
    e.fn_ = std::move(f);
    return e;
  }

  bool is_constant() const { return shape_ == Shape::kConstant; }
  Shape shape() const { return shape_; }
  double t_half() const { return t_half_; }
  double rise_time() const { return rise_; }

  double operator()(double t) const {
    switch (shape_) {
      case Shape::kConstant:
        return value_;
      case Shape::kErfRamp: {
        // 10-90% of a Gaussian CDF spans 2 * 1.2815515655446004 sigma
        const double sigma = rise_ / (2.0 * 1.2815515655446004);
        return 0.5 * std::erfc(-(t - t_half_) / (sigma * std::sqrt(2.0)));
      }
      case Shape::kLinearRamp: {
        const double full = rise_ / 0.8;
        const double x = (t - t_half_) / full + 0.5;
        return x <= 0.0 ? 0.0 : (x >= 1.0 ? 1.0 : x);
      }
      case Shape::kCustom: {
        const double v = fn_(t);
        if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("envelope value outside [0, 1]");
        return v;
      }
    }
    return 0.0;
  }

 private:
  Shape shape_ = Shape::kConstant;
  double value_ = 1.0;
  double t_half_ = 0.0;
  double rise_ = 0.0;
  std::function<double(double)> fn_;
};

struct LaserField {
  Manifold lower = Manifold::kS12;
  Manifold upper = Manifold::kP12;
  double rabi = 0.0;      // rad/s
  double detuning = 0.0;  // rad/s, laser minus zero-field atomic frequency
  SphericalVector polarization{Complex(0), Complex(1), Complex(0)};
  Envelope envelope = Envelope::constant();

  static LaserField cooling(double rabi, double detuning, SphericalVector pol,
                            Envelope env = Envelope::constant()) {
    return {Manifold::kS12, Manifold::kP12, rabi, detuning, pol, std::move(env)};
  }
  static LaserField repump(double rabi, double detuning, SphericalVector pol,
                           Envelope env = Envelope::constant()) {
    return {Manifold::kD32, Manifold::kP12, rabi, detuning, pol, std::move(env)};
  }

  void validate() const {
    const bool allowed = upper == Manifold::kP12 &&
                         (lower == Manifold::kS12 || lower == Manifold::kD32);
    if (!allowed)
      throw InvalidTransitionError(std::string("laser addresses a disallowed transition ") +
                                   to_string(lower) + " <-> " + to_string(upper));
    if (std::abs(norm(polarization) - 1.0) > 1e-12)
      throw ConfigError("laser polarization must have unit norm");
    if (!(rabi >= 0.0)) throw ConfigError("Rabi frequency must be >= 0");
  }
};

// Orthonormal frame with z along B. The azimuth of x is a fixed function of
// the field direction; observables do not depend on it.
struct FieldFrame {
  Vec3 x, y, z;

  explicit FieldFrame(const Vec3& b_direction) {
    z = b_direction.normalized();
    Eigen::Index axis = 0;
    z.cwiseAbs().minCoeff(&axis);
    Vec3 trial = Vec3::Unit(axis);
    x = (trial - trial.dot(z) * z).normalized();
    y = z.cross(x);
  }

  /// Components e_q^* . v of a lab-frame vector, index q + 1.
  SphericalVector spherical(const Vec3c& v) const {
    const Complex vx = x.cast<Complex>().dot(v);  // Eigen dot conjugates the left side (real here)
    const Complex vy = y.cast<Complex>().dot(v);
    const Complex vz = z.cast<Complex>().dot(v);
    const Complex i(0.0, 1.0);
    return {(vx + i * vy) / std::sqrt(2.0), vz, -(vx - i * vy) / std::sqrt(2.0)};
  }
};

struct DetectionGeometry {
  Vec3 direction = Vec3::UnitX();
  Vec3c analyzer = Vec3c(0, 0, 1);
  double efficiency = 1.0;  // fraction of the total emission captured by the mode
  bool all_modes = false;   // collect every direction and polarization

  static DetectionGeometry full_collection(double efficiency = 1.0) {
    DetectionGeometry g;
    g.all_modes = true;
    g.efficiency = efficiency;
    return g;
  }

  void validate() const {
    if (!(efficiency >= 0.0 && efficiency <= 1.0))
      throw ConfigError("collection efficiency must lie in [0, 1]");
    if (all_modes) return;
    if (std::abs(direction.norm() - 1.0) > 1e-12)
      throw ConfigError("observation direction must be a unit vector");
    if (std::abs(analyzer.norm() - 1.0) > 1e-12)
      throw ConfigError("polarization analyzer must be a unit vector");
    if (std::abs(direction.cast<Complex>().dot(analyzer)) > 1e-9)
      throw ConfigError("polarization analyzer must be transverse to the observation direction");
  }
};

/// Complex amplitude of the P->S decay u -> l radiated into the analyzed
/// mode: C(l, u, q) times the analyzer overlap with the spherical unit vector
/// e_q of the transition dipole.
inline Complex emission_amplitude(const Level& lower, const Level& upper,
                                  const SphericalVector& analyzer_components) {
  const int dq = upper.m2 - lower.m2;
  if (dq % 2 != 0 || std::abs(dq) > 2) return 0.0;
  const int q = dq / 2;
  return dipole_coupling(lower, upper, q) * std::conj(analyzer_components[q + 1]);
}

struct EmissionWeight {
  Level upper;
  Level lower;
  double weight;
};

/// Fraction of the P->S decay from each P sublevel to each S sublevel that
/// lands in the detection mode. Normalized so that the sum over all directions
/// and both analyzer polarizations equals the squared CG branching weight.
inline std::vector<EmissionWeight> emission_projection(const LevelScheme& scheme,
                                                       const DetectionGeometry& geometry,
                                                       const FieldEnvironment& env) {
  geometry.validate();
  std::vector<EmissionWeight> out;
  const SphericalVector components =
      geometry.all_modes ? SphericalVector{} : FieldFrame(env.direction).spherical(geometry.analyzer);
  for (const Level& u : scheme.levels) {
    if (u.manifold != Manifold::kP12) continue;
    for (const Level& l : scheme.levels) {
      if (l.manifold != Manifold::kS12) continue;
      double w = 0.0;
      if (geometry.all_modes) {
        const int dq = u.m2 - l.m2;
        if (std::abs(dq) <= 2) w = std::pow(dipole_coupling(l, u, dq / 2), 2);
      } else {
        w = 1.5 * std::norm(emission_amplitude(l, u, components));
      }
      out.push_back({u, l, geometry.efficiency * w});
    }
  }
  return out;
}

/// Hermitian operator M with detected photon rate Tr(M rho) in 1/s.
inline Eigen::MatrixXcd detection_operator(const LevelScheme& scheme,
                                           const DetectionGeometry& geometry,
                                           const FieldEnvironment& env) {
  geometry.validate();
  const auto n = static_cast<Eigen::Index>(scheme.levels.size());
  const double gamma = scheme.gamma(DecayChannel::kPtoS);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  if (geometry.all_modes) {
    for (Eigen::Index i = 0; i < n; ++i)
      if (scheme.levels[i].manifold == Manifold::kP12) m(i, i) = gamma * geometry.efficiency;
    return m;
  }
  // Lowering operator A(l, u) projected on the analyzer; M = Gamma eta 3/2 A^dag A.
  const SphericalVector components = FieldFrame(env.direction).spherical(geometry.analyzer);
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index u = 0; u < n; ++u) {
    if (scheme.levels[u].manifold != Manifold::kP12) continue;
    for (Eigen::Index l = 0; l < n; ++l) {
      if (scheme.levels[l].manifold != Manifold::kS12) continue;
      a(l, u) = emission_amplitude(scheme.levels[l], scheme.levels[u], components);
    }
  }
  m = (1.5 * gamma * geometry.efficiency) * (a.adjoint() * a);
  return m;
}

}  // namespace ionphoton
