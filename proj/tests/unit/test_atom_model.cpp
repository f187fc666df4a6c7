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


#include <gtest/gtest.h>

#include <ionphoton/atom_model.hpp>

using namespace ionphoton;

TEST(LevelScheme, DefaultsAndOverrides) {
  const LevelScheme s = build_level_scheme();
  EXPECT_NEAR(s.gamma(DecayChannel::kPtoS) / constants::kTwoPi, 15.1e6, 1e-6);
  EXPECT_NEAR(s.gamma_total() / constants::kTwoPi, 20.4e6, 1e-6);
  EXPECT_EQ(s.index_of({Manifold::kD32, 3}), 7u);
  AtomicConstants c;
  c.lande_d = 0.9;
  EXPECT_DOUBLE_EQ(build_level_scheme(c).lande_g(Manifold::kD32), 0.9);
  c.gamma_p_to_s = -1.0;
  EXPECT_THROW(build_level_scheme(c), ConfigError);
  EXPECT_THROW(s.index_of({Manifold::kS12, 3}), ConfigError);
}

TEST(Zeeman, ShiftIsLinearInFieldAndM) {
  const LevelScheme s = build_level_scheme();
  const FieldEnvironment env{1e-4, Vec3::UnitZ()};
  // mu_B / h = 13.996 GHz/T
  const double hz = zeeman_shift(s, {Manifold::kS12, 1}, env) / constants::kTwoPi;
  EXPECT_NEAR(hz, 0.5 * 2.0023 * 13.996245e9 * 1e-4, 1e2);
  EXPECT_NEAR(zeeman_shift(s, {Manifold::kD32, -3}, env), -3.0 * zeeman_shift(s, {Manifold::kD32, 1}, env), 1e-6);
}

TEST(Dipole, BranchingFromEachUpperSublevelSumsToOne) {
  for (int mu : {-1, 1})
    for (Manifold lower : {Manifold::kS12, Manifold::kD32}) {
      double sum = 0.0;
      for (int ml = -twice_j(lower); ml <= twice_j(lower); ml += 2) {
        const int dq = mu - ml;
        if (std::abs(dq) <= 2) sum += std::pow(dipole_coupling({lower, ml}, {Manifold::kP12, mu}, dq / 2), 2);
      }
      EXPECT_NEAR(sum, 1.0, 1e-14);
    }
}

TEST(Dipole, ForbiddenTransitionsThrow) {
  EXPECT_THROW(dipole_coupling({Manifold::kS12, 1}, {Manifold::kD32, 1}, 0), InvalidTransitionError);
  LaserField bad = LaserField::cooling(1.0, 0.0, transverse_polarization(0.3, 0.1));
  bad.upper = Manifold::kD32;
  EXPECT_THROW(bad.validate(), InvalidTransitionError);
  LaserField unnormalized = LaserField::cooling(1.0, 0.0, {Complex(1), Complex(1), Complex(0)});
  EXPECT_THROW(unnormalized.validate(), ConfigError);
}

TEST(Polarization, TransverseBeamIsNormalized) {
  for (double th : {0.0, 0.4, 1.2, constants::kPi / 2})
    for (double chi : {0.0, 0.3, -0.7}) EXPECT_NEAR(norm(transverse_polarization(th, chi)), 1.0, 1e-15);
  const auto pi = transverse_polarization(0.0, 0.0);
  EXPECT_NEAR(std::abs(pi[1]), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(pi[0]), 0.0, 1e-15);
}

TEST(Envelope, RampReachesTenAndNinetyPercentAtRiseTime) {
  for (auto shape : {Envelope::Shape::kErfRamp, Envelope::Shape::kLinearRamp}) {
    const Envelope e = Envelope::ramp(shape, 100e-9, 90e-9);
    EXPECT_NEAR(e(100e-9), 0.5, 1e-12);
    EXPECT_NEAR(e(55e-9), 0.1, 1e-9);
    EXPECT_NEAR(e(145e-9), 0.9, 1e-9);
  }
  EXPECT_THROW(Envelope::constant(1.5), ConfigError);
  const Envelope bad = Envelope::custom([](double) { return 2.0; });
  EXPECT_THROW(bad(0.0), ConfigError);
}

namespace {

// Decay rate into the analyzed mode summed over two orthogonal analyzers and
// averaged over the six axis directions. The integrand is quadratic in the
// direction, so this six-point rule is the exact 4pi average.
Eigen::MatrixXcd direction_averaged(const LevelScheme& s, const FieldEnvironment& env) {
  const Vec3 axes[3] = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(8, 8);
  for (int d = 0; d < 3; ++d)
    for (int sign : {-1, 1})
      for (int k = 1; k <= 2; ++k) {
        DetectionGeometry g;
        g.direction = sign * axes[d];
        g.analyzer = axes[(d + k) % 3].cast<Complex>();
        sum += detection_operator(s, g, env);
      }
  return sum / 6.0;
}

}  // namespace

TEST(DipolePattern, DirectionAverageEqualsFullCollection) {
  const LevelScheme s = build_level_scheme();
  for (const Vec3& b : {Vec3(Vec3::UnitZ()), Vec3(Vec3(1, 2, 2) / 3.0)}) {
    const FieldEnvironment env{3e-4, b};
    const Eigen::MatrixXcd full = detection_operator(s, DetectionGeometry::full_collection(), env);
    EXPECT_LT((direction_averaged(s, env) - full).norm(), 1e-6 * full.norm());
  }
}

TEST(DipolePattern, PiLightVanishesAlongTheField) {
  const LevelScheme s = build_level_scheme();
  const FieldEnvironment env{3e-4, Vec3::UnitZ()};
  const double gamma = s.gamma(DecayChannel::kPtoS);
  // P(+1/2) -> S(+1/2) is a pi transition with CG^2 = 1/3.
  Eigen::Index u = 3, l = 1;
  DetectionGeometry along;
  along.direction = Vec3::UnitZ();
  along.analyzer = Vec3c(1, 0, 0);
  DetectionGeometry across;
  across.direction = Vec3::UnitX();
  across.analyzer = Vec3c(0, 0, 1);
  const auto a = emission_projection(s, along, env);
  const auto b = emission_projection(s, across, env);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].upper == s.levels[u] && a[i].lower == s.levels[l]) {
      EXPECT_NEAR(a[i].weight, 0.0, 1e-15);
      EXPECT_NEAR(b[i].weight, 1.5 / 3.0, 1e-14);
    }
  }
  // The sigma lines are x-polarized when seen from the side: nothing through a z analyzer.
  EXPECT_NEAR(detection_operator(s, across, env)(2, 2).real(), gamma * 1.5 / 3.0, 1e-6 * gamma);
}

TEST(DetectionGeometry, RejectsLongitudinalAnalyzer) {
  DetectionGeometry g;
  g.direction = Vec3::UnitX();
  g.analyzer = Vec3c(1, 0, 0);
  EXPECT_THROW(g.validate(), ConfigError);
  g.analyzer = Vec3c(0, 1, 0);
  g.efficiency = 1.2;
  EXPECT_THROW(g.validate(), ConfigError);
}
