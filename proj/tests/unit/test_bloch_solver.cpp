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

#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include <ionphoton/bloch_solver.hpp>
#include <ionphoton/evolution.hpp>
#include <ionphoton/spectroscopy.hpp>

using namespace ionphoton;

namespace {

constexpr double kTwoPi = constants::kTwoPi;

// Two-level atom g = 0, e = 1 driven by one laser.
LevelSystem two_level(double gamma) {
  LevelSystem s;
  s.dim = 2;
  s.shift = {0.0, 0.0};
  s.detuning_of = {0, -1};
  s.drives = {{0, {{1, 0, 1.0}}}};
  s.jumps = {{{0, 1, std::sqrt(gamma)}}};
  return s;
}

// Lambda system g1 = 0, g2 = 1, e = 2.
LevelSystem lambda_system(double gamma1, double gamma2) {
  LevelSystem s;
  s.dim = 3;
  s.shift = {0.0, 0.0, 0.0};
  s.detuning_of = {0, 1, -1};
  s.drives = {{0, {{2, 0, 1.0}}}, {1, {{2, 1, 1.0}}}};
  s.jumps = {{{0, 2, std::sqrt(gamma1)}}, {{1, 2, std::sqrt(gamma2)}}};
  return s;
}

LaserField bare(double rabi, double detuning) {
  LaserField l;
  l.rabi = rabi;
  l.detuning = detuning;
  return l;
}

// Independent Lambda-system oracle: the master equation applied to every
// matrix unit gives the generator column by column; the stationary state is
// the right singular vector of the smallest singular value.
double lambda_oracle_excited(double g1, double g2, double o1, double o2, double d1, double d2) {
  using M = Eigen::Matrix3cd;
  M h = M::Zero();
  h(0, 0) = d1;
  h(1, 1) = d2;
  h(2, 0) = h(0, 2) = 0.5 * o1;
  h(2, 1) = h(1, 2) = 0.5 * o2;
  M j1 = M::Zero(), j2 = M::Zero();
  j1(0, 2) = std::sqrt(g1);
  j2(1, 2) = std::sqrt(g2);
  const Complex I(0, 1);
  Eigen::Matrix<Complex, 9, 9> gen;
  for (int c = 0; c < 9; ++c) {
    M rho = M::Zero();
    rho(c % 3, c / 3) = 1.0;
    M d = -I * (h * rho - rho * h);
    for (const M& j : {j1, j2}) d += j * rho * j.adjoint() - 0.5 * (j.adjoint() * j * rho + rho * j.adjoint() * j);
    for (int r = 0; r < 9; ++r) gen(r, c) = d(r % 3, r / 3);
  }
  Eigen::JacobiSVD<Eigen::Matrix<Complex, 9, 9>> svd(gen, Eigen::ComputeFullV);
  Eigen::Matrix<Complex, 9, 1> v = svd.matrixV().col(8);
  const Complex tr = v(0) + v(4) + v(8);
  return (v(8) / tr).real();
}

struct RandomIon {
  LevelScheme scheme = build_level_scheme();
  FieldEnvironment env;
  std::vector<LaserField> lasers;
};

RandomIon random_ion(std::mt19937_64& rng, bool ramps) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RandomIon r;
  Vec3 b(u(rng) - 0.5, u(rng) - 0.5, u(rng) - 0.5);
  r.env = {1e-4 + 8e-4 * u(rng), b.normalized()};
  auto pol = [&] { return transverse_polarization(constants::kPi * u(rng), 0.5 * (u(rng) - 0.5)); };
  Envelope ramp = ramps ? Envelope::ramp(Envelope::Shape::kErfRamp, 0.3e-6 * u(rng), 50e-9 + 100e-9 * u(rng))
                        : Envelope::constant();
  r.lasers = {LaserField::cooling(kTwoPi * (2e6 + 20e6 * u(rng)), kTwoPi * (-30e6 * u(rng)), pol()),
              LaserField::repump(kTwoPi * (2e6 + 20e6 * u(rng)), kTwoPi * (40e6 * (u(rng) - 0.5)), pol(), ramp)};
  return r;
}

std::vector<Eigen::Index> d_levels() { return {4, 5, 6, 7}; }

}  // namespace

TEST(SteadyState, TwoLevelMatchesSaturationFormula) {
  const double gamma = kTwoPi * 20e6;
  for (double omega : {0.1, 0.7, 1.0, 3.0})
    for (double delta : {0.0, 0.5, -1.3, 4.0}) {
      const double o = omega * gamma, d = delta * gamma;
      const auto rho = steady_state(build_liouvillian(two_level(gamma), {bare(o, d)}, 0.0));
      const double expect = 0.25 * o * o / (d * d + 0.25 * gamma * gamma + 0.5 * o * o);
      EXPECT_NEAR(rho(1, 1).real(), expect, 1e-10) << omega << ' ' << delta;
      EXPECT_TRUE(rho.is_valid());
    }
}

TEST(SteadyState, LambdaSystemMatchesOracleAndShowsDarkResonance) {
  const double g1 = kTwoPi * 15e6, g2 = kTwoPi * 5e6;
  const double o1 = kTwoPi * 10e6, o2 = kTwoPi * 6e6, d1 = -kTwoPi * 12e6;
  double off = 0.0;
  for (double d2 : {-40e6, -20e6, -12.5e6, -12e6, -11.9e6, 0.0, 25e6}) {
    const double lib = steady_state(build_liouvillian(lambda_system(g1, g2), {bare(o1, d1), bare(o2, kTwoPi * d2)}, 0.0))(2, 2).real();
    const double oracle = lambda_oracle_excited(g1, g2, o1, o2, d1, kTwoPi * d2);
    EXPECT_NEAR(lib, oracle, 1e-9) << d2;
    if (d2 == 25e6) off = lib;
  }
  const double dark = steady_state(build_liouvillian(lambda_system(g1, g2), {bare(o1, d1), bare(o2, d1)}, 0.0))(2, 2).real();
  EXPECT_LT(dark, 1e-12);
  EXPECT_GT(off, 1e-2);
}

TEST(SteadyState, NoLightIsAmbiguous) {
  const LevelScheme s = build_level_scheme();
  const auto l = build_liouvillian(s, {}, FieldEnvironment{3e-4, Vec3::UnitZ()}, 0.0);
  try {
    steady_state(l);
    FAIL() << "expected AmbiguousSteadyStateError";
  } catch (const AmbiguousSteadyStateError& e) {
    EXPECT_GT(e.null_dimension(), 1u);
  }
}

TEST(SteadyState, MissingRepumpGivesDarkButUsablePoint) {
  const LevelScheme s = build_level_scheme();
  const FieldEnvironment env{3e-4, Vec3::UnitZ()};
  const auto pol = transverse_polarization(constants::kPi / 2, 0.0);
  std::vector<LaserField> lasers{LaserField::cooling(kTwoPi * 10e6, -kTwoPi * 10e6, pol),
                                 LaserField::repump(0.0, 0.0, pol)};
  const ScanPoint p = stationary_rate(build_liouvillian(s, lasers, env, 0.0),
                                      detection_operator(s, DetectionGeometry::full_collection(), env));
  EXPECT_TRUE(p.issue.has_value());
  EXPECT_TRUE(usable(p));
  EXPECT_EQ(p.rate, 0.0);
}

TEST(SteadyState, RequiresStaticGenerator) {
  std::mt19937_64 rng(3);
  const RandomIon ion = random_ion(rng, true);
  EXPECT_THROW(steady_state(build_liouvillian(ion.scheme, ion.lasers, ion.env)), DomainError);
}

TEST(Liouvillian, PreservesTrace) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 5; ++k) {
    const RandomIon ion = random_ion(rng, false);
    const auto l = build_liouvillian(ion.scheme, ion.lasers, ion.env, 0.0);
    EXPECT_LT(l.trace_functional().norm(), 1e-12 * l.fixed().norm());
  }
}

TEST(SteadyState, InvariantUnderCommonRateScaling) {
  // Multiplying every frequency (decay, Rabi, detuning, Zeeman) by k leaves
  // the stationary state unchanged and multiplies the photon rate by k.
  std::mt19937_64 rng(5);
  const RandomIon ion = random_ion(rng, false);
  const auto rho = steady_state(build_liouvillian(ion.scheme, ion.lasers, ion.env, 0.0));
  const double rate = scattering_rate(rho, ion.scheme, DetectionGeometry::full_collection(), ion.env);
  const double k = 1.7;
  AtomicConstants c;
  c.gamma_p_to_s = k * ion.scheme.gamma(DecayChannel::kPtoS);
  c.gamma_p_to_d = k * ion.scheme.gamma(DecayChannel::kPtoD);
  const LevelScheme scaled = build_level_scheme(c);
  FieldEnvironment env = ion.env;
  env.b_tesla *= k;
  std::vector<LaserField> lasers = ion.lasers;
  for (auto& l : lasers) l.rabi *= k, l.detuning *= k;
  const auto rho2 = steady_state(build_liouvillian(scaled, lasers, env, 0.0));
  EXPECT_LT((rho.matrix() - rho2.matrix()).norm(), 1e-10);
  EXPECT_NEAR(scattering_rate(rho2, scaled, DetectionGeometry::full_collection(), env), k * rate, 1e-9 * k * rate);
}

TEST(SteadyState, IndependentOfFieldOrientationForFullCollection) {
  // Polarizations are specified relative to B, so rotating B with full
  // collection changes nothing physical.
  std::mt19937_64 rng(9);
  RandomIon ion = random_ion(rng, false);
  const auto full = DetectionGeometry::full_collection();
  const double r1 = scattering_rate(steady_state(build_liouvillian(ion.scheme, ion.lasers, ion.env, 0.0)), ion.scheme, full, ion.env);
  ion.env.direction = Vec3(0.0, 0.6, 0.8);
  const double r2 = scattering_rate(steady_state(build_liouvillian(ion.scheme, ion.lasers, ion.env, 0.0)), ion.scheme, full, ion.env);
  EXPECT_NEAR(r1, r2, 1e-10 * r1);
}

TEST(Evolution, FreeDecayIsExponential) {
  const double gamma = kTwoPi * 20e6;
  const auto l = build_liouvillian(two_level(gamma), {bare(0.0, 0.0)}, 0.0);
  std::vector<double> t;
  for (int i = 0; i <= 20; ++i) t.push_back(i * 5e-9);
  const auto traj = evolve(DensityMatrix::pure(2, 1), l, t);
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_NEAR(traj[i](1, 1).real(), std::exp(-gamma * t[i]), 1e-9);
}

TEST(Evolution, StaticGeneratorMatchesMatrixExponential) {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 3; ++k) {
    const RandomIon ion = random_ion(rng, false);
    const auto l = build_liouvillian(ion.scheme, ion.lasers, ion.env, 0.0);
    const DensityMatrix rho0 = DensityMatrix::mixture(8, d_levels());
    const std::vector<double> t{0.0, 0.1e-6, 0.35e-6, 1e-6};
    const auto traj = evolve(rho0, l, t);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const Eigen::MatrixXcd prop = (l.fixed() * (t[i] / constants::kSolverTimeUnit)).exp();
      const Eigen::VectorXcd v = prop * rho0.vectorized();
      EXPECT_LT((v - traj[i].vectorized()).cwiseAbs().maxCoeff(), 1e-8) << k << ' ' << i;
    }
  }
}

TEST(Evolution, InvariantsHoldAlongRandomTrajectories) {
  std::mt19937_64 rng(42);
  std::vector<double> t;
  for (int i = 0; i <= 50; ++i) t.push_back(i * 20e-9);
  for (int k = 0; k < 4; ++k) {
    const RandomIon ion = random_ion(rng, true);
    const auto traj = evolve(DensityMatrix::mixture(8, d_levels()), build_liouvillian(ion.scheme, ion.lasers, ion.env), t);
    for (const auto& r : traj) {
      EXPECT_NEAR(r.trace(), 1.0, 1e-9);
      EXPECT_LT(r.hermiticity_defect(), 1e-10);
      EXPECT_GT(r.min_eigenvalue(), -1e-10);
    }
  }
}

TEST(Evolution, SplittingTheIntervalDoesNotChangeTheResult) {
  std::mt19937_64 rng(8);
  const RandomIon ion = random_ion(rng, true);
  const auto l = build_liouvillian(ion.scheme, ion.lasers, ion.env);
  const DensityMatrix rho0 = DensityMatrix::mixture(8, d_levels());
  const std::vector<double> whole{0.0, 0.6e-6};
  const std::vector<double> first{0.0, 0.25e-6}, second{0.25e-6, 0.6e-6};
  const auto direct = evolve(rho0, l, whole).back();
  const auto mid = evolve(rho0, l, first).back();
  const auto split = evolve(mid, l, second).back();
  EXPECT_LT((direct.matrix() - split.matrix()).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Evolution, RejectsBadGrids) {
  const auto l = build_liouvillian(two_level(1e6), {bare(1e6, 0.0)}, 0.0);
  const std::vector<double> t{0.0, 1e-7, 1e-7};
  EXPECT_THROW(evolve(DensityMatrix::pure(2, 0), l, t), DomainError);
  const std::vector<double> ok{0.0, 1e-7};
  EXPECT_THROW(evolve(DensityMatrix::pure(3, 0), l, ok), DomainError);
}
