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

#include <fstream>
#include <sstream>

#include <ionphoton/config.hpp>

using namespace ionphoton;

namespace {

std::string error_of(const std::string& yaml) {
  try {
    parse_config(yaml, "test.yaml");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, SampleFileLoads) {
  const ExperimentConfig c = load_config(std::string(IONPHOTON_SOURCE_DIR) + "/configs/ba138.yaml");
  ASSERT_TRUE(c.cooling && c.repump);
  EXPECT_NEAR(c.cooling->rabi, constants::kTwoPi * 15e6, 1e-3);
  EXPECT_NEAR(c.repump->detuning, -constants::kTwoPi * 15e6, 1e-3);
  EXPECT_EQ(c.env.b_tesla, 5e-4);
  EXPECT_EQ(c.run.n_triggers, 1000000u);
  EXPECT_EQ(c.det_a.dark_rate, 10.0);
  EXPECT_TRUE(c.has("fit"));
  ASSERT_TRUE(c.fit.initial);
  EXPECT_EQ((*c.fit.initial)[kScale], 0.02);
  EXPECT_TRUE(std::isnan((*c.fit.initial)[kRabiCooling]));
  const FitVector p = c.physics_vector();
  EXPECT_NEAR(p[kPolTheta], constants::kPi / 2, 1e-12);
  EXPECT_NEAR(p[kPolChi], 0.0, 1e-12);
  EXPECT_EQ(c.scan.detunings_hz().size(), 61u);
}

TEST(Config, PolarizationAnglesRoundTrip) {
  const auto c = parse_config(R"(
lasers:
  cooling: {rabi_hz: 1e6, detuning_hz: 0, polarization: {theta_rad: 0.7, chi_rad: 0.2}}
  repump: {rabi_hz: 1e6, detuning_hz: 0}
)");
  const FitVector p = c.physics_vector();
  EXPECT_NEAR(p[kPolTheta], 0.7, 1e-12);
  EXPECT_NEAR(p[kPolChi], 0.2, 1e-12);
}

TEST(Config, ErrorsCarryLineColumnAndField) {
  const std::string e = error_of("field:\n  b_tesla: -1\n");
  EXPECT_NE(e.find("test.yaml:2:"), std::string::npos) << e;
  EXPECT_NE(e.find("field.b_tesla"), std::string::npos) << e;

  const std::string unknown = error_of("run:\n  n_trigers: 5\n");
  EXPECT_NE(unknown.find("n_trigers"), std::string::npos) << unknown;
  EXPECT_NE(unknown.find("test.yaml:2:3"), std::string::npos) << unknown;

  EXPECT_NE(error_of("bogus: 1\n").find("bogus"), std::string::npos);
  EXPECT_NE(error_of("lasers:\n  cooling: {rabi_hz: 1e6}\n").find("detuning_hz"), std::string::npos);
  EXPECT_NE(error_of("detectors:\n  A: {quantum_efficiency: 1.5}\n").find("quantum_efficiency"), std::string::npos);
  EXPECT_NE(error_of("source:\n  arrival: {model: gaussian}\n").find("source.arrival.model"), std::string::npos);
  EXPECT_NE(error_of("fit:\n  free: [rabi_coolin]\n").find("rabi_coolin"), std::string::npos);
  EXPECT_NE(error_of("run: {configuration: sideways}\n").find("run.configuration"), std::string::npos);
  EXPECT_NE(error_of("field: [1, 2\n").find("test.yaml"), std::string::npos);
  EXPECT_NE(error_of("geometry: {all_modes: false, direction: [1,0,0], analyzer: [1,0,0]}\n").find("geometry"),
            std::string::npos);
}

TEST(Config, JsonIsAcceptedAsYamlSubset) {
  const auto c = parse_config(R"({"run": {"n_triggers": 12, "seed": 3, "window_s": 1e-7}})");
  EXPECT_EQ(c.run.n_triggers, 12u);
  EXPECT_EQ(c.run.seed, 3u);
}

TEST(Config, RequireNamesSectionAndCommand) {
  const auto c = parse_config("run: {n_triggers: 1}\n", "x.yaml");
  try {
    c.require("detectors", "simulate");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("detectors"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("simulate"), std::string::npos);
  }
}

TEST(Config, EmptyScanGridIsAnError) {
  const auto c = parse_config("scan: {points: 0}\n");
  EXPECT_THROW(c.scan.detunings_hz(), ConfigError);
}

TEST(ScanCsv, ParsesWithAndWithoutSigma) {
  std::istringstream with("detuning_hz,rate_cps,sigma_cps\n-1e6,100,10\n0,50,7\n");
  const ScanData a = read_scan_csv(with);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a.sigma[1], 7.0);
  std::istringstream without("-1e6,100\n0,0\n");
  const ScanData b = read_scan_csv(without);
  EXPECT_EQ(b.sigma[0], 10.0);
  EXPECT_EQ(b.sigma[1], 1.0);
  for (const char* bad : {"1,2,3,4\n", "1,abc\n", "1,2,3\n4,5\n", "", "1,nan\n"}) {
    std::istringstream in(bad);
    EXPECT_THROW(read_scan_csv(in), FormatError) << bad;
  }
}
