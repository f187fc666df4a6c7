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

#include <boost/crc.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <ionphoton/config.hpp>
#include <ionphoton/format.hpp>
#include <ionphoton/ionphoton.hpp>

namespace fs = std::filesystem;
using namespace ionphoton;

namespace {

const std::string kCli = IONPHOTON_CLI;
const std::string kConfigs = IONPHOTON_CONFIGS;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ionphoton_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args) const {
    const std::string cmd = "\"" + kCli + "\" " + args + " > \"" + (dir_ / "stdout.txt").string() + "\" 2> \"" +
                            (dir_ / "stderr.txt").string() + "\"";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string out() const { return " --out \"" + dir_.string() + "\""; }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name), std::ios::binary) << text;
    return path(name);
  }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  static std::vector<std::string> lines(const std::string& p) {
    std::ifstream in(p);
    std::vector<std::string> v;
    for (std::string l; std::getline(in, l);) v.push_back(l);
    return v;
  }

  // Value of "key: value" in a report file.
  static std::string field(const std::string& p, const std::string& key) {
    for (const auto& l : lines(p))
      if (l.rfind(key + ": ", 0) == 0) return l.substr(key.size() + 2);
    return "";
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("scan" + out()), 2);                                   // --config missing
  EXPECT_EQ(run("scan --config /nonexistent.yaml" + out()), 2);
  EXPECT_EQ(run("scan --config " + write("bad.yaml", "field: {b_tesla: x}\n") + out()), 2);
  EXPECT_EQ(run("scan --config " + kConfigs + "/ba138.yaml --points 0" + out()), 2);
  EXPECT_EQ(run("simulate --config " + kConfigs + "/ideal_source.yaml --triggers 0" + out()), 2);
  EXPECT_EQ(run("witness --counts 1,2" + out()), 2);
  EXPECT_EQ(run("witness --counts 1,2,3 --stats x" + out()), 2);
  EXPECT_EQ(run("simulate --config " + kConfigs + "/ideal_source.yaml --workers 0" + out()), 2);
}

TEST_F(Cli, ConfigErrorMessageNamesLocation) {
  EXPECT_EQ(run("scan --config " + write("bad.yaml", "field:\n  b_tesla: 1e-4\n  tilt: 3\n") + out()), 2);
  const std::string err = slurp(path("stderr.txt"));
  EXPECT_NE(err.find(":3:"), std::string::npos) << err;
  EXPECT_NE(err.find("tilt"), std::string::npos) << err;
}

TEST_F(Cli, DataFormatErrorsExitFour) {
  EXPECT_EQ(run("analyze --input " + write("bad.ttag", std::string("TTAG\x02\0\0\0", 8) + std::string(8, '\0')) + out()), 4);
  EXPECT_EQ(run("analyze --input " + write("unsorted.csv", "T,100\nA,50\n") + out()), 4);
  EXPECT_EQ(run("analyze --input " + write("junk.csv", "hello world\n") + out()), 4);
  EXPECT_EQ(run("fit --config " + kConfigs + "/ba138.yaml --data " + write("d.csv", "1,2\n3,x\n") + out()), 4);
  EXPECT_EQ(run("witness --stats " + write("s.yaml", "n_single: [1]\n") + out()), 4);
}

TEST_F(Cli, NumericErrorsExitThree) {
  // Ps = 0.7 lies above the attainable span of the threshold curve.
  EXPECT_EQ(run("witness --counts 700000,0,1000000" + out()), 3);
  EXPECT_NE(slurp(path("stderr.txt")).find("0.626"), std::string::npos);
}

TEST_F(Cli, EmptyTagFileGivesZeroStatistics) {
  EXPECT_EQ(run("analyze --input " + write("empty.ttag", "") + out()), 0);
  EXPECT_EQ(field(path("analysis_summary.yaml"), "n_triggers"), "0");
  EXPECT_EQ(field(path("analysis_summary.yaml"), "ps"), "null");
}

TEST_F(Cli, SimulateIsIdenticalAcrossWorkerCounts) {
  std::vector<std::uint32_t> crc;
  for (int w : {1, 4, 8}) {
    ASSERT_EQ(run("simulate --config " + kConfigs + "/ba138.yaml --triggers 300000 --seed 5 --workers " +
                  std::to_string(w) + out()), 0);
    const std::string bytes = slurp(path("tags.ttag"));
    boost::crc_32_type c;
    c.process_bytes(bytes.data(), bytes.size());
    crc.push_back(c.checksum());
    EXPECT_GT(bytes.size(), 300000u * 16);
  }
  EXPECT_EQ(crc[0], crc[1]);
  EXPECT_EQ(crc[0], crc[2]);
}

TEST_F(Cli, SimulateAnalyzeWitnessPipeline) {
  ASSERT_EQ(run("simulate --config " + kConfigs + "/ideal_source.yaml --csv" + out()), 0);
  ASSERT_EQ(run("analyze --config " + kConfigs + "/ideal_source.yaml --input " + path("tags.ttag") + out()), 0);
  const std::string from_ttag = slurp(path("analysis_summary.yaml"));
  ASSERT_EQ(run("analyze --config " + kConfigs + "/ideal_source.yaml --input " + path("tags.csv") + out()), 0);
  EXPECT_EQ(slurp(path("analysis_summary.yaml")), from_ttag);
  EXPECT_EQ(field(path("analysis_summary.yaml"), "n_triggers"), "200000");
  EXPECT_EQ(field(path("analysis_summary.yaml"), "n_coincidence"), "0");

  ASSERT_EQ(run("witness --stats " + path("analysis_summary.yaml") + out()), 0);
  EXPECT_EQ(field(path("verdict.yaml"), "qng_violation"), "true");
  EXPECT_EQ(field(path("verdict.yaml"), "n_single"), field(path("analysis_summary.yaml"), "n_single"));

  // The g2 histogram spans +-2.5 periods when the period is given.
  const auto h = lines(path("g2_histogram.csv"));
  EXPECT_EQ(h.front(), "tau_ps,counts");
  EXPECT_EQ(h.size(), 1u + 250u);  // 25 us in 100 ns bins
}

TEST_F(Cli, ThresholdCurveMatchesLibrary) {
  ASSERT_EQ(run("witness --counts 100,0,100000 --curve-points 11" + out()), 0);
  const auto l = lines(path("threshold_curve.csv"));
  ASSERT_EQ(l.size(), 12u);
  EXPECT_EQ(l[0], "v,ps,pc_qng,pc_classical");
  for (int i = 0; i < 11; ++i) {
    const double V = kThresholdBranchStart + (1.0 - kThresholdBranchStart) * i / 10;
    const ClickProbs p = qng_threshold_point(V);
    const std::string cl = p.ps <= 0.5 ? fmt12(classical_bound_pc(p.ps)) : "nan";
    EXPECT_EQ(l[i + 1], fmt12(V) + "," + fmt12(p.ps) + "," + fmt12(p.pc) + "," + cl);
  }
}

TEST_F(Cli, ScanMatchesLibraryToTwelveDigits) {
  ASSERT_EQ(run("scan --config " + kConfigs + "/ba138.yaml --start-hz -30e6 --stop-hz 0 --points 7" + out()), 0);
  const auto l = lines(path("scan.csv"));
  ASSERT_EQ(l.size(), 8u);
  EXPECT_EQ(l[0], "detuning_hz,rate_cps");
  const ExperimentConfig c = load_config(kConfigs + "/ba138.yaml");
  std::vector<double> grid;
  for (int i = 0; i < 7; ++i) grid.push_back(constants::kTwoPi * (-30e6 + 5e6 * i));
  const auto pts = dark_resonance_scan(c.scheme, *c.cooling, *c.repump, c.env, grid, c.geometry);
  for (int i = 0; i < 7; ++i) EXPECT_EQ(l[i + 1], fmt12(-30e6 + 5e6 * i) + "," + fmt12(pts[i].rate));
}

TEST_F(Cli, WavepacketReportsBeat) {
  ASSERT_EQ(run("wavepacket --config " + kConfigs + "/ba138.yaml" + out()), 0);
  EXPECT_EQ(field(path("wavepacket_summary.yaml"), "beat_detected"), "true");
  const double f = std::stod(field(path("wavepacket_summary.yaml"), "beat_frequency_hz"));
  const double split = std::stod(field(path("wavepacket_summary.yaml"), "d32_splitting_dm2_hz"));
  EXPECT_NEAR(f, split, 0.5e6);
  EXPECT_EQ(lines(path("wavepacket.csv")).size(), 2002u);
}

TEST_F(Cli, FitRecoversScaleAndBackground) {
  ASSERT_EQ(run("scan --config " + kConfigs + "/ba138.yaml --points 31" + out()), 0);
  // Turn the model scan into data with 2% errors, 0.5 scale and 100 cps background.
  std::ofstream data(path("data.csv"));
  data << "detuning_hz,rate_cps,sigma_cps\n";
  const auto l = lines(path("scan.csv"));
  for (std::size_t i = 1; i < l.size(); ++i) {
    const auto c = l[i].find(',');
    const double r = 0.5 * std::stod(l[i].substr(c + 1)) + 100.0;
    data << l[i].substr(0, c) << ',' << fmt12(r) << ',' << fmt12(0.02 * r) << '\n';
  }
  data.close();
  ASSERT_EQ(run("fit --config " + kConfigs + "/ba138.yaml --data " + path("data.csv") + out()), 0);
  const std::string rep = path("fit_report.yaml");
  EXPECT_EQ(field(rep, "converged"), "true");
  EXPECT_NEAR(std::stod(field(rep, "scale")), 0.5, 1e-4);
  EXPECT_NEAR(std::stod(field(rep, "background_cps")), 100.0, 0.5);
  EXPECT_NEAR(std::stod(field(rep, "rabi_cooling_hz")), 15e6, 1e3);
  EXPECT_EQ(run("fit --config " + kConfigs + "/ba138.yaml --free none --data " + path("data.csv") + out()), 2);
  EXPECT_EQ(run("fit --config " + kConfigs + "/ba138.yaml --free rabi_kooling --data " + path("data.csv") + out()), 2);
}
