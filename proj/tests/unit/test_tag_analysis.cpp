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

#include <ionphoton/tag_analysis.hpp>

using namespace ionphoton;

namespace {

// Three 1 us trigger periods with a 200 ns window:
// period 0: A inside -> single; period 1: A and B inside -> coincidence;
// period 2: B inside and another B outside -> single.
TagStream hand_stream() {
  TagStream s;
  s.records = {{0, Channel::kT},         {1000, Channel::kA},         {1000000, Channel::kT},
               {1000500, Channel::kA},   {1001000, Channel::kB},      {2000000, Channel::kT},
               {2100000, Channel::kB},   {2300000, Channel::kB}};
  return s;
}

}  // namespace

TEST(WindowClassifier, HandBuiltStream) {
  WindowClassifier c(200000);
  TagStream s = hand_stream();
  s.records.insert(s.records.begin(), {0, Channel::kA});  // before any trigger: ignored
  c.consume(s.records);
  c.finish();
  const WindowCounts& w = c.counts();
  EXPECT_EQ(w.n_triggers, 3u);
  EXPECT_EQ(w.only_a, 1u);
  EXPECT_EQ(w.only_b, 1u);
  EXPECT_EQ(w.both, 1u);
  EXPECT_EQ(w.none, 0u);
}

TEST(WindowClassifier, WindowIsHalfOpen) {
  TagStream s;
  s.records = {{0, Channel::kT}, {200000, Channel::kA}, {1000000, Channel::kT}, {1199996, Channel::kB}};
  const ClickStatistics st = window_statistics(s, 200e-9);
  EXPECT_EQ(st.n_single, 1u);
  EXPECT_EQ(st.n_a, 0u);
  EXPECT_EQ(st.n_b, 1u);
}

TEST(ClickStatistics, Estimates) {
  const ClickStatistics s = window_statistics(hand_stream(), 200e-9);
  EXPECT_EQ(s.n_triggers, 3u);
  EXPECT_DOUBLE_EQ(s.ps, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.pc, 1.0 / 3.0);
  ASSERT_TRUE(s.alpha);
  EXPECT_DOUBLE_EQ(*s.alpha, 0.75);
  ASSERT_TRUE(s.g2_0);
  EXPECT_DOUBLE_EQ(*s.g2_0, 0.75);
  EXPECT_LE(s.alpha_ci.lo, *s.alpha);
  EXPECT_GE(s.alpha_ci.hi, *s.alpha);
  EXPECT_LE(s.ps_ci.lo, s.ps);
  EXPECT_GE(s.ps_ci.hi, s.ps);
}

TEST(ClickStatistics, UndefinedRatiosAreAbsent) {
  WindowCounts c;
  c.n_triggers = c.none = 100;
  const ClickStatistics s = click_statistics(c, 1e-7);
  EXPECT_FALSE(s.alpha);
  EXPECT_FALSE(s.g2_0);
  EXPECT_THROW(click_statistics(WindowCounts{}, 1e-7), FormatError);
}

TEST(G2, HandBuiltHistogram) {
  const G2Histogram h = g2_histogram(hand_stream(), -2500000, 2500000, 1000000);
  ASSERT_EQ(h.counts.size(), 5u);
  const std::vector<std::uint64_t> expect{0, 0, 1, 3, 2};
  EXPECT_EQ(h.counts, expect);
  EXPECT_EQ(h.total_pairs, 6u);
  EXPECT_EQ(h.zero_pulse_pairs, 1u);
  ASSERT_TRUE(h.g2_0);
  EXPECT_DOUBLE_EQ(*h.g2_0, 0.5);
  EXPECT_DOUBLE_EQ(h.bin_center_ps(2), 0.0);

  const G2Histogram gated = g2_histogram(hand_stream(), -2500000, 2500000, 1000000, 200000);
  EXPECT_EQ(gated.n_b, 2u);
  EXPECT_EQ(gated.total_pairs, 4u);
  EXPECT_THROW(g2_histogram(hand_stream(), 10, 10, 1), ConfigError);
  EXPECT_THROW(g2_histogram(hand_stream(), 0, 10, 0), ConfigError);
}

TEST(DarkCorrectedAlpha, NoDarksGivesCountingBound) {
  WindowCounts c;
  c.n_triggers = 1000000;
  c.only_a = c.only_b = 1000;
  c.none = c.n_triggers - 2000;
  const ClickStatistics s = click_statistics(c, 200e-9);
  const DarkCorrectedAlpha d = dark_corrected_alpha(s, 0.0, 0.0, 0.0);
  EXPECT_EQ(d.accidental_pc, 0.0);
  EXPECT_NEAR(d.pc_upper, clopper_pearson_upper(0, 1000000), 1e-18);
  EXPECT_NEAR(d.alpha_upper, d.pc_upper / (s.ps * s.ps), 1e-12);
}

TEST(DarkCorrectedAlpha, AccidentalsSubtractedAndDarkUncertaintyWidens) {
  WindowCounts c;
  c.n_triggers = 100000000;
  c.only_a = c.only_b = 52500;
  c.both = 2;
  c.none = c.n_triggers - c.only_a - c.only_b - c.both;
  const ClickStatistics s = click_statistics(c, 200e-9);
  const DarkCorrectedAlpha a = dark_corrected_alpha(s, 10.0, 10.0, 0.0);
  const DarkCorrectedAlpha b = dark_corrected_alpha(s, 10.0, 10.0, 2.0);
  // Expected accidentals ~ Ps * 2e-6.
  EXPECT_NEAR(a.accidental_pc, s.ps * 2e-6, 0.01 * s.ps * 2e-6);
  EXPECT_LT(a.pc_upper, clopper_pearson_upper(2, c.n_triggers));
  EXPECT_GT(b.pc_upper, a.pc_upper);
  EXPECT_THROW(dark_corrected_alpha(s, -1.0, 0.0, 0.0), ConfigError);
}
