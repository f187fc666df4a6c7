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

#include <cmath>

#include <ionphoton/angular_momentum.hpp>

using ionphoton::clebsch_gordan;

namespace {

struct CgCase {
  int j1, m1, j2, m2, j, m;
  double value;
};

// Condon-Shortley values from an independent symbolic evaluation.
constexpr CgCase kCases[] = {
    {1, -1, 2, 2, 1, 1, -0.81649658092772603},
    {1, 1, 2, 0, 1, 1, 0.57735026918962576},
    {3, 3, 2, -2, 1, 1, 0.70710678118654752},
    {3, 1, 2, 0, 1, 1, -0.57735026918962576},
    {3, -1, 2, 2, 1, 1, 0.40824829046386302},
    {3, -3, 2, 2, 1, -1, 0.70710678118654752},
    {4, 2, 2, -2, 2, 0, 0.54772255750516611},
    {3, 1, 2, -2, 1, -1, 0.40824829046386302},
};

}  // namespace

TEST(ClebschGordan, MatchesSymbolicValues) {
  for (const auto& c : kCases)
    EXPECT_NEAR(clebsch_gordan({c.j1, c.m1}, {c.j2, c.m2}, {c.j, c.m}), c.value, 1e-15)
        << c.j1 << ' ' << c.m1 << ' ' << c.j2 << ' ' << c.m2 << ' ' << c.j << ' ' << c.m;
}

TEST(ClebschGordan, SelectionRulesGiveZero) {
  EXPECT_EQ(clebsch_gordan({1, 1}, {2, 2}, {1, 1}), 0.0);   // m does not add up
  EXPECT_EQ(clebsch_gordan({1, 1}, {2, 0}, {5, 1}), 0.0);   // triangle violated
  EXPECT_EQ(clebsch_gordan({3, 3}, {2, 2}, {1, 5}), 0.0);   // |m| > j
}

TEST(ClebschGordan, RowsAndColumnsAreOrthonormal) {
  // sum_{m1,m2} <j1 m1; j2 m2 | J M> <j1 m1; j2 m2 | J' M> = delta_JJ'
  for (int j1 = 0; j1 <= 4; ++j1)
    for (int j2 = 0; j2 <= 3; ++j2)
      for (int J = std::abs(j1 - j2); J <= j1 + j2; J += 2)
        for (int Jp = std::abs(j1 - j2); Jp <= j1 + j2; Jp += 2)
          for (int M = -std::min(J, Jp); M <= std::min(J, Jp); M += 2) {
            double s = 0.0;
            for (int m1 = -j1; m1 <= j1; m1 += 2) {
              const int m2 = M - m1;
              if (std::abs(m2) > j2) continue;
              s += clebsch_gordan({j1, m1}, {j2, m2}, {J, M}) * clebsch_gordan({j1, m1}, {j2, m2}, {Jp, M});
            }
            EXPECT_NEAR(s, J == Jp ? 1.0 : 0.0, 1e-13) << j1 << ' ' << j2 << ' ' << J << ' ' << Jp << ' ' << M;
          }
}
