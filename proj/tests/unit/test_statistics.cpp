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

#include <ionphoton/statistics.hpp>

using namespace ionphoton;

// Reference quantiles of the beta distribution from an independent library.
TEST(ClopperPearson, FrozenIntervals) {
  struct Case {
    std::uint64_t k, n;
    double lo, hi, upper95;
  };
  const Case cases[] = {
      {0, 10, 0.0, 0.3084971078187608, 0.2588655508930522},
      {5, 10, 0.18708602844739855, 0.8129139715526015, 0.7775588989918706},
      {3, 1000, 0.0006190999316495713, 0.008742023238478303, 0.007735244718479458},
      {0, 1000000000, 0.0, 3.6888794473100194e-09, 2.9957322690667843e-09},
      {2, 1000000000, 2.422092786357368e-10, 7.224687648850593e-09, 6.295793608349275e-09},
  };
  for (const auto& c : cases) {
    const Interval ci = clopper_pearson(c.k, c.n);
    EXPECT_NEAR(ci.lo, c.lo, 1e-10 * c.hi);
    EXPECT_NEAR(ci.hi, c.hi, 1e-10 * c.hi);
    EXPECT_NEAR(clopper_pearson_upper(c.k, c.n), c.upper95, 1e-10 * c.hi);
  }
}

TEST(ClopperPearson, EdgesAndErrors) {
  const Interval all = clopper_pearson(7, 7);
  EXPECT_EQ(all.hi, 1.0);
  EXPECT_LT(all.lo, 1.0);
  EXPECT_EQ(clopper_pearson_upper(7, 7), 1.0);
  EXPECT_THROW(clopper_pearson(1, 0), DomainError);
  EXPECT_THROW(clopper_pearson(5, 4), DomainError);
  EXPECT_THROW(binomial_sigma(0, 0), DomainError);
}

TEST(ClopperPearson, ContainsEstimateAndNarrowsWithN) {
  double width = 1.0;
  for (std::uint64_t n : {10u, 100u, 1000u, 10000u}) {
    const Interval ci = clopper_pearson(n / 10, n);
    EXPECT_LE(ci.lo, 0.1);
    EXPECT_GE(ci.hi, 0.1);
    EXPECT_LT(ci.hi - ci.lo, width);
    width = ci.hi - ci.lo;
  }
}

TEST(BinomialSigma, MatchesFormula) {
  EXPECT_NEAR(binomial_sigma(30, 100), std::sqrt(0.3 * 0.7 / 100.0), 1e-16);
  EXPECT_EQ(binomial_sigma(0, 100), 0.0);
}
