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

#include <cmath>
#include <cstdint>

#include <boost/math/distributions/beta.hpp>

#include "errors.hpp"

namespace ionphoton {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Exact binomial (Clopper-Pearson) two-sided interval at the given level.
inline Interval clopper_pearson(std::uint64_t k, std::uint64_t n, double level = 0.95) {
  if (n == 0) throw DomainError("clopper_pearson: zero trials");
  if (k > n) throw DomainError("clopper_pearson: more successes than trials");
  const double a = 0.5 * (1.0 - level);
  const double kd = static_cast<double>(k), nd = static_cast<double>(n);
  Interval out;
  out.lo = k == 0 ? 0.0 : boost::math::quantile(boost::math::beta_distribution<double>(kd, nd - kd + 1.0), a);
  out.hi = k == n ? 1.0 : boost::math::quantile(boost::math::beta_distribution<double>(kd + 1.0, nd - kd), 1.0 - a);
  return out;
}

/// One-sided exact upper limit: P(X <= k | p_upper) = 1 - level.
inline double clopper_pearson_upper(std::uint64_t k, std::uint64_t n, double level = 0.95) {
  if (n == 0) throw DomainError("clopper_pearson_upper: zero trials");
  if (k > n) throw DomainError("clopper_pearson_upper: more successes than trials");
  if (k == n) return 1.0;
  const double kd = static_cast<double>(k), nd = static_cast<double>(n);
  return boost::math::quantile(boost::math::beta_distribution<double>(kd + 1.0, nd - kd), level);
}

/// Standard error of a binomial fraction k/n.
inline double binomial_sigma(std::uint64_t k, std::uint64_t n) {
  if (n == 0) throw DomainError("binomial_sigma: zero trials");
  const double p = static_cast<double>(k) / static_cast<double>(n);
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

}  // namespace ionphoton
