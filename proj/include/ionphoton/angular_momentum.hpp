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
#include <cstdlib>

namespace ionphoton {

// Angular momentum quantum numbers are carried doubled (2j, 2m) so that
// half-integers stay exact integers.
struct TwiceSpin {
  int j2;
  int m2;
};

namespace detail {

inline double factorial(int n) {
  static const auto table = [] {
    std::array<double, 64> t{};
    t[0] = 1.0;
    for (int i = 1; i < 64; ++i) t[i] = t[i - 1] * i;
    return t;
  }();
  return table.at(static_cast<std::size_t>(n));
}

// (a)/2 as integer; caller guarantees a is even and non-negative.
inline int half(int a) { return a / 2; }

inline bool triangle(int a2, int b2, int c2) {
  return c2 >= std::abs(a2 - b2) && c2 <= a2 + b2 && ((a2 + b2 + c2) % 2 == 0);
}

}  // namespace detail

/// Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M> in the Condon-Shortley
/// phase convention, evaluated with Racah's closed form. All arguments are
/// doubled quantum numbers.
inline double clebsch_gordan(TwiceSpin a, TwiceSpin b, TwiceSpin c) {
  using detail::factorial;
  using detail::half;
  const int j1 = a.j2, m1 = a.m2, j2 = b.j2, m2 = b.m2, J = c.j2, M = c.m2;
  if (m1 + m2 != M) return 0.0;
  if (!detail::triangle(j1, j2, J)) return 0.0;
  if (std::abs(m1) > j1 || std::abs(m2) > j2 || std::abs(M) > J) return 0.0;
  if ((j1 + m1) % 2 || (j2 + m2) % 2 || (J + M) % 2) return 0.0;

  const double prefactor =
      std::sqrt((J + 1) * factorial(half(J + j1 - j2)) * factorial(half(J - j1 + j2)) *
                factorial(half(j1 + j2 - J)) / factorial(half(j1 + j2 + J) + 1)) *
      std::sqrt(factorial(half(J + M)) * factorial(half(J - M)) * factorial(half(j1 - m1)) *
                factorial(half(j1 + m1)) * factorial(half(j2 - m2)) * factorial(half(j2 + m2)));

  double sum = 0.0;
  for (int k = 0;; ++k) {
    const int d1 = half(j1 + j2 - J) - k;
    const int d2 = half(j1 - m1) - k;
    const int d3 = half(j2 + m2) - k;
    const int d4 = half(J - j2 + m1) + k;
    const int d5 = half(J - j1 - m2) + k;
    if (d1 < 0 || d2 < 0 || d3 < 0) break;
    if (d4 < 0 || d5 < 0) continue;
    const double term = 1.0 / (factorial(k) * factorial(d1) * factorial(d2) * factorial(d3) *
                               factorial(d4) * factorial(d5));
    sum += (k % 2 == 0) ? term : -term;
  }
  return prefactor * sum;
}

}  // namespace ionphoton
