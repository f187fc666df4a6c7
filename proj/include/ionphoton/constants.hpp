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

#include <numbers>

namespace ionphoton::constants {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// CODATA 2018
inline constexpr double kBohrMagneton = 9.2740100783e-24;  // J/T
inline constexpr double kHbar = 1.054571817e-34;           // J s

// Internal time unit of the master-equation solver. Liouvillians are stored in
// rad per microsecond so that entries are O(1..1e3) rather than O(1e8).
inline constexpr double kSolverTimeUnit = 1e-6;  // s

// Instrument timestamp resolution.
inline constexpr unsigned long long kTagResolutionPs = 4;

}  // namespace ionphoton::constants
