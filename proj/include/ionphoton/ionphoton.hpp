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

#include "angular_momentum.hpp"
#include "atom_model.hpp"
#include "bloch_solver.hpp"
#include "calibration.hpp"
#include "constants.hpp"
#include "detection_sim.hpp"
#include "errors.hpp"
#include "evolution.hpp"
#include "format.hpp"
#include "parallel.hpp"
#include "qng.hpp"
#include "random.hpp"
#include "spectroscopy.hpp"
#include "statistics.hpp"
#include "tag_analysis.hpp"
#include "tag_stream.hpp"
