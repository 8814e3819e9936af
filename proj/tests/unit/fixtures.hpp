// SPDX-License-Identifier: Apache-2.0
//
// msloc - frequency-domain localization of uniformly moving tonal sources
// Copyright (C) 2026 The msloc contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "msloc/experiment.hpp"
#include "msloc/scenario.hpp"

namespace msloc::testing {

/// 8 x 8 grid at 0.1 m around (2, 2) and an 8-microphone spiral 4 m away.
inline Scenario small_scenario() {
  Scenario s;
  s.grid = make_source_grid({1.55, 0.0, 1.55}, 0.8, 0.8, 0.1, 0.0, true);
  SpiralParams sp;
  sp.n_mics = 8;
  sp.n_arms = 4;
  sp.center = {2.0, 4.0, 2.0};
  s.array = make_spiral_array(sp);
  s.motion = {50.0, 2.0, 0.0, 2.0};
  s.validate();
  return s;
}

inline RunConfig small_run(std::uint64_t seed = 1) {
  RunConfig cfg;
  cfg.scenario = small_scenario();
  cfg.T_g = 0.05;
  cfg.M = 3;
  cfg.seed = seed;
  return cfg;
}

}  // namespace msloc::testing
