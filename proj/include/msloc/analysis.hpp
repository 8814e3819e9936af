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

#include <cstddef>
#include <optional>

#include <Eigen/Core>

#include "msloc/scenario.hpp"

namespace msloc {

/// Normalized magnitude map on a source grid.
struct SourceMap {
  SourceGrid grid;
  Eigen::VectorXd amplitudes;
  Eigen::VectorXd db;  // 20 log10(|a| / max |a|), never below min_db
  double dynamic_floor_db = -20.0;

  static constexpr double min_db = -400.0;

  double db_at(std::size_t ix, std::size_t iz) const {
    return db(static_cast<Eigen::Index>(grid.index(ix, iz)));
  }
  /// dB value clipped to the display floor.
  double display_db(std::size_t index) const;
};

/// Throws ConfigError for a length mismatch and NumericalError for a zero map.
SourceMap to_source_map(const Eigen::VectorXcd& a, const SourceGrid& grid);

struct Peak {
  std::size_t index = 0;
  double x = 0.0;
  double z = 0.0;
};

/// Largest amplitude; ties go to the smallest index.
Peak find_peak(const SourceMap& map);

struct Beamwidth {
  double horizontal = 0.0;
  double vertical = 0.0;
  double area = 0.0;             // grid nodes in the region times spacing^2
  bool touches_boundary = false; // region reaches the grid edge; extents are clipped
};

/// Extent of the region at or above -threshold_db that contains the node
/// nearest `center`. Nodes are joined through shared edges, and the region
/// boundary is placed on grid edges by linear interpolation in dB, which is
/// where a marching-squares contour puts its vertices. Throws ConfigError if
/// the centre node is below the level.
Beamwidth beamwidth(const SourceMap& map, double center_x, double center_z,
                    double threshold_db = 3.0);

struct BeamwidthReport {
  double peak_x = 0.0;
  double peak_z = 0.0;
  double true_x = 0.0;
  double true_z = 0.0;
  double displacement = 0.0;
  double horizontal_bw = 0.0;
  double vertical_bw = 0.0;
  double area = 0.0;
  double threshold_db = 3.0;
  bool touches_boundary = false;
};

/// Peak, displacement from (true_x, true_z) and beamwidths measured around
/// the true position, or around the peak if the true node is below the level.
BeamwidthReport analyze_map(const SourceMap& map, double true_x, double true_z,
                            double threshold_db = 3.0);

struct PeriodOptions {
  double secondary_floor_db = -20.0; // a side lobe must reach this level
  double min_correlation = 0.3;      // autocorrelation peak prominence
};

/// Dominant period (m) along x of the map row through the peak, from the
/// first autocorrelation maximum at a lag of two or more samples, refined by
/// a parabola. Empty when no side lobe reaches the secondary floor or the
/// autocorrelation has no qualifying maximum.
std::optional<double> sidelobe_period(const SourceMap& map, const PeriodOptions& opts = {});

}  // namespace msloc
