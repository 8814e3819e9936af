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

#include "msloc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "msloc/error.hpp"

namespace msloc {

double SourceMap::display_db(std::size_t index) const {
  return std::max(db(static_cast<Eigen::Index>(index)), dynamic_floor_db);
}

SourceMap to_source_map(const Eigen::VectorXcd& a, const SourceGrid& grid) {
  if (static_cast<std::size_t>(a.size()) != grid.size())
    throw ConfigError("solution length does not match the source grid");
  SourceMap map;
  map.grid = grid;
  map.amplitudes = a.cwiseAbs();
  const double peak = map.amplitudes.size() ? map.amplitudes.maxCoeff() : 0.0;
  if (!(peak > 0.0)) throw NumericalError("source map is identically zero");
  map.db.resize(map.amplitudes.size());
  for (Eigen::Index i = 0; i < map.amplitudes.size(); ++i) {
    const double r = map.amplitudes(i) / peak;
    map.db(i) = r > 0.0 ? std::max(20.0 * std::log10(r), SourceMap::min_db) : SourceMap::min_db;
  }
  return map;
}

Peak find_peak(const SourceMap& map) {
  Peak p;
  double best = -1.0;
  for (Eigen::Index i = 0; i < map.amplitudes.size(); ++i)
    if (map.amplitudes(i) > best) {
      best = map.amplitudes(i);
      p.index = static_cast<std::size_t>(i);
    }
  const auto& pt = map.grid.point(p.index);
  p.x = pt.x;
  p.z = pt.z;
  return p;
}

Beamwidth beamwidth(const SourceMap& map, double center_x, double center_z,
                    double threshold_db) {
  if (!(threshold_db > 0.0)) throw ConfigError("beamwidth threshold must be positive");
  const auto& g = map.grid;
  const double level = -threshold_db;
  const double h = g.spacing();
  const std::size_t nx = g.nx();
  const std::size_t nz = g.nz();
  const std::size_t start = g.nearest_index(center_x, center_z);
  if (map.db(static_cast<Eigen::Index>(start)) < level)
    throw ConfigError("beamwidth centre lies below the contour level");

  std::vector<char> inside(g.size(), 0);
  std::vector<std::size_t> stack = {start};
  inside[start] = 1;
  std::size_t count = 0;
  auto above = [&](std::size_t ix, std::size_t iz) { return map.db_at(ix, iz) >= level; };
  while (!stack.empty()) {
    const std::size_t idx = stack.back();
    stack.pop_back();
    ++count;
    const auto [ix, iz] = g.indices(idx);
    auto visit = [&](std::size_t jx, std::size_t jz) {
      const std::size_t j = g.index(jx, jz);
      if (!inside[j] && above(jx, jz)) {
        inside[j] = 1;
        stack.push_back(j);
      }
    };
    if (ix > 0) visit(ix - 1, iz);
    if (ix + 1 < nx) visit(ix + 1, iz);
    if (iz > 0) visit(ix, iz - 1);
    if (iz + 1 < nz) visit(ix, iz + 1);
  }

  // Fraction of a cell from an inside node towards an outside neighbour
  // where the dB value crosses the level.
  auto crossing = [&](double inner, double outer) {
    if (!(inner > outer)) return 0.0;
    return std::clamp((inner - level) / (inner - outer), 0.0, 1.0);
  };

  Beamwidth bw;
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double z_lo = x_lo, z_hi = -x_lo;
  for (std::size_t iz = 0; iz < nz; ++iz)
    for (std::size_t ix = 0; ix < nx; ++ix) {
      if (!inside[g.index(ix, iz)]) continue;
      const double v = map.db_at(ix, iz);
      const double x = g.x_at(ix);
      const double z = g.z_at(iz);
      if (ix == 0) {
        bw.touches_boundary = true;
        x_lo = std::min(x_lo, x);
      } else if (!inside[g.index(ix - 1, iz)]) {
        x_lo = std::min(x_lo, x - h * crossing(v, map.db_at(ix - 1, iz)));
      }
      if (ix + 1 == nx) {
        bw.touches_boundary = true;
        x_hi = std::max(x_hi, x);
      } else if (!inside[g.index(ix + 1, iz)]) {
        x_hi = std::max(x_hi, x + h * crossing(v, map.db_at(ix + 1, iz)));
      }
      if (iz == 0) {
        bw.touches_boundary = true;
        z_lo = std::min(z_lo, z);
      } else if (!inside[g.index(ix, iz - 1)]) {
        z_lo = std::min(z_lo, z - h * crossing(v, map.db_at(ix, iz - 1)));
      }
      if (iz + 1 == nz) {
        bw.touches_boundary = true;
        z_hi = std::max(z_hi, z);
      } else if (!inside[g.index(ix, iz + 1)]) {
        z_hi = std::max(z_hi, z + h * crossing(v, map.db_at(ix, iz + 1)));
      }
    }
  bw.horizontal = std::max(0.0, x_hi - x_lo);
  bw.vertical = std::max(0.0, z_hi - z_lo);
  bw.area = static_cast<double>(count) * h * h;
  return bw;
}

BeamwidthReport analyze_map(const SourceMap& map, double true_x, double true_z,
                            double threshold_db) {
  BeamwidthReport rep;
  const auto peak = find_peak(map);
  rep.peak_x = peak.x;
  rep.peak_z = peak.z;
  rep.true_x = true_x;
  rep.true_z = true_z;
  rep.displacement = std::hypot(peak.x - true_x, peak.z - true_z);
  rep.threshold_db = threshold_db;
  const std::size_t true_node = map.grid.nearest_index(true_x, true_z);
  const bool around_true = map.db(static_cast<Eigen::Index>(true_node)) >= -threshold_db;
  const auto bw = around_true ? beamwidth(map, true_x, true_z, threshold_db)
                              : beamwidth(map, peak.x, peak.z, threshold_db);
  rep.horizontal_bw = bw.horizontal;
  rep.vertical_bw = bw.vertical;
  rep.area = bw.area;
  rep.touches_boundary = bw.touches_boundary;
  return rep;
}

std::optional<double> sidelobe_period(const SourceMap& map, const PeriodOptions& opts) {
  const auto& g = map.grid;
  const std::size_t nx = g.nx();
  if (nx < 5) return std::nullopt;
  const auto peak = find_peak(map);
  const auto [px, pz] = g.indices(peak.index);

  std::vector<double> db(nx), amp(nx);
  for (std::size_t ix = 0; ix < nx; ++ix) {
    db[ix] = map.db_at(ix, pz);
    amp[ix] = map.amplitudes(static_cast<Eigen::Index>(g.index(ix, pz)));
  }
  bool has_secondary = false;
  for (std::size_t ix = 1; ix + 1 < nx; ++ix)
    if (ix != px && db[ix] > db[ix - 1] && db[ix] >= db[ix + 1] &&
        db[ix] >= opts.secondary_floor_db)
      has_secondary = true;
  if (!has_secondary) return std::nullopt;

  double mean = 0.0;
  for (double v : amp) mean += v;
  mean /= static_cast<double>(nx);
  std::vector<double> centred(nx);
  double energy = 0.0;
  for (std::size_t i = 0; i < nx; ++i) {
    centred[i] = amp[i] - mean;
    energy += centred[i] * centred[i];
  }
  if (!(energy > 0.0)) return std::nullopt;
  const std::size_t max_lag = nx / 2;
  std::vector<double> r(max_lag + 2, 0.0);
  for (std::size_t lag = 0; lag < r.size() && lag < nx; ++lag) {
    double acc = 0.0;
    for (std::size_t i = 0; i + lag < nx; ++i) acc += centred[i] * centred[i + lag];
    r[lag] = acc / energy;
  }
  for (std::size_t lag = 2; lag <= max_lag && lag + 1 < r.size(); ++lag) {
    if (r[lag] > r[lag - 1] && r[lag] >= r[lag + 1] && r[lag] >= opts.min_correlation) {
      const double denom = r[lag - 1] - 2.0 * r[lag] + r[lag + 1];
      double shift = 0.0;
      if (denom < 0.0) shift = std::clamp(0.5 * (r[lag - 1] - r[lag + 1]) / denom, -0.5, 0.5);
      return (static_cast<double>(lag) + shift) * g.spacing();
    }
  }
  return std::nullopt;
}

}  // namespace msloc
