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

#include "msloc/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "msloc/error.hpp"

namespace msloc {

namespace {

std::size_t steps_in(double extent, double spacing, const char* axis) {
  const double ratio = extent / spacing;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    std::ostringstream os;
    os << "grid " << axis << "-extent " << extent
       << " is not a positive integer multiple of spacing " << spacing;
    throw ConfigError(os.str());
  }
  return static_cast<std::size_t>(rounded);
}

}  // namespace

double SourceGrid::x_at(std::size_t ix) const {
  const double offset = cell_centered_ ? 0.5 : 0.0;
  return origin_.x + (static_cast<double>(ix) + offset) * spacing_;
}

double SourceGrid::z_at(std::size_t iz) const {
  const double offset = cell_centered_ ? 0.5 : 0.0;
  return origin_.z + (static_cast<double>(iz) + offset) * spacing_;
}

std::size_t SourceGrid::nearest_index(double x, double z) const {
  const double offset = cell_centered_ ? 0.5 : 0.0;
  auto clamp_index = [](double u, std::size_t n) {
    const double r = std::round(u);
    if (r <= 0.0) return std::size_t{0};
    return std::min(static_cast<std::size_t>(r), n - 1);
  };
  const std::size_t ix = clamp_index((x - origin_.x) / spacing_ - offset, nx_);
  const std::size_t iz = clamp_index((z - origin_.z) / spacing_ - offset, nz_);
  return index(ix, iz);
}

SourceGrid make_source_grid(Vec3 origin, double x_extent, double z_extent,
                            double spacing, double y_plane, bool cell_centered) {
  if (!(spacing > 0.0)) throw ConfigError("grid spacing must be positive");
  if (!(x_extent > 0.0) || !(z_extent > 0.0))
    throw ConfigError("grid extents must be positive");
  const std::size_t sx = steps_in(x_extent, spacing, "x");
  const std::size_t sz = steps_in(z_extent, spacing, "z");

  SourceGrid g;
  g.origin_ = origin;
  g.x_extent_ = x_extent;
  g.z_extent_ = z_extent;
  g.spacing_ = spacing;
  g.y_plane_ = y_plane;
  g.cell_centered_ = cell_centered;
  g.nx_ = cell_centered ? sx : sx + 1;
  g.nz_ = cell_centered ? sz : sz + 1;
  g.points_.reserve(g.nx_ * g.nz_);
  for (std::size_t iz = 0; iz < g.nz_; ++iz)
    for (std::size_t ix = 0; ix < g.nx_; ++ix)
      g.points_.push_back({g.x_at(ix), y_plane, g.z_at(iz)});
  return g;
}

void MicArray::validate() const {
  if (positions.empty()) throw ConfigError("microphone array is empty");
  for (std::size_t i = 0; i < positions.size(); ++i)
    for (std::size_t j = i + 1; j < positions.size(); ++j)
      if (norm(positions[i] - positions[j]) < 1e-12) {
        std::ostringstream os;
        os << "microphones " << i << " and " << j << " coincide";
        throw ConfigError(os.str());
      }
}

void Scenario::validate() const {
  if (!(medium.c > 0.0)) throw ConfigError("speed of sound must be positive");
  if (motion.v_s == 0.0 || !std::isfinite(motion.v_s))
    throw ConfigError("source speed must be nonzero and finite");
  if (std::abs(motion.v_s) >= medium.c)
    throw ConfigError("source speed must be subsonic");
  if (grid.size() == 0) throw ConfigError("source grid is empty");
  array.validate();
  if (ground.enabled) {
    auto below = [&](double z) { return ground.z_plane < z; };
    bool ok = below(motion.z0);
    for (const auto& p : grid.points()) ok = ok && below(p.z);
    for (const auto& p : array.positions) ok = ok && below(p.z);
    if (!ok)
      throw ConfigError("ground plane must lie strictly below the grid, source and array");
  }
}

MicArray make_spiral_array(const SpiralParams& params) {
  if (params.n_mics == 0 || params.n_arms == 0)
    throw ConfigError("spiral array needs at least one microphone and one arm");
  if (params.n_mics % params.n_arms != 0) {
    std::ostringstream os;
    os << "n_mics " << params.n_mics << " is not divisible by n_arms " << params.n_arms;
    throw ConfigError(os.str());
  }
  if (!(params.diameter > 0.0)) throw ConfigError("array diameter must be positive");

  MicArray out;
  std::ostringstream label;
  label << "spiral-" << params.n_mics << "x" << params.n_arms << "-d" << params.diameter;
  out.label = label.str();

  if (params.n_mics == 1) {
    out.positions.push_back(params.center);
    return out;
  }

  double rotation = 0.0;
  if (params.seed != 0) {
    std::mt19937_64 rng(params.seed);
    rotation = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
  }

  const std::size_t per_arm = params.n_mics / params.n_arms;
  const double radius = 0.5 * params.diameter;
  out.positions.reserve(params.n_mics);
  for (std::size_t k = 0; k < per_arm; ++k) {
    const double s = static_cast<double>(k + 1) / static_cast<double>(per_arm);
    for (std::size_t a = 0; a < params.n_arms; ++a) {
      const double theta = rotation +
                           2.0 * std::numbers::pi * static_cast<double>(a) /
                               static_cast<double>(params.n_arms) +
                           2.0 * std::numbers::pi * params.turns * s;
      out.positions.push_back({params.center.x + radius * s * std::cos(theta),
                               params.center.y,
                               params.center.z + radius * s * std::sin(theta)});
    }
  }
  return out;
}

MicArray load_array_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open array file " + path.string());
  MicArray out;
  out.label = path.filename().string();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    Vec3 p;
    if (!(ls >> p.x >> p.y >> p.z)) {
      std::ostringstream os;
      os << path.string() << ":" << lineno << ": expected \"x y z\"";
      throw ConfigError(os.str());
    }
    out.positions.push_back(p);
  }
  out.validate();
  return out;
}

void save_array_file(const MicArray& array, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write array file " + path.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& p : array.positions) out << p.x << ' ' << p.y << ' ' << p.z << '\n';
}

DopplerBand doppler_band(double f0, double v_s, const Medium& medium) {
  if (!(f0 > 0.0)) throw DomainError("source frequency must be positive");
  if (!(medium.c > 0.0)) throw DomainError("speed of sound must be positive");
  const double speed = std::abs(v_s);
  if (speed >= medium.c) throw DomainError("source speed must be below the speed of sound");
  const double mach = speed / medium.c;
  return {f0 / (1.0 + mach), f0 / (1.0 - mach)};
}

}  // namespace msloc
