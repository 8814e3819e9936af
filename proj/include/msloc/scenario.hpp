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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace msloc {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double norm(Vec3 v) { return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z); }

/// Distance in the y-z cross-section (the 2D radius of the 2.5D kernels).
inline double cross_section_distance(Vec3 a, Vec3 b) {
  return std::hypot(a.y - b.y, a.z - b.z);
}

struct Medium {
  double c = 343.0;  // speed of sound, m/s
};

/// Source grid in an x-z plane at constant y. Positions are the source
/// locations at t = 0; the whole grid moves along +x with the source speed.
class SourceGrid {
 public:
  SourceGrid() = default;

  const Vec3& origin() const { return origin_; }
  double x_extent() const { return x_extent_; }
  double z_extent() const { return z_extent_; }
  double spacing() const { return spacing_; }
  double y_plane() const { return y_plane_; }
  bool cell_centered() const { return cell_centered_; }
  std::size_t nx() const { return nx_; }
  std::size_t nz() const { return nz_; }
  std::size_t size() const { return points_.size(); }
  const std::vector<Vec3>& points() const { return points_; }
  const Vec3& point(std::size_t index) const { return points_.at(index); }

  /// Row-major index with x running fastest.
  std::size_t index(std::size_t ix, std::size_t iz) const { return iz * nx_ + ix; }
  std::pair<std::size_t, std::size_t> indices(std::size_t index) const {
    return {index % nx_, index / nx_};
  }
  double x_at(std::size_t ix) const;
  double z_at(std::size_t iz) const;

  /// Index of the grid point closest to (x, z).
  std::size_t nearest_index(double x, double z) const;

 private:
  friend SourceGrid make_source_grid(Vec3, double, double, double, double, bool);

  Vec3 origin_{};
  double x_extent_ = 0.0;
  double z_extent_ = 0.0;
  double spacing_ = 0.0;
  double y_plane_ = 0.0;
  bool cell_centered_ = true;
  std::size_t nx_ = 0;
  std::size_t nz_ = 0;
  std::vector<Vec3> points_;
};

struct MicArray {
  std::vector<Vec3> positions;
  std::string label;

  std::size_t size() const { return positions.size(); }
  void validate() const;
};

/// Uniform motion along x: x_s(t) = x0 + v_s t. (y0, z0) is the cross-section
/// position of the simulated source.
struct MotionSpec {
  double v_s = 50.0;
  double x0 = 2.0;
  double y0 = 0.0;
  double z0 = 2.0;

  Vec3 position_at(double t) const { return {x0 + v_s * t, y0, z0}; }
};

/// Fully reflecting plane z = z_plane.
struct GroundPlane {
  bool enabled = false;
  double z_plane = -1.0;

  Vec3 mirror(Vec3 p) const { return {p.x, p.y, 2.0 * z_plane - p.z}; }
};

struct Scenario {
  Medium medium;
  SourceGrid grid;
  MicArray array;
  MotionSpec motion;
  GroundPlane ground;

  /// Checks the cross-type invariants (c > 0, v_s != 0, ground below
  /// everything, distinct microphones). Throws ConfigError.
  void validate() const;
};

/// Builds a grid spanning x_extent by z_extent with the given spacing. The
/// node-centred variant places (extent/spacing + 1) points per axis starting
/// at the origin; the cell-centred variant places extent/spacing points at
/// the cell midpoints. Extents must be integer multiples of the spacing.
SourceGrid make_source_grid(Vec3 origin, double x_extent, double z_extent,
                            double spacing, double y_plane,
                            bool cell_centered = true);

struct SpiralParams {
  std::size_t n_mics = 112;
  double diameter = 1.0;
  std::size_t n_arms = 7;
  double turns = 0.75;  // angular sweep of each arm in full turns
  std::uint64_t seed = 0;
  Vec3 center{2.0, 4.0, 2.0};
};

/// Multi-arm Archimedean spiral in the x-z plane through `center`. Radii grow
/// linearly along each arm up to diameter/2; microphones are ordered ring by
/// ring, so index 0 sits closest to the centre. A nonzero seed rotates the
/// whole layout by a deterministic angle.
MicArray make_spiral_array(const SpiralParams& params);

/// Reads an array file: one "x y z" triple per line in metres; blank lines
/// and lines starting with '#' are ignored.
MicArray load_array_file(const std::filesystem::path& path);
void save_array_file(const MicArray& array, const std::filesystem::path& path);

struct DopplerBand {
  double f_minus = 0.0;
  double f_plus = 0.0;
};

/// Maximum Doppler range f0 (1 +- v_s/c)^-1 seen by a stationary receiver.
DopplerBand doppler_band(double f0, double v_s, const Medium& medium);

}  // namespace msloc
