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

// Hashing, configuration parsing and the on-disk formats.
//
// Matrices and vectors are stored as a pair of files: `<stem>.json`, a
// header with shape, version, payload checksum and metadata, and
// `<stem>.bin`, the payload as little-endian IEEE doubles with real and
// imaginary parts interleaved, row-major. The checksum is FNV-1a 64 over
// the payload bytes.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>
#include <json.hpp>

#include "msloc/analysis.hpp"
#include "msloc/inverse.hpp"
#include "msloc/scenario.hpp"
#include "msloc/simsrc.hpp"
#include "msloc/spectral.hpp"
#include "msloc/transfer.hpp"

namespace msloc {

using json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);
std::string hash_json(const json& doc);

json to_json(const Vec3& v);
Vec3 vec3_from_json(const json& doc);
json to_json(const Scenario& scenario);
json to_json(const Window& window);
json to_json(const BinSelection& selection);
json to_json(const QuadratureSpec& quad);
json to_json(const Kernel2D& kernel);
json to_json(const BeamwidthReport& report);

BinSelection selection_from_json(const json& doc);

std::string hash_scenario(const Scenario& scenario);
std::string hash_window(const Window& window);
std::string hash_selection(const BinSelection& selection);
std::string hash_quadrature(const QuadratureSpec& quad);
std::string hash_recording(const Recording& recording);

/// Cache key of a transfer matrix: everything its entries depend on.
std::string transfer_key(const Scenario& scenario, const Window& window, const Kernel2D& kernel,
                         const BinSelection& selection, double f0, const QuadratureSpec& quad);

/// Scenario from a configuration document. Missing keys keep the defaults
/// of `base`. Recognised keys: medium.c; grid.{origin, extents, spacing, y,
/// cell_centered}; array.{type, n_mics, diameter, arms, turns, seed, center,
/// file}; motion.{v_s, x0, y0, z0}; ground.{enabled, z}. Relative array file
/// paths resolve against `base_dir`.
Scenario scenario_from_json(const json& doc, const Scenario& base,
                            const std::filesystem::path& base_dir = {});

json read_json_file(const std::filesystem::path& path);
/// Writes through a temporary file and a rename.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

void save_matrix(const std::filesystem::path& stem, const Eigen::MatrixXcd& m, json meta);
/// Returns nullopt if the files are missing. Throws FormatError on a bad
/// version, shape or checksum.
std::optional<std::pair<Eigen::MatrixXcd, json>> load_matrix(const std::filesystem::path& stem);

void save_transfer(const std::filesystem::path& stem, const TransferMatrix& tm);
TransferMatrix load_transfer(const std::filesystem::path& stem);

/// Cached transfer matrix `<dir>/<key>.{json,bin}`, or nullopt when absent
/// or unreadable (a corrupted entry is treated as a miss).
std::optional<TransferMatrix> load_cached_transfer(const std::filesystem::path& dir,
                                                   const std::string& key);
void store_cached_transfer(const std::filesystem::path& dir, const TransferMatrix& tm);

void save_recording(const std::filesystem::path& stem, const Recording& rec, json meta = {});
Recording load_recording(const std::filesystem::path& stem);

void save_result(const std::filesystem::path& stem, const RegularizationResult& result);
RegularizationResult load_result(const std::filesystem::path& stem);
std::string lcurve_csv(const RegularizationResult& result);

std::string map_csv(const SourceMap& map);
/// nz rows of nx dB values (clipped to the display floor), for gnuplot.
std::string map_matrix(const SourceMap& map);

/// Fixed-format number for summary tables: "%.6g", "nan" for NaN.
std::string format_number(double value);

}  // namespace msloc
