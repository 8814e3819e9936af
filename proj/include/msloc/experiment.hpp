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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "msloc/analysis.hpp"
#include "msloc/inverse.hpp"
#include "msloc/scenario.hpp"
#include "msloc/simsrc.hpp"
#include "msloc/spectral.hpp"
#include "msloc/transfer.hpp"

namespace msloc {

enum class Profile { desk, paper };

Profile profile_from_string(const std::string& name);
std::string to_string(Profile profile);

/// desk: 40 x 40 cell-centred grid at 0.1 m, 32-microphone spiral (4 arms).
/// paper: 80 x 80 at 0.05 m, 112-microphone spiral (7 arms). Both place the
/// source at (2, 0, 2) m on a grid node and the array centre 4 m away.
Scenario profile_scenario(Profile profile, double distance = 4.0);

/// Everything one localization run needs.
struct RunConfig {
  Scenario scenario;
  double f0 = 1000.0;
  double fs = 10000.0;
  WindowKind window = WindowKind::hanning;
  double T_g = 1.0;
  BinStrategy strategy = BinStrategy::random;
  std::size_t M = 5;
  std::optional<FrequencyBand> band;  // default_band() when empty
  std::uint64_t seed = 1;             // bin draws and noise
  double stabilization_db = 80.0;     // +inf disables
  double noise_snr_db = std::numeric_limits<double>::infinity();
  Vec3 noise_source{20.0, 10.0, 1.0};
  std::optional<KernelKind> kernel;   // kernel_for(scenario) when empty
  QuadratureSpec quad;
  LcurveOptions lcurve;
  double threshold_db = 3.0;

  FrequencyBand effective_band() const;
  Kernel2D effective_kernel() const;
  Window make_window() const;
  /// Throws ConfigError for inconsistent settings, including M above the
  /// available bin count.
  void validate() const;
};

struct RunContext {
  std::optional<std::filesystem::path> cache_dir;
  std::optional<std::filesystem::path> output_dir;  // per-run files when set
  bool plot_data = false;
  ProgressFn progress;
};

struct RunOutcome {
  RegularizationResult result;
  SourceMap map;
  BeamwidthReport report;
  std::optional<double> period;
  std::size_t n_rows = 0;
  bool cache_hit = false;
  std::string transfer_key;
};

Recording simulate_run(const RunConfig& cfg);
TransferMatrix transfer_for_run(const RunConfig& cfg, const RunContext& ctx, bool* cache_hit = nullptr);
RunOutcome execute_run(const RunConfig& cfg, const RunContext& ctx = {});

/// Cartesian sweep over the list-valued axes.
struct ExperimentPlan {
  Profile profile = Profile::desk;
  nlohmann::json scenario_overrides = nlohmann::json::object();
  std::filesystem::path config_dir;
  std::vector<double> f0 = {1000.0};
  double fs = 10000.0;
  std::optional<FrequencyBand> band;
  std::vector<double> v_s = {50.0};
  std::vector<double> T_g = {1.0};
  WindowKind window = WindowKind::hanning;
  BinStrategy strategy = BinStrategy::random;
  std::vector<std::size_t> M = {5};
  std::vector<std::uint64_t> seeds = {1};
  std::vector<double> snr_db = {std::numeric_limits<double>::infinity()};
  std::vector<double> distance = {4.0};
  bool ground = false;
  std::optional<KernelKind> kernel;
  double stabilization_db = 80.0;
  QuadratureSpec quad;
  LcurveOptions lcurve;

  std::vector<RunConfig> expand() const;
  std::size_t size() const;
};

ExperimentPlan plan_from_json(const nlohmann::json& doc, const ExperimentPlan& base = {});

struct SweepSummary {
  std::size_t runs = 0;
  std::size_t failures = 0;
  std::string csv;  // summary table written to <output>/summary.csv
};

/// Runs every configuration of the plan, `jobs` at a time, writing per-run
/// directories and summary.csv under output_dir. Row order follows the plan,
/// whatever the completion order.
SweepSummary run_sweep(const ExperimentPlan& plan, const std::filesystem::path& output_dir,
                       const std::optional<std::filesystem::path>& cache_dir, std::size_t jobs,
                       bool plot_data = false,
                       const std::function<void(const std::string&)>& log = {});

std::string summary_header();
std::string summary_row(const RunConfig& cfg, const RunOutcome* outcome);

/// Output directory from the environment override MSLOC_OUTPUT_DIR, else
/// `fallback`.
std::filesystem::path output_root(const std::filesystem::path& fallback);

void set_thread_count(std::size_t jobs);

}  // namespace msloc
