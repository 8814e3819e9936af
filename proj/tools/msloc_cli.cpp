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

// msloc command-line front end.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "acceptance/acceptance.hpp"
#include "msloc/analysis.hpp"
#include "msloc/error.hpp"
#include "msloc/experiment.hpp"
#include "msloc/inverse.hpp"
#include "msloc/serialize.hpp"
#include "msloc/transfer.hpp"

namespace fs = std::filesystem;
using namespace msloc;

namespace {

struct Common {
  std::string config;
  std::string profile;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string cache;
  bool no_cache = false;
  std::size_t jobs = 1;
  bool plot_data = false;
};

void add_common(CLI::App* cmd, Common& c, bool with_seed = true) {
  cmd->add_option("--config", c.config, "JSON experiment file")->check(CLI::ExistingFile);
  cmd->add_option("--profile", c.profile, "desk or paper")->check(CLI::IsMember({"desk", "paper"}));
  if (with_seed) cmd->add_option("--seed", c.seed, "seed for bin draws and noise");
  cmd->add_option("--out", c.out, "output directory (default: $MSLOC_OUTPUT_DIR or msloc-out/<command>)");
  cmd->add_option("--cache", c.cache, "transfer cache directory (default: <output root>/cache)");
  cmd->add_flag("--no-cache", c.no_cache, "do not read or write the transfer cache");
  cmd->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_flag("--plot-data", c.plot_data, "also write gnuplot matrices");
}

fs::path root_dir() { return output_root("msloc-out"); }

fs::path out_dir(const Common& c, const std::string& command) {
  fs::path dir = c.out.empty() ? root_dir() / command : fs::path(c.out);
  fs::create_directories(dir);
  return dir;
}

std::optional<fs::path> cache_dir(const Common& c) {
  if (c.no_cache) return std::nullopt;
  return c.cache.empty() ? root_dir() / "cache" : fs::path(c.cache);
}

ExperimentPlan load_plan(const Common& c) {
  ExperimentPlan plan;
  if (!c.config.empty()) {
    plan.config_dir = fs::path(c.config).parent_path();
    plan = plan_from_json(read_json_file(c.config), plan);
  }
  if (!c.profile.empty()) plan.profile = profile_from_string(c.profile);
  if (c.seed) plan.seeds = {*c.seed};
  return plan;
}

RunConfig single_run(const Common& c) {
  const auto runs = load_plan(c).expand();
  if (runs.size() != 1)
    throw ConfigError("configuration describes " + std::to_string(runs.size()) +
                      " runs; single-run commands need exactly one (use sweep)");
  return runs.front();
}

void print_progress(std::size_t done, std::size_t total) {
  if (done == total || done % std::max<std::size_t>(1, total / 20) == 0)
    std::fprintf(stderr, "\rtransfer %zu/%zu", done, total);
  if (done == total) std::fprintf(stderr, "\n");
}

int cmd_simulate(const Common& c) {
  const RunConfig cfg = single_run(c);
  const fs::path dir = out_dir(c, "simulate");
  const Recording rec = simulate_run(cfg);
  save_recording(dir / "recording", rec,
                 {{"seed", cfg.seed},
                  {"f0", cfg.f0},
                  {"T_g", cfg.T_g},
                  {"scenario", to_json(cfg.scenario)},
                  {"scenario_hash", hash_scenario(cfg.scenario)}});
  std::printf("recording: %zu channels x %zu samples -> %s\n", rec.n_channels(), rec.n_samples(),
              (dir / "recording.json").c_str());
  return 0;
}

TransferMatrix obtain_transfer(const Common& c, const RunConfig& cfg, const std::string& load) {
  if (!load.empty()) {
    TransferMatrix H = load_transfer(load);
    const auto w = cfg.make_window();
    const auto sel = select_bins(cfg.strategy, cfg.effective_band(), w, cfg.M,
                                 cfg.scenario.array.size(), cfg.seed, cfg.f0);
    const auto key = transfer_key(cfg.scenario, w, cfg.effective_kernel(), sel, cfg.f0, cfg.quad);
    if (H.key != key)
      throw FormatError("transfer matrix " + load + " was built for a different configuration");
    return H;
  }
  RunContext ctx;
  ctx.cache_dir = cache_dir(c);
  ctx.progress = print_progress;
  bool hit = false;
  TransferMatrix H = transfer_for_run(cfg, ctx, &hit);
  if (hit) std::fprintf(stderr, "transfer matrix loaded from cache\n");
  return H;
}

int cmd_transfer(const Common& c, const std::string& save, const std::string& load) {
  const RunConfig cfg = single_run(c);
  const TransferMatrix H = obtain_transfer(c, cfg, load);
  const fs::path stem = save.empty() ? out_dir(c, "transfer") / "transfer" : fs::path(save);
  if (stem.has_parent_path()) fs::create_directories(stem.parent_path());
  save_transfer(stem, H);
  std::printf("transfer: %zu x %zu, key %s -> %s.json\n", H.rows.size(), H.n_cols, H.key.c_str(),
              stem.c_str());
  return 0;
}

int cmd_invert(const Common& c, const std::string& recording, const std::string& load,
               const std::string& save) {
  const RunConfig cfg = single_run(c);
  const fs::path dir = out_dir(c, "invert");
  const Recording rec = recording.empty() ? simulate_run(cfg) : load_recording(recording);
  const TransferMatrix H = obtain_transfer(c, cfg, load);
  if (!save.empty()) save_transfer(save, H);
  const RegularizationResult res = solve_pipeline(H, rec, cfg.make_window(), cfg.lcurve);
  save_result(dir / "result", res);
  std::printf("lambda %s, residual %s, solution norm %s -> %s.json\n",
              format_number(res.lambda).c_str(), format_number(res.residual_norm).c_str(),
              format_number(res.solution_norm).c_str(), (dir / "result").c_str());
  return 0;
}

int cmd_analyze(const Common& c, const std::string& result, double threshold) {
  const RunConfig cfg = single_run(c);
  const fs::path dir = out_dir(c, "analyze");
  const fs::path stem = result.empty() ? root_dir() / "invert" / "result" : fs::path(result);
  const RegularizationResult res = load_result(stem);
  const SourceMap map = to_source_map(res.a, cfg.scenario.grid);
  const BeamwidthReport rep = analyze_map(map, cfg.scenario.motion.x0, cfg.scenario.motion.z0, threshold);
  const auto period = sidelobe_period(map);
  write_text_atomic(dir / "map.csv", map_csv(map));
  auto doc = to_json(rep);
  doc["period"] = period ? json(*period) : json(nullptr);
  doc["lambda"] = res.lambda;
  write_text_atomic(dir / "report.json", doc.dump(2) + "\n");
  if (c.plot_data) write_text_atomic(dir / "map.dat", map_matrix(map));
  std::printf("peak (%s, %s) displacement %s h_bw %s v_bw %s period %s%s\n",
              format_number(rep.peak_x).c_str(), format_number(rep.peak_z).c_str(),
              format_number(rep.displacement).c_str(), format_number(rep.horizontal_bw).c_str(),
              format_number(rep.vertical_bw).c_str(),
              period ? format_number(*period).c_str() : "none",
              rep.touches_boundary ? " (region touches the grid boundary)" : "");
  return 0;
}

int cmd_sweep(const Common& c) {
  const ExperimentPlan plan = load_plan(c);
  const std::size_t total = plan.expand().size();  // validates every run up front
  const fs::path dir = out_dir(c, "sweep");
  std::printf("sweep: %zu runs, %zu jobs -> %s\n", total, c.jobs, dir.c_str());
  const auto summary = run_sweep(plan, dir, cache_dir(c), c.jobs, c.plot_data,
                                 [](const std::string& line) { std::printf("%s\n", line.c_str()); });
  std::printf("%zu runs, %zu failed; summary in %s\n", summary.runs, summary.failures,
              (dir / "summary.csv").c_str());
  return summary.failures == 0 ? 0 : 1;
}

int cmd_verify(const Common& c, bool tight, const std::vector<int>& only) {
  acceptance::Options opts;
  opts.work_dir = out_dir(c, "verify");
  opts.jobs = c.jobs;
  opts.tight = tight;
  opts.only = only;
  opts.on_result = [](const acceptance::CheckResult& r) {
    std::printf("%s\n", acceptance::format_line(r).c_str());
    std::fflush(stdout);
  };
  const auto results = acceptance::run(opts);
  write_text_atomic(opts.work_dir / "verify_summary.csv", acceptance::summary_csv(results));
  std::size_t failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  std::printf("%zu/%zu checks passed; summary in %s\n", results.size() - failed, results.size(),
              (opts.work_dir / "verify_summary.csv").c_str());
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"msloc: localization of uniformly moving tonal sources"};
  app.require_subcommand(1);

  Common common;
  std::string save_transfer_path, load_transfer_path, recording_path, result_path;
  double threshold = 3.0;
  bool tight = false;
  std::vector<int> only;

  auto* simulate = app.add_subcommand("simulate", "simulate the array recording");
  add_common(simulate, common);

  auto* transfer = app.add_subcommand("transfer", "assemble the transfer matrix");
  add_common(transfer, common);
  transfer->add_option("--save-transfer", save_transfer_path, "output stem for the matrix");
  transfer->add_option("--load-transfer", load_transfer_path, "reuse a saved matrix");

  auto* invert = app.add_subcommand("invert", "Tikhonov inversion with the L-curve");
  add_common(invert, common);
  invert->add_option("--recording", recording_path, "recording stem (default: simulate now)");
  invert->add_option("--load-transfer", load_transfer_path, "saved transfer matrix stem");
  invert->add_option("--save-transfer", save_transfer_path, "save the matrix used");

  auto* analyze = app.add_subcommand("analyze", "source map, beamwidths and side-lobe period");
  add_common(analyze, common);
  analyze->add_option("--result", result_path, "result stem (default: <output root>/invert/result)");
  analyze->add_option("--threshold-db", threshold, "contour level below the peak")
      ->check(CLI::PositiveNumber);

  auto* sweep = app.add_subcommand("sweep", "run every combination of a plan");
  add_common(sweep, common, true);

  auto* verify = app.add_subcommand("verify", "run the acceptance checks");
  verify->add_option("--out", common.out, "work directory");
  verify->add_option("--jobs", common.jobs, "worker threads for the sweep check")
      ->check(CLI::PositiveNumber);
  verify->add_flag("--tight", tight, "100x tighter quadrature tolerance");
  verify->add_option("--only", only, "check ids to run")->check(CLI::Range(1, acceptance::kCheckCount));

  CLI11_PARSE(app, argc, argv);

  try {
    if (common.jobs > 1 && !verify->parsed()) set_thread_count(common.jobs);
    if (simulate->parsed()) return cmd_simulate(common);
    if (transfer->parsed()) return cmd_transfer(common, save_transfer_path, load_transfer_path);
    if (invert->parsed())
      return cmd_invert(common, recording_path, load_transfer_path, save_transfer_path);
    if (analyze->parsed()) return cmd_analyze(common, result_path, threshold);
    if (sweep->parsed()) return cmd_sweep(common);
    if (verify->parsed()) return cmd_verify(common, tight, only);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
