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

#include "msloc/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#ifdef MSLOC_HAVE_OPENMP
#include <omp.h>
#endif

#include "msloc/error.hpp"
#include "msloc/serialize.hpp"

namespace msloc {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kNoiseStream = 1001;
constexpr std::uint64_t kStabilizationStream = 2002;

double array_distance(const RunConfig& cfg) {
  double y = 0.0;
  for (const auto& p : cfg.scenario.array.positions) y += p.y;
  return y / static_cast<double>(cfg.scenario.array.size()) - cfg.scenario.motion.y0;
}

double parse_snr(const nlohmann::json& v) {
  if (v.is_null()) return std::numeric_limits<double>::infinity();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "off" || s == "none") return std::numeric_limits<double>::infinity();
    throw ConfigError("SNR must be a number or \"inf\"");
  }
  return v.get<double>();
}

template <class T>
std::vector<T> as_list(const nlohmann::json& v) {
  if (v.is_array()) return v.get<std::vector<T>>();
  return {v.get<T>()};
}

}  // namespace

Profile profile_from_string(const std::string& name) {
  if (name == "desk") return Profile::desk;
  if (name == "paper") return Profile::paper;
  throw ConfigError("unknown profile '" + name + "' (expected desk or paper)");
}

std::string to_string(Profile profile) { return profile == Profile::desk ? "desk" : "paper"; }

Scenario profile_scenario(Profile profile, double distance) {
  Scenario s;
  SpiralParams sp;
  sp.diameter = 1.0;
  sp.center = {2.0, distance, 2.0};
  if (profile == Profile::desk) {
    s.grid = make_source_grid({0.05, 0.0, 0.05}, 4.0, 4.0, 0.1, 0.0, true);
    sp.n_mics = 32;
    sp.n_arms = 4;
  } else {
    s.grid = make_source_grid({0.025, 0.0, 0.025}, 4.0, 4.0, 0.05, 0.0, true);
    sp.n_mics = 112;
    sp.n_arms = 7;
  }
  s.array = make_spiral_array(sp);
  s.motion = {50.0, 2.0, 0.0, 2.0};
  s.ground = {false, -1.0};
  s.validate();
  return s;
}

FrequencyBand RunConfig::effective_band() const {
  return band ? *band : default_band(f0, scenario.motion.v_s, scenario.medium);
}

Kernel2D RunConfig::effective_kernel() const {
  Kernel2D k = kernel_for(scenario);
  if (kernel) {
    k.kind = *kernel;
    k.z_plane = scenario.ground.z_plane;
  }
  return k;
}

Window RunConfig::make_window() const { return Window(window, T_g, fs); }

void RunConfig::validate() const {
  scenario.validate();
  if (!(f0 > 0.0)) throw ConfigError("f0 must be positive");
  quad.validate();
  const auto w = make_window();
  const auto b = effective_band();
  const auto avail = available_bins(b, w.delta_f()).count();
  if (M > avail) {
    std::ostringstream os;
    os << "M = " << M << " exceeds the " << avail << " DFT bins available for f0 = " << f0
       << " Hz, v_s = " << scenario.motion.v_s << " m/s, T_g = " << T_g * 1e3 << " ms";
    throw ConfigError(os.str());
  }
  if (strategy == BinStrategy::single && M != 1)
    throw ConfigError("single-bin strategy requires M = 1");
}

Recording simulate_run(const RunConfig& cfg) {
  const SignalSpec signal{cfg.f0, {1.0, 0.0}};
  const auto w = cfg.make_window();
  const double half = 0.5 * static_cast<double>(w.size()) / cfg.fs;
  Recording rec = record_array(cfg.scenario, signal, cfg.fs, -half, half);
  rec = add_stabilization_noise(rec, cfg.stabilization_db,
                                substream_seed(cfg.seed, kStabilizationStream));
  if (std::isfinite(cfg.noise_snr_db)) {
    const auto doppler = doppler_band(cfg.f0, cfg.scenario.motion.v_s, cfg.scenario.medium);
    NoiseSpec ns;
    ns.snr_db = cfg.noise_snr_db;
    ns.source_position = cfg.noise_source;
    ns.band_low = 0.8 * doppler.f_minus;
    ns.band_high = std::min(1.2 * doppler.f_plus, 0.45 * cfg.fs);
    ns.seed = substream_seed(cfg.seed, kNoiseStream);
    rec = add_noise(rec, cfg.scenario, ns);
  }
  return rec;
}

TransferMatrix transfer_for_run(const RunConfig& cfg, const RunContext& ctx, bool* cache_hit) {
  const auto w = cfg.make_window();
  const auto sel = select_bins(cfg.strategy, cfg.effective_band(), w, cfg.M,
                               cfg.scenario.array.size(), cfg.seed, cfg.f0);
  const auto kernel = cfg.effective_kernel();
  const auto key = transfer_key(cfg.scenario, w, kernel, sel, cfg.f0, cfg.quad);
  if (cache_hit) *cache_hit = false;
  if (ctx.cache_dir) {
    if (auto cached = load_cached_transfer(*ctx.cache_dir, key)) {
      if (cache_hit) *cache_hit = true;
      return std::move(*cached);
    }
  }
  auto tm = assemble(cfg.scenario, w, kernel, sel, cfg.f0, cfg.quad, ctx.progress);
  if (ctx.cache_dir) store_cached_transfer(*ctx.cache_dir, tm);
  return tm;
}

RunOutcome execute_run(const RunConfig& cfg, const RunContext& ctx) {
  cfg.validate();
  RunOutcome out;
  const auto w = cfg.make_window();
  const Recording rec = simulate_run(cfg);
  const TransferMatrix H = transfer_for_run(cfg, ctx, &out.cache_hit);
  out.transfer_key = H.key;
  out.n_rows = H.rows.size();
  out.result = solve_pipeline(H, rec, w, cfg.lcurve);
  out.map = to_source_map(out.result.a, cfg.scenario.grid);
  out.report = analyze_map(out.map, cfg.scenario.motion.x0, cfg.scenario.motion.z0,
                           cfg.threshold_db);
  out.period = sidelobe_period(out.map);

  if (ctx.output_dir) {
    const fs::path dir = *ctx.output_dir;
    fs::create_directories(dir);
    nlohmann::json rec_meta = {{"kind", "recording"},
                               {"fs", rec.fs},
                               {"t_start", rec.t_start},
                               {"n_channels", rec.n_channels()},
                               {"n_samples", rec.n_samples()},
                               {"seed", cfg.seed},
                               {"scenario_hash", hash_scenario(cfg.scenario)},
                               {"recording_hash", hash_recording(rec)},
                               {"filter", rec.filter_note}};
    write_text_atomic(dir / "recording.json", rec_meta.dump(2) + "\n");
    write_text_atomic(dir / "transfer.json",
                      nlohmann::json({{"key", H.key},
                                      {"rows", H.rows.size()},
                                      {"cols", H.n_cols},
                                      {"kernel", H.kernel}})
                              .dump(2) +
                          "\n");
    save_result(dir / "result", out.result);
    write_text_atomic(dir / "map.csv", map_csv(out.map));
    nlohmann::json report = to_json(out.report);
    report["period"] = out.period ? nlohmann::json(*out.period) : nlohmann::json(nullptr);
    report["lambda"] = out.result.lambda;
    write_text_atomic(dir / "report.json", report.dump(2) + "\n");
    if (ctx.plot_data) write_text_atomic(dir / "map.dat", map_matrix(out.map));
  }
  return out;
}

std::vector<RunConfig> ExperimentPlan::expand() const {
  if (f0.empty() || v_s.empty() || T_g.empty() || M.empty() || seeds.empty() ||
      snr_db.empty() || distance.empty())
    throw ConfigError("every sweep axis needs at least one value");
  std::vector<RunConfig> runs;
  for (double f : f0)
    for (double v : v_s)
      for (double tg : T_g)
        for (std::size_t m : M)
          for (double snr : snr_db)
            for (double d : distance)
              for (std::uint64_t seed : seeds) {
                RunConfig cfg;
                Scenario base = profile_scenario(profile, d);
                cfg.scenario = scenario_overrides.empty()
                                   ? base
                                   : scenario_from_json(scenario_overrides, base, config_dir);
                cfg.scenario.motion.v_s = v;
                cfg.scenario.ground.enabled = ground || cfg.scenario.ground.enabled;
                cfg.scenario.validate();
                cfg.f0 = f;
                cfg.fs = fs;
                cfg.band = band;
                cfg.T_g = tg;
                cfg.window = window;
                cfg.strategy = strategy;
                cfg.M = m;
                cfg.seed = seed;
                cfg.noise_snr_db = snr;
                cfg.kernel = kernel;
                cfg.stabilization_db = stabilization_db;
                cfg.quad = quad;
                cfg.lcurve = lcurve;
                cfg.validate();
                runs.push_back(std::move(cfg));
              }
  return runs;
}

std::size_t ExperimentPlan::size() const {
  return f0.size() * v_s.size() * T_g.size() * M.size() * snr_db.size() * distance.size() *
         seeds.size();
}

ExperimentPlan plan_from_json(const nlohmann::json& doc, const ExperimentPlan& base) {
  ExperimentPlan p = base;
  try {
    if (doc.contains("profile")) p.profile = profile_from_string(doc["profile"].get<std::string>());
    if (doc.contains("scenario")) p.scenario_overrides = doc["scenario"];
    if (doc.contains("f0")) p.f0 = as_list<double>(doc["f0"]);
    if (doc.contains("fs")) p.fs = doc["fs"].get<double>();
    if (doc.contains("band")) {
      const auto& b = doc["band"];
      if (b.is_null()) {
        p.band.reset();
      } else {
        if (!b.is_array() || b.size() != 2) throw ConfigError("band must be [low, high] in Hz");
        p.band = FrequencyBand{b[0].get<double>(), b[1].get<double>()};
      }
    }
    if (doc.contains("v_s")) p.v_s = as_list<double>(doc["v_s"]);
    if (doc.contains("T_g")) p.T_g = as_list<double>(doc["T_g"]);
    if (doc.contains("window")) p.window = window_kind_from_string(doc["window"].get<std::string>());
    if (doc.contains("strategy"))
      p.strategy = bin_strategy_from_string(doc["strategy"].get<std::string>());
    if (doc.contains("M")) p.M = as_list<std::size_t>(doc["M"]);
    if (doc.contains("seeds")) p.seeds = as_list<std::uint64_t>(doc["seeds"]);
    if (doc.contains("snr_db")) {
      p.snr_db.clear();
      const auto& v = doc["snr_db"];
      if (v.is_array()) {
        for (const auto& e : v) p.snr_db.push_back(parse_snr(e));
      } else {
        p.snr_db.push_back(parse_snr(v));
      }
    }
    if (doc.contains("distance")) p.distance = as_list<double>(doc["distance"]);
    if (doc.contains("ground")) p.ground = doc["ground"].get<bool>();
    if (doc.contains("kernel"))
      p.kernel = kernel_kind_from_string(doc["kernel"].get<std::string>());
    if (doc.contains("stabilization_db")) p.stabilization_db = parse_snr(doc["stabilization_db"]);
    if (doc.contains("quadrature")) {
      const auto& q = doc["quadrature"];
      p.quad.rel_tol = q.value("rel_tol", p.quad.rel_tol);
      p.quad.abs_tol = q.value("abs_tol", p.quad.abs_tol);
      p.quad.max_subdivisions = q.value("max_subdivisions", p.quad.max_subdivisions);
      p.quad.truncation_db = q.value("truncation_db", p.quad.truncation_db);
    }
    if (doc.contains("lcurve")) {
      const auto& l = doc["lcurve"];
      p.lcurve.n_points = l.value("n_points", p.lcurve.n_points);
      p.lcurve.min_ratio = l.value("min_ratio", p.lcurve.min_ratio);
      p.lcurve.lambda_floor = l.value("lambda_floor", p.lcurve.lambda_floor);
      p.lcurve.points_per_decade = l.value("points_per_decade", p.lcurve.points_per_decade);
      p.lcurve.cover_spectrum = l.value("cover_spectrum", p.lcurve.cover_spectrum);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("experiment plan: ") + e.what());
  }
  return p;
}

std::string summary_header() {
  return "f0,v_s,T_g,strategy,M,seed,SNR,distance,lambda,displacement,h_bw,v_bw,period,status\n";
}

std::string summary_row(const RunConfig& cfg, const RunOutcome* outcome) {
  std::ostringstream os;
  os << format_number(cfg.f0) << ',' << format_number(cfg.scenario.motion.v_s) << ','
     << format_number(cfg.T_g) << ',' << to_string(cfg.strategy) << ',' << cfg.M << ','
     << cfg.seed << ','
     << (std::isfinite(cfg.noise_snr_db) ? format_number(cfg.noise_snr_db) : "inf") << ','
     << format_number(array_distance(cfg)) << ',';
  if (outcome) {
    const auto& r = outcome->report;
    os << format_number(outcome->result.lambda) << ',' << format_number(r.displacement) << ','
       << format_number(r.horizontal_bw) << ',' << format_number(r.vertical_bw) << ','
       << (outcome->period ? format_number(*outcome->period) : "none") << ",ok\n";
  } else {
    os << "nan,nan,nan,nan,none,error\n";
  }
  return os.str();
}

fs::path output_root(const fs::path& fallback) {
  if (const char* env = std::getenv("MSLOC_OUTPUT_DIR"); env && *env) return fs::path(env);
  return fallback;
}

void set_thread_count(std::size_t jobs) {
#ifdef MSLOC_HAVE_OPENMP
  if (jobs > 0) omp_set_num_threads(static_cast<int>(jobs));
#else
  (void)jobs;
#endif
}

SweepSummary run_sweep(const ExperimentPlan& plan, const fs::path& output_dir,
                       const std::optional<fs::path>& cache_dir, std::size_t jobs, bool plot_data,
                       const std::function<void(const std::string&)>& log) {
  const auto runs = plan.expand();
  if (log) log("sweep: " + std::to_string(runs.size()) + " runs");
  fs::create_directories(output_dir);
  std::vector<std::string> rows(runs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> failures{0};
  std::mutex log_mutex;
  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, runs.size()));

  auto worker = [&]() {
    if (workers > 1) set_thread_count(1);
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      std::ostringstream name;
      name << "run_" << std::setw(3) << std::setfill('0') << i;
      RunContext ctx;
      ctx.cache_dir = cache_dir;
      ctx.output_dir = output_dir / name.str();
      ctx.plot_data = plot_data;
      try {
        const auto outcome = execute_run(runs[i], ctx);
        rows[i] = summary_row(runs[i], &outcome);
        if (log) {
          std::lock_guard<std::mutex> lock(log_mutex);
          log(name.str() + ": displacement " + format_number(outcome.report.displacement) +
              " m, lambda " + format_number(outcome.result.lambda) +
              (outcome.cache_hit ? " (cached H)" : ""));
        }
      } catch (const std::exception& e) {
        ++failures;
        rows[i] = summary_row(runs[i], nullptr);
        if (log) {
          std::lock_guard<std::mutex> lock(log_mutex);
          log(name.str() + ": failed: " + e.what());
        }
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < workers; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  SweepSummary summary;
  summary.runs = runs.size();
  summary.failures = failures;
  summary.csv = summary_header();
  for (const auto& r : rows) summary.csv += r;
  write_text_atomic(output_dir / "summary.csv", summary.csv);
  return summary;
}

}  // namespace msloc
