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

#include "msloc/serialize.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "msloc/error.hpp"

namespace msloc {

static_assert(std::endian::native == std::endian::little,
              "payload files are written in host order and must be little-endian");

namespace fs = std::filesystem;

namespace {

std::string payload_bytes(const Eigen::MatrixXcd& m) {
  std::string out;
  out.resize(static_cast<std::size_t>(m.size()) * 2 * sizeof(double));
  char* dst = out.data();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double re = m(i, j).real();
      const double im = m(i, j).imag();
      std::memcpy(dst, &re, sizeof(double));
      std::memcpy(dst + sizeof(double), &im, sizeof(double));
      dst += 2 * sizeof(double);
    }
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path with_ext(const fs::path& stem, const char* ext) {
  fs::path p = stem;
  p += ext;
  return p;
}

template <class T>
T get_or(const json& doc, const char* key, T fallback) {
  if (!doc.contains(key)) return fallback;
  return doc.at(key).get<T>();
}

json rows_to_json(const std::vector<TransferRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) out.push_back({r.mic, r.bin});
  return out;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << value;
  return os.str();
}

std::string hash_json(const json& doc) { return hex64(fnv1a64(doc.dump())); }

json to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec3_from_json(const json& doc) {
  if (!doc.is_array() || doc.size() != 3) throw ConfigError("expected a 3-vector [x, y, z]");
  return {doc[0].get<double>(), doc[1].get<double>(), doc[2].get<double>()};
}

json to_json(const Scenario& s) {
  json positions = json::array();
  for (const auto& p : s.array.positions) positions.push_back(to_json(p));
  return {
      {"medium", {{"c", s.medium.c}}},
      {"grid",
       {{"origin", to_json(s.grid.origin())},
        {"extents", {s.grid.x_extent(), s.grid.z_extent()}},
        {"spacing", s.grid.spacing()},
        {"y", s.grid.y_plane()},
        {"cell_centered", s.grid.cell_centered()}}},
      {"array", {{"label", s.array.label}, {"positions", positions}}},
      {"motion", {{"v_s", s.motion.v_s}, {"x0", s.motion.x0}, {"y0", s.motion.y0}, {"z0", s.motion.z0}}},
      {"ground", {{"enabled", s.ground.enabled}, {"z", s.ground.z_plane}}},
  };
}

json to_json(const Window& w) {
  return {{"kind", to_string(w.kind())},
          {"duration", w.duration()},
          {"fs", w.fs()},
          {"center", w.center()},
          {"n", w.size()}};
}

json to_json(const BinSelection& sel) {
  return {{"strategy", to_string(sel.strategy)},
          {"M", sel.M},
          {"band", {sel.band.low, sel.band.high}},
          {"delta_f", sel.delta_f},
          {"seed", sel.seed},
          {"bins", sel.sets}};
}

BinSelection selection_from_json(const json& doc) {
  BinSelection sel;
  sel.strategy = bin_strategy_from_string(doc.at("strategy").get<std::string>());
  sel.M = doc.at("M").get<std::size_t>();
  sel.band = {doc.at("band")[0].get<double>(), doc.at("band")[1].get<double>()};
  sel.delta_f = doc.at("delta_f").get<double>();
  sel.seed = doc.at("seed").get<std::uint64_t>();
  sel.sets = doc.at("bins").get<std::vector<std::vector<long>>>();
  return sel;
}

json to_json(const QuadratureSpec& q) {
  return {{"rel_tol", q.rel_tol},
          {"abs_tol", q.abs_tol},
          {"max_subdivisions", q.max_subdivisions},
          {"truncation_db", q.truncation_db}};
}

json to_json(const Kernel2D& k) {
  json out = {{"kind", to_string(k.kind)}};
  if (k.kind == KernelKind::half_plane) out["z_plane"] = k.z_plane;
  return out;
}

json to_json(const BeamwidthReport& r) {
  return {{"peak", {r.peak_x, r.peak_z}},
          {"true", {r.true_x, r.true_z}},
          {"displacement", r.displacement},
          {"horizontal_bw", r.horizontal_bw},
          {"vertical_bw", r.vertical_bw},
          {"area", r.area},
          {"threshold_db", r.threshold_db},
          {"touches_boundary", r.touches_boundary}};
}

std::string hash_scenario(const Scenario& s) { return hash_json(to_json(s)); }
std::string hash_window(const Window& w) { return hash_json(to_json(w)); }
std::string hash_selection(const BinSelection& sel) { return hash_json(to_json(sel)); }
std::string hash_quadrature(const QuadratureSpec& q) { return hash_json(to_json(q)); }

std::string hash_recording(const Recording& rec) {
  std::uint64_t h = fnv1a64(json({{"fs", rec.fs}, {"t_start", rec.t_start}}).dump());
  return hex64(fnv1a64(payload_bytes(rec.channels), h));
}

std::string transfer_key(const Scenario& scenario, const Window& window, const Kernel2D& kernel,
                         const BinSelection& selection, double f0, const QuadratureSpec& quad) {
  // The true source position and the ground flag only shape the simulated
  // data; the kernel carries the mirror plane.
  json s = to_json(scenario);
  s.erase("ground");
  s["motion"] = {{"v_s", scenario.motion.v_s}};
  return hash_json({{"format", kFormatVersion},
                    {"scenario", s},
                    {"window", to_json(window)},
                    {"kernel", to_json(kernel)},
                    {"selection", to_json(selection)},
                    {"f0", f0},
                    {"quadrature", to_json(quad)}});
}

Scenario scenario_from_json(const json& doc, const Scenario& base, const fs::path& base_dir) {
  Scenario s = base;
  try {
    if (doc.contains("medium")) s.medium.c = get_or(doc["medium"], "c", s.medium.c);
    if (doc.contains("motion")) {
      const auto& m = doc["motion"];
      s.motion.v_s = get_or(m, "v_s", s.motion.v_s);
      s.motion.x0 = get_or(m, "x0", s.motion.x0);
      s.motion.y0 = get_or(m, "y0", s.motion.y0);
      s.motion.z0 = get_or(m, "z0", s.motion.z0);
    }
    if (doc.contains("ground")) {
      const auto& g = doc["ground"];
      s.ground.enabled = get_or(g, "enabled", s.ground.enabled);
      s.ground.z_plane = get_or(g, "z", s.ground.z_plane);
    }
    if (doc.contains("grid")) {
      const auto& g = doc["grid"];
      Vec3 origin = g.contains("origin") ? vec3_from_json(g["origin"]) : s.grid.origin();
      double xe = s.grid.x_extent(), ze = s.grid.z_extent();
      if (g.contains("extents")) {
        xe = g["extents"].at(0).get<double>();
        ze = g["extents"].at(1).get<double>();
      }
      const double spacing = get_or(g, "spacing", s.grid.spacing());
      const double y = get_or(g, "y", s.grid.y_plane());
      const bool cell = get_or(g, "cell_centered", s.grid.cell_centered());
      origin.y = y;
      s.grid = make_source_grid(origin, xe, ze, spacing, y, cell);
    }
    if (doc.contains("array")) {
      const auto& a = doc["array"];
      const std::string type = get_or<std::string>(a, "type", a.contains("file") ? "file" : "spiral");
      if (type == "file") {
        fs::path file = a.at("file").get<std::string>();
        if (file.is_relative() && !base_dir.empty()) file = base_dir / file;
        s.array = load_array_file(file);
      } else if (type == "spiral") {
        SpiralParams p;
        p.n_mics = get_or(a, "n_mics", p.n_mics);
        p.diameter = get_or(a, "diameter", p.diameter);
        p.n_arms = get_or(a, "arms", p.n_arms);
        p.turns = get_or(a, "turns", p.turns);
        p.seed = get_or(a, "seed", p.seed);
        if (a.contains("center")) p.center = vec3_from_json(a["center"]);
        if (a.contains("distance")) p.center.y = s.grid.y_plane() + a["distance"].get<double>();
        s.array = make_spiral_array(p);
      } else {
        throw ConfigError("unknown array type '" + type + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("configuration: ") + e.what());
  }
  s.validate();
  return s;
}

json read_json_file(const fs::path& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::random_device rd;
  fs::path tmp = path;
  tmp += ".tmp" + hex64((static_cast<std::uint64_t>(rd()) << 32) ^ rd());
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw FormatError("cannot write " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw FormatError("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

void save_matrix(const fs::path& stem, const Eigen::MatrixXcd& m, json meta) {
  const std::string payload = payload_bytes(m);
  meta["format"] = "msloc-complex-matrix";
  meta["version"] = kFormatVersion;
  meta["rows"] = m.rows();
  meta["cols"] = m.cols();
  meta["layout"] = "row-major interleaved re/im float64 little-endian";
  meta["checksum"] = hex64(fnv1a64(payload));
  // Payload first: a header only appears once its payload is complete.
  write_text_atomic(with_ext(stem, ".bin"), payload);
  write_text_atomic(with_ext(stem, ".json"), meta.dump(2) + "\n");
}

std::optional<std::pair<Eigen::MatrixXcd, json>> load_matrix(const fs::path& stem) {
  const auto header = with_ext(stem, ".json");
  const auto body = with_ext(stem, ".bin");
  if (!fs::exists(header) || !fs::exists(body)) return std::nullopt;
  json meta = read_json_file(header);
  if (meta.value("format", "") != "msloc-complex-matrix" ||
      meta.value("version", -1) != kFormatVersion)
    throw FormatError(header.string() + ": unsupported format or version");
  const auto rows = meta.at("rows").get<Eigen::Index>();
  const auto cols = meta.at("cols").get<Eigen::Index>();
  const std::string payload = read_file(body);
  if (payload.size() != static_cast<std::size_t>(rows * cols) * 2 * sizeof(double))
    throw FormatError(body.string() + ": payload size does not match the header");
  if (hex64(fnv1a64(payload)) != meta.at("checksum").get<std::string>())
    throw FormatError(body.string() + ": checksum mismatch");
  Eigen::MatrixXcd m(rows, cols);
  const char* src = payload.data();
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      double re, im;
      std::memcpy(&re, src, sizeof(double));
      std::memcpy(&im, src + sizeof(double), sizeof(double));
      m(i, j) = {re, im};
      src += 2 * sizeof(double);
    }
  return std::make_pair(std::move(m), std::move(meta));
}

void save_transfer(const fs::path& stem, const TransferMatrix& tm) {
  json meta = {{"kind", "transfer"},
               {"row_index", rows_to_json(tm.rows)},
               {"delta_f", tm.delta_f},
               {"kernel", tm.kernel},
               {"scenario_hash", tm.scenario_hash},
               {"window_hash", tm.window_hash},
               {"selection_hash", tm.selection_hash},
               {"quadrature_hash", tm.quadrature_hash},
               {"key", tm.key}};
  save_matrix(stem, tm.entries, meta);
}

TransferMatrix load_transfer(const fs::path& stem) {
  auto loaded = load_matrix(stem);
  if (!loaded) throw FormatError("transfer matrix " + stem.string() + " not found");
  auto& [m, meta] = *loaded;
  if (meta.value("kind", "") != "transfer")
    throw FormatError(stem.string() + " is not a transfer matrix");
  TransferMatrix tm;
  tm.entries = std::move(m);
  tm.n_cols = static_cast<std::size_t>(tm.entries.cols());
  for (const auto& r : meta.at("row_index"))
    tm.rows.push_back({r.at(0).get<std::size_t>(), r.at(1).get<long>()});
  if (tm.rows.size() != static_cast<std::size_t>(tm.entries.rows()))
    throw FormatError(stem.string() + ": row index does not match the matrix");
  tm.delta_f = meta.at("delta_f").get<double>();
  tm.kernel = meta.at("kernel").get<std::string>();
  tm.scenario_hash = meta.at("scenario_hash").get<std::string>();
  tm.window_hash = meta.at("window_hash").get<std::string>();
  tm.selection_hash = meta.at("selection_hash").get<std::string>();
  tm.quadrature_hash = meta.at("quadrature_hash").get<std::string>();
  tm.key = meta.at("key").get<std::string>();
  return tm;
}

std::optional<TransferMatrix> load_cached_transfer(const fs::path& dir, const std::string& key) {
  const fs::path stem = dir / key;
  try {
    if (!fs::exists(with_ext(stem, ".json"))) return std::nullopt;
    auto tm = load_transfer(stem);
    if (tm.key != key) return std::nullopt;
    return tm;
  } catch (const Error&) {
    return std::nullopt;
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

void store_cached_transfer(const fs::path& dir, const TransferMatrix& tm) {
  fs::create_directories(dir);
  save_transfer(dir / tm.key, tm);
}

void save_recording(const fs::path& stem, const Recording& rec, json meta) {
  meta["kind"] = "recording";
  meta["fs"] = rec.fs;
  meta["t_start"] = rec.t_start;
  meta["n_channels"] = rec.n_channels();
  meta["filter"] = rec.filter_note;
  meta["recording_hash"] = hash_recording(rec);
  save_matrix(stem, rec.channels, meta);
}

Recording load_recording(const fs::path& stem) {
  auto loaded = load_matrix(stem);
  if (!loaded) throw FormatError("recording " + stem.string() + " not found");
  auto& [m, meta] = *loaded;
  if (meta.value("kind", "") != "recording")
    throw FormatError(stem.string() + " is not a recording");
  Recording rec;
  rec.channels = std::move(m);
  rec.fs = meta.at("fs").get<double>();
  rec.t_start = meta.at("t_start").get<double>();
  rec.filter_note = meta.value("filter", "");
  return rec;
}

void save_result(const fs::path& stem, const RegularizationResult& result) {
  json meta = {{"kind", "result"},
               {"lambda", result.lambda},
               {"residual_norm", result.residual_norm},
               {"solution_norm", result.solution_norm},
               {"metadata", result.metadata}};
  save_matrix(stem, result.a, meta);
  write_text_atomic(with_ext(stem, ".lcurve.csv"), lcurve_csv(result));
}

RegularizationResult load_result(const fs::path& stem) {
  auto loaded = load_matrix(stem);
  if (!loaded) throw FormatError("result " + stem.string() + " not found");
  auto& [m, meta] = *loaded;
  if (meta.value("kind", "") != "result" || m.cols() != 1)
    throw FormatError(stem.string() + " is not a solution vector");
  RegularizationResult r;
  r.a = m.col(0);
  r.lambda = meta.at("lambda").get<double>();
  r.residual_norm = meta.at("residual_norm").get<double>();
  r.solution_norm = meta.at("solution_norm").get<double>();
  r.metadata = meta.at("metadata").get<std::map<std::string, std::string>>();
  return r;
}

std::string lcurve_csv(const RegularizationResult& result) {
  std::ostringstream os;
  os << std::setprecision(17) << "lambda,residual,norm,curvature\n";
  for (const auto& p : result.lcurve_trace)
    os << p.lambda << ',' << p.residual << ',' << p.norm << ',' << p.curvature << '\n';
  return os.str();
}

std::string map_csv(const SourceMap& map) {
  std::ostringstream os;
  os << std::setprecision(10) << "x,z,amplitude,db\n";
  for (std::size_t i = 0; i < map.grid.size(); ++i) {
    const auto& p = map.grid.point(i);
    const auto k = static_cast<Eigen::Index>(i);
    os << p.x << ',' << p.z << ',' << map.amplitudes(k) << ',' << map.db(k) << '\n';
  }
  return os.str();
}

std::string map_matrix(const SourceMap& map) {
  std::ostringstream os;
  os << std::setprecision(6);
  for (std::size_t iz = 0; iz < map.grid.nz(); ++iz) {
    for (std::size_t ix = 0; ix < map.grid.nx(); ++ix)
      os << (ix ? " " : "") << map.display_db(map.grid.index(ix, iz));
    os << '\n';
  }
  return os.str();
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

}  // namespace msloc
