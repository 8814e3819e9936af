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

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "fixtures.hpp"
#include "msloc/error.hpp"
#include "msloc/serialize.hpp"

using namespace msloc;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("msloc_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void flip_byte(const fs::path& file, std::streamoff at) {
  std::fstream f(file, std::ios::in | std::ios::out | std::ios::binary);
  f.seekg(at);
  char c = 0;
  f.read(&c, 1);
  c = static_cast<char>(c ^ 0x5a);
  f.seekp(at);
  f.write(&c, 1);
}

}  // namespace

TEST_SUITE("serialize") {

TEST_CASE("complex matrix round trip and checksum") {
  const auto dir = fresh_dir("matrix");
  std::mt19937_64 gen(1);
  std::normal_distribution<double> n;
  Eigen::MatrixXcd m(7, 5);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = {n(gen), n(gen)};
  save_matrix(dir / "m", m, {{"note", "x"}});
  const auto loaded = load_matrix(dir / "m");
  REQUIRE(loaded.has_value());
  CHECK(loaded->first == m);
  CHECK(loaded->second.at("note") == "x");
  CHECK_FALSE(load_matrix(dir / "missing").has_value());
  flip_byte(dir / "m.bin", 40);
  CHECK_THROWS_AS(load_matrix(dir / "m"), FormatError);
}

TEST_CASE("hashes are stable and sensitive") {
  const auto s = testing::small_scenario();
  CHECK(hash_scenario(s) == hash_scenario(testing::small_scenario()));
  auto t = s;
  t.medium.c = 340.0;
  CHECK(hash_scenario(t) != hash_scenario(s));
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("transfer key ignores the source start and the ground flag") {
  const auto s = testing::small_scenario();
  const Window w(WindowKind::hanning, 0.05, 1e4);
  const auto sel = select_bins(BinStrategy::single, {900, 1100}, w, 1, s.array.size(), 1, 1000.0);
  const Kernel2D k = kernel_for(s);
  auto moved = s;
  moved.motion.x0 = 1.7;
  CHECK(transfer_key(moved, w, k, sel, 1000.0, {}) == transfer_key(s, w, k, sel, 1000.0, {}));
  auto faster = s;
  faster.motion.v_s = 40.0;
  CHECK(transfer_key(faster, w, k, sel, 1000.0, {}) != transfer_key(s, w, k, sel, 1000.0, {}));
  QuadratureSpec q;
  q.rel_tol = 1e-8;
  CHECK(transfer_key(s, w, k, sel, 1000.0, q) != transfer_key(s, w, k, sel, 1000.0, {}));
  CHECK(transfer_key(s, w, {KernelKind::half_plane, -1.0}, sel, 1000.0, {}) !=
        transfer_key(s, w, k, sel, 1000.0, {}));
}

TEST_CASE("corrupted cache entries are detected and rebuilt") {
  const auto dir = fresh_dir("cache");
  const auto cfg = testing::small_run();
  RunContext ctx;
  ctx.cache_dir = dir;
  bool hit = true;
  const auto first = transfer_for_run(cfg, ctx, &hit);
  CHECK_FALSE(hit);
  const auto second = transfer_for_run(cfg, ctx, &hit);
  CHECK(hit);
  CHECK(second.entries == first.entries);
  flip_byte(dir / (first.key + ".bin"), 100);
  CHECK_FALSE(load_cached_transfer(dir, first.key).has_value());
  const auto rebuilt = transfer_for_run(cfg, ctx, &hit);
  CHECK_FALSE(hit);
  CHECK(rebuilt.entries == first.entries);
  CHECK(load_cached_transfer(dir, first.key).has_value());
}

TEST_CASE("transfer, recording and result files round trip") {
  const auto dir = fresh_dir("files");
  const auto cfg = testing::small_run();
  const auto rec = simulate_run(cfg);
  save_recording(dir / "rec", rec);
  const auto rec2 = load_recording(dir / "rec");
  CHECK(rec2.channels == rec.channels);
  CHECK(rec2.fs == rec.fs);
  CHECK(rec2.t_start == rec.t_start);
  CHECK_THROWS_AS(load_transfer(dir / "rec"), FormatError);

  const auto H = transfer_for_run(cfg, {});
  save_transfer(dir / "H", H);
  const auto H2 = load_transfer(dir / "H");
  CHECK(H2.entries == H.entries);
  CHECK(H2.key == H.key);
  REQUIRE(H2.rows.size() == H.rows.size());
  CHECK(H2.rows[3].bin == H.rows[3].bin);
  CHECK(H2.delta_f == H.delta_f);

  const auto res = solve_pipeline(H, rec, cfg.make_window(), cfg.lcurve);
  save_result(dir / "res", res);
  const auto res2 = load_result(dir / "res");
  CHECK(res2.a == res.a);
  CHECK(res2.lambda == res.lambda);
  CHECK(fs::exists(dir / "res.lcurve.csv"));
}

TEST_CASE("map exports") {
  const auto cfg = testing::small_run();
  const auto out = execute_run(cfg);
  const auto csv = map_csv(out.map);
  CHECK(csv.rfind("x,z,amplitude,db\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 65);
  const auto mat = map_matrix(out.map);
  CHECK(std::count(mat.begin(), mat.end(), '\n') == 8);
  CHECK(format_number(0.1234567) == "0.123457");
  CHECK(format_number(std::nan("")) == "nan");
}

}
