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

#include <cmath>
#include <numbers>
#include <random>

#include "acceptance/oracles.hpp"
#include "msloc/analysis.hpp"
#include "msloc/error.hpp"

using namespace msloc;
using std::numbers::pi;

namespace {

SourceGrid desk_grid() { return make_source_grid({0.05, 0.0, 0.05}, 4.0, 4.0, 0.1, 0.0, true); }

Eigen::VectorXcd sample(const SourceGrid& g, const std::function<double(double, double)>& f) {
  Eigen::VectorXcd a(static_cast<Eigen::Index>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) a(static_cast<Eigen::Index>(i)) = f(g.point(i).x, g.point(i).z);
  return a;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("delta map") {
  const auto g = desk_grid();
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(g.size()));
  const auto k = g.nearest_index(1.3, 2.7);
  a(static_cast<Eigen::Index>(k)) = cplx(0.0, 2.0);
  const auto map = to_source_map(a, g);
  CHECK(map.db(static_cast<Eigen::Index>(k)) == 0.0);
  CHECK(map.db(0) == SourceMap::min_db);
  CHECK(map.display_db(0) == map.dynamic_floor_db);
  const auto p = find_peak(map);
  CHECK(p.index == k);
  const auto bw = beamwidth(map, p.x, p.z);
  CHECK(bw.horizontal <= g.spacing());
  CHECK(bw.vertical <= g.spacing());
}

TEST_CASE("ties go to the smallest index and equal peaks are both 0 dB") {
  const auto g = desk_grid();
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(g.size()));
  a(100) = 1.0;
  a(50) = cplx(0.0, -1.0);
  const auto map = to_source_map(a, g);
  CHECK(find_peak(map).index == 50);
  CHECK(map.db(100) == 0.0);
  CHECK(map.db(50) == 0.0);
}

TEST_CASE("normalization is scale invariant (property)") {
  const auto g = desk_grid();
  std::mt19937_64 gen(2);
  std::normal_distribution<double> n;
  Eigen::VectorXcd a(static_cast<Eigen::Index>(g.size()));
  for (auto& v : a) v = {n(gen), n(gen)};
  const auto base = to_source_map(a, g);
  for (int t = 0; t < 5; ++t) {
    const cplx c{n(gen) * 10.0, n(gen) * 1e-3};
    const auto scaled = to_source_map(c * a, g);
    CHECK((scaled.db - base.db).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("zero or mismatched maps are rejected") {
  const auto g = desk_grid();
  CHECK_THROWS_AS(to_source_map(Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(g.size())), g), NumericalError);
  CHECK_THROWS_AS(to_source_map(Eigen::VectorXcd::Ones(3), g), ConfigError);
}

TEST_CASE("Gaussian blob beamwidth agrees with a refined-grid oracle") {
  const auto g = desk_grid();
  for (double sigma : {0.2, 0.35}) {
    for (double ratio : {1.0, 2.5}) {
      auto f = [&](double x, double z) {
        return std::exp(-0.5 * ((x - 2.0) * (x - 2.0) / (sigma * sigma) +
                                (z - 2.0) * (z - 2.0) / (ratio * ratio * sigma * sigma)));
      };
      const auto map = to_source_map(sample(g, f), g);
      const auto bw = beamwidth(map, 2.0, 2.0, 3.0);
      const auto ref = oracle::refined_extent(f, 2.0, 2.0, 0.1, 4.0, 0.1, 4.0, 0.1, 3.0);
      CHECK(std::abs(bw.horizontal - ref.horizontal) <= g.spacing());
      CHECK(std::abs(bw.vertical - ref.vertical) <= g.spacing());
      // analytic -3 dB full width of a Gaussian
      const double fw = 2.0 * sigma * std::sqrt(2.0 * std::log(std::pow(10.0, 0.15)));
      CHECK(bw.horizontal == doctest::Approx(fw).epsilon(0.1));
      CHECK_FALSE(bw.touches_boundary);
    }
  }
}

TEST_CASE("beamwidth is monotone in the threshold (property)") {
  const auto g = desk_grid();
  auto f = [](double x, double z) {
    return std::exp(-std::hypot(x - 2.0, 0.5 * (z - 2.0))) * (1.0 + 0.2 * std::cos(7.0 * x));
  };
  const auto map = to_source_map(sample(g, f), g);
  double ph = 0.0, pv = 0.0;
  for (double thr : {1.0, 2.0, 3.0, 6.0, 10.0}) {
    const auto bw = beamwidth(map, 2.0, 2.0, thr);
    CHECK(bw.horizontal >= ph);
    CHECK(bw.vertical >= pv);
    ph = bw.horizontal;
    pv = bw.vertical;
  }
}

TEST_CASE("boundary touch is flagged") {
  const auto g = desk_grid();
  auto f = [](double x, double) { return std::exp(-0.5 * (x - 2.0) * (x - 2.0)); };
  const auto bw = beamwidth(to_source_map(sample(g, f), g), 2.0, 2.0, 3.0);
  CHECK(bw.touches_boundary);
  CHECK(bw.vertical == doctest::Approx(3.9).epsilon(1e-9));
}

TEST_CASE("centre below the level is an error") {
  const auto g = desk_grid();
  auto f = [](double x, double z) { return std::exp(-10.0 * std::hypot(x - 1.0, z - 1.0)); };
  CHECK_THROWS_AS(beamwidth(to_source_map(sample(g, f), g), 3.0, 3.0, 3.0), ConfigError);
}

TEST_CASE("analyze_map measures around the true node") {
  const auto g = desk_grid();
  auto f = [](double x, double z) { return std::exp(-((x - 2.1) * (x - 2.1) + (z - 2.0) * (z - 2.0)) / 0.08); };
  const auto r = analyze_map(to_source_map(sample(g, f), g), 2.0, 2.0);
  CHECK(r.peak_x == doctest::Approx(2.1));
  CHECK(r.displacement == doctest::Approx(0.1));
  CHECK(r.horizontal_bw > 0.0);
}

TEST_CASE("side-lobe period of a periodic map") {
  const auto g = make_source_grid({-1.9, 0.0, 0.1}, 8.0, 4.0, 0.2, 0.0, true);
  for (double period : {1.0, 1.25}) {
    auto f = [&](double x, double z) {
      const double envelope = std::exp(-0.5 * (z - 2.0) * (z - 2.0) / 0.25);
      return envelope * (0.3 + 0.7 * std::pow(std::cos(pi * (x - 2.0) / period), 2.0)) *
             std::exp(-0.02 * (x - 2.0) * (x - 2.0));
    };
    const auto p = sidelobe_period(to_source_map(sample(g, f), g));
    REQUIRE(p.has_value());
    CHECK(std::abs(*p - period) <= g.spacing());
  }
}

TEST_CASE("no period without side lobes") {
  const auto g = desk_grid();
  auto f = [](double x, double z) { return std::exp(-((x - 2.0) * (x - 2.0) + (z - 2.0) * (z - 2.0)) / 0.05); };
  CHECK_FALSE(sidelobe_period(to_source_map(sample(g, f), g)).has_value());
}

}
