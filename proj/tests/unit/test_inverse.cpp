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
#include <random>

#include <Eigen/Cholesky>

#include "acceptance/oracles.hpp"
#include "fixtures.hpp"
#include "msloc/error.hpp"
#include "msloc/inverse.hpp"

using namespace msloc;

namespace {

Eigen::MatrixXcd random_matrix(Eigen::Index m, Eigen::Index n, std::mt19937_64& gen) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd H(m, n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) H(i, j) = {g(gen), g(gen)};
  return H;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k)
    g[static_cast<std::size_t>(k)] = std::pow(10.0, lo + (hi - lo) * k / (n - 1));
  return g;
}

}  // namespace

TEST_SUITE("inverse") {

TEST_CASE("Tikhonov solve equals the normal equations (property)") {
  std::mt19937_64 gen(3);
  for (int t = 0; t < 20; ++t) {
    const auto m = static_cast<Eigen::Index>(5 + gen() % 30);
    const auto n = static_cast<Eigen::Index>(5 + gen() % 60);
    const auto H = random_matrix(m, n, gen);
    const Eigen::VectorXcd p = random_matrix(m, 1, gen);
    const double lambda = 0.1 * (1 + gen() % 10);
    const auto r = tikhonov_solve(H, p, lambda);
    const auto ref = oracle::normal_equation_solve(H, p, lambda);
    CHECK((r.a - ref).norm() <= 1e-10 * ref.norm());
    CHECK(r.residual_norm == doctest::Approx((H * r.a - p).norm()));
  }
}

TEST_CASE("residual grows and solution norm shrinks with lambda") {
  std::mt19937_64 gen(4);
  const auto H = random_matrix(20, 40, gen);
  const Eigen::VectorXcd p = random_matrix(20, 1, gen);
  const SvdSystem svd(H);
  const auto proj = svd.project(p);
  double prev_res = -1.0, prev_norm = 1e300;
  for (double lambda : log_grid(-6, 3, 30)) {
    const auto pt = svd.point(proj, lambda);
    CHECK(pt.residual >= prev_res);
    CHECK(pt.norm <= prev_norm);
    prev_res = pt.residual;
    prev_norm = pt.norm;
    const Eigen::VectorXcd a = svd.solve(proj, lambda);
    CHECK(pt.residual == doctest::Approx((H * a - p).norm()).epsilon(1e-9));
    CHECK(pt.norm == doctest::Approx(a.norm()).epsilon(1e-9));
  }
}

TEST_CASE("lambda = 0 gives the minimum-norm least-squares solution") {
  std::mt19937_64 gen(5);
  const auto H = random_matrix(6, 15, gen);
  const Eigen::VectorXcd p = random_matrix(6, 1, gen);
  const SvdSystem svd(H);
  const Eigen::VectorXcd a = svd.solve(svd.project(p), 0.0);
  CHECK((H * a - p).norm() < 1e-10 * p.norm());
  const Eigen::VectorXcd ref = H.adjoint() * (H * H.adjoint()).ldlt().solve(p);
  CHECK((a - ref).norm() < 1e-10 * ref.norm());
  CHECK(svd.numerical_rank() == 6);
}

TEST_CASE("default grid covers the whole spectrum") {
  Eigen::VectorXd s(4);
  s << 10.0, 1.0, 1e-4, 1e-20;
  const auto g = default_lambda_grid(s);
  CHECK(g.back() == doctest::Approx(100.0));
  CHECK(g.front() <= 0.01 * 1e-8 * (1 + 1e-12));
  CHECK(std::is_sorted(g.begin(), g.end()));
  CHECK(g.size() >= 60);
  LcurveOptions fixed;
  fixed.cover_spectrum = false;
  const auto f = default_lambda_grid(s, fixed);
  CHECK(f.size() == 61);
  CHECK(f.front() == doctest::Approx(1e-4));
  fixed.grid = {1.0, 2.0};
  CHECK(default_lambda_grid(s, fixed) == fixed.grid);
  fixed.grid.clear();
  fixed.min_ratio = 2.0;
  CHECK_THROWS_AS(default_lambda_grid(s, fixed), ConfigError);
}

TEST_CASE("L-curve corner sits near the discrepancy lambda on a diagonal system") {
  const int n = 64;
  Eigen::VectorXd sigma(n);
  for (int i = 0; i < n; ++i) sigma(i) = std::pow(10.0, -i / 8.0);
  const auto grid = log_grid(std::log10(sigma(n - 1) * sigma(n - 1)), 0.0, 20);
  const double step = -2.0 * std::log10(sigma(n - 1)) / 19.0;
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::acos(-1.0));
  Eigen::VectorXcd e(n);
  for (int i = 0; i < n; ++i) e(i) = std::polar(1e-2, phase(gen));
  const Eigen::VectorXcd b = sigma.cast<cplx>() + e;
  const Eigen::MatrixXcd H = sigma.cast<cplx>().asDiagonal();
  const auto c = lcurve_corner(H, b, grid);
  const double dp = oracle::discrepancy_lambda(sigma, b, e.norm());
  CHECK(std::abs(std::log10(c.lambda) - std::log10(dp)) <= step);
  CHECK(c.trace.size() == 20);
  CHECK(c.trace[c.index].lambda == c.lambda);
}

TEST_CASE("curvature matches a finite-difference estimate") {
  std::mt19937_64 gen(8);
  Eigen::VectorXd sigma(30);
  for (int i = 0; i < 30; ++i) sigma(i) = std::pow(10.0, -i / 6.0);
  const Eigen::MatrixXcd H = sigma.cast<cplx>().asDiagonal();
  Eigen::VectorXcd p = sigma.cast<cplx>();
  for (int i = 0; i < 30; ++i) p(i) += std::polar(1e-3, 0.7 * i);
  const SvdSystem svd(H);
  const auto proj = svd.project(p);
  for (double lambda : {1e-6, 1e-4, 1e-2}) {
    const double h = 1e-3;
    auto xy = [&](double t) {
      const auto pt = svd.point(proj, lambda * std::exp(t));
      return std::pair{std::log(pt.residual), std::log(pt.norm)};
    };
    const auto [x0, y0] = xy(-h);
    const auto [x1, y1] = xy(0.0);
    const auto [x2, y2] = xy(h);
    const double dx = (x2 - x0) / (2 * h), dy = (y2 - y0) / (2 * h);
    const double ddx = (x2 - 2 * x1 + x0) / (h * h), ddy = (y2 - 2 * y1 + y0) / (h * h);
    const double kappa = (dx * ddy - ddx * dy) / std::pow(dx * dx + dy * dy, 1.5);
    CHECK(lcurve_curvature(svd, proj, lambda) == doctest::Approx(kappa).epsilon(1e-3));
  }
}

TEST_CASE("no-corner handling") {
  // Consistent square system: no corner, smallest lambda already fits.
  std::mt19937_64 gen(9);
  const auto H = random_matrix(10, 10, gen);
  const Eigen::VectorXcd p = H * random_matrix(10, 1, gen);
  const auto grid = log_grid(-14, 2, 30);
  const auto c = lcurve_corner(H, p, grid);
  CHECK(c.lambda == grid.front());
  // A coarse grid that never reaches the regularization-free regime and
  // shows no corner is an error.
  Eigen::VectorXd sigma(3);
  sigma << 1.0, 0.9, 0.8;
  const Eigen::MatrixXcd D = sigma.cast<cplx>().asDiagonal();
  Eigen::VectorXcd q(3);
  q << 1.0, 1.0, 1.0;
  CHECK_THROWS_AS(lcurve_corner(D, q, log_grid(1, 3, 25)), NoCornerError);
  CHECK_THROWS_AS(lcurve_corner(D, q, log_grid(-3, 3, 10)), ConfigError);
}

TEST_CASE("zero observations give a zero solution") {
  std::mt19937_64 gen(10);
  TransferMatrix tm;
  tm.entries = random_matrix(8, 12, gen);
  tm.n_cols = 12;
  tm.rows.resize(8);
  ObservationVector obs;
  obs.values = Eigen::VectorXcd::Zero(8);
  const auto r = solve_observations(tm, obs);
  CHECK(r.a.norm() == 0.0);
}

TEST_CASE("pipeline recovers a point source on the small scenario") {
  auto cfg = testing::small_run();
  const auto out = execute_run(cfg);
  CHECK(out.report.displacement <= cfg.scenario.grid.spacing() + 1e-9);
  CHECK(out.result.lambda > 0.0);
  CHECK_FALSE(out.result.lcurve_trace.empty());
  CHECK(out.result.metadata.count("transfer_key") == 1);
}

}
