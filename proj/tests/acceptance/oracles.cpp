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

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>
#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

namespace msloc::oracle {

namespace {

using big = boost::multiprecision::cpp_bin_float_50;

constexpr double kSeriesLimit = 25.0;

big euler_gamma() { return boost::math::constants::euler<big>(); }
big pi_big() { return boost::math::constants::pi<big>(); }

// Sums of the ascending series shared by J0/Y0 and I0/K0.
// alternating: J0 and the Y0 harmonic sum; otherwise I0 and the K0 sum.
void ascending(const big& x, bool alternating, big& plain, big& harmonic) {
  const big q = x * x / 4;
  big term = 1;
  big h = 0;
  plain = 1;
  harmonic = 0;
  for (int k = 1; k < 400; ++k) {
    term *= q / (big(k) * big(k));
    h += big(1) / big(k);
    const big signed_term = (alternating && k % 2 == 1) ? big(-term) : term;
    plain += signed_term;
    harmonic += (alternating ? big(-signed_term) : signed_term) * h;
    if (term < big("1e-60") * abs(plain) && term * h < big("1e-60") * (abs(harmonic) + 1))
      break;
  }
}

// a_k(0) of the Hankel expansion, summed until the terms stop shrinking.
template <typename TermFn>
void asymptotic(const big& x, TermFn&& add) {
  big a = 1;
  big prev = 1e300;
  for (int k = 0; k < 200; ++k) {
    if (k > 0) {
      const big odd = 2 * k - 1;
      a *= -(odd * odd) / (big(k) * 8);
    }
    const big mag = abs(a) / pow(x, k);
    if (mag > prev) break;
    prev = mag;
    add(k, a / pow(x, k));
    if (mag < big("1e-40")) break;
  }
}

}  // namespace

cplx hankel0_h1(double xd) {
  if (!(xd > 0.0)) throw std::domain_error("oracle H0 needs x > 0");
  const big x = xd;
  if (xd <= kSeriesLimit) {
    big j0, hj;
    ascending(x, true, j0, hj);
    // Y0 = 2/pi [ (ln(x/2) + gamma) J0 + sum (-1)^{k+1} H_k (x^2/4)^k / (k!)^2 ]
    const big y0 = 2 / pi_big() * ((log(x / 2) + euler_gamma()) * j0 + hj);
    return {static_cast<double>(j0), static_cast<double>(y0)};
  }
  big re = 0, im = 0;
  asymptotic(x, [&](int k, const big& t) {
    // i^k
    switch (k % 4) {
      case 0: re += t; break;
      case 1: im += t; break;
      case 2: re -= t; break;
      default: im -= t; break;
    }
  });
  const big phase = x - pi_big() / 4;
  const big amp = sqrt(2 / (pi_big() * x));
  const big c = cos(phase), s = sin(phase);
  return {static_cast<double>(amp * (re * c - im * s)), static_cast<double>(amp * (re * s + im * c))};
}

double bessel_k0(double xd) {
  if (!(xd > 0.0)) throw std::domain_error("oracle K0 needs x > 0");
  const big x = xd;
  if (xd <= kSeriesLimit) {
    big i0, hk;
    ascending(x, false, i0, hk);
    return static_cast<double>(-(log(x / 2) + euler_gamma()) * i0 + hk);
  }
  big sum = 0;
  asymptotic(x, [&](int, const big& t) { sum += t; });
  return static_cast<double>(sqrt(pi_big() / (2 * x)) * exp(-x) * sum);
}

double retarded_time(Vec3 receiver, const MotionSpec& motion, double c, double t) {
  auto f = [&](double tau) {
    const Vec3 d = receiver - motion.position_at(tau);
    return c * (t - tau) - norm(d);
  };
  // f(t) < 0 and f decreases with tau for subsonic motion.
  double hi = t;
  double step = 1e-3;
  double lo = t - step;
  while (f(lo) < 0.0) {
    step *= 2.0;
    lo = t - step;
    if (step > 1e9) throw std::runtime_error("oracle retarded time: no bracket");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (f(mid) >= 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

cplx window_dtft(const Window& window, double omega) {
  long double re = 0.0L, im = 0.0L;
  const auto& g = window.samples();
  for (std::size_t n = 0; n < g.size(); ++n) {
    const long double phase = static_cast<long double>(omega) * static_cast<long double>(window.time(n));
    re += static_cast<long double>(g[n]) * std::cos(phase);
    im += static_cast<long double>(g[n]) * std::sin(phase);
  }
  return {static_cast<double>(re), static_cast<double>(im)};
}

Eigen::VectorXcd normal_equation_solve(const Eigen::MatrixXcd& H, const Eigen::VectorXcd& p,
                                       double lambda) {
  Eigen::MatrixXcd A = H.adjoint() * H;
  A.diagonal().array() += lambda;
  const Eigen::LLT<Eigen::MatrixXcd> llt(A);
  if (llt.info() != Eigen::Success) throw std::runtime_error("oracle normal equations: not SPD");
  return llt.solve(H.adjoint() * p);
}

double discrepancy_lambda(const Eigen::VectorXd& sigma, const Eigen::VectorXcd& b, double target) {
  auto residual = [&](double lambda) {
    double r2 = 0.0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
      const double damp = lambda / (sigma(i) * sigma(i) + lambda);
      r2 += damp * damp * std::norm(b(i));
    }
    return std::sqrt(r2);
  };
  double lo = std::log(sigma.minCoeff() * sigma.minCoeff()) - 20.0;
  double hi = std::log(sigma.maxCoeff() * sigma.maxCoeff()) + 20.0;
  if (residual(std::exp(lo)) > target || residual(std::exp(hi)) < target)
    throw std::runtime_error("oracle discrepancy: target outside the residual range");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (residual(std::exp(mid)) < target ? lo : hi) = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

Extent refined_extent(const std::function<double(double, double)>& f, double cx, double cz,
                      double x0, double x1, double z0, double z1, double spacing,
                      double threshold_db, int refine) {
  const double h = spacing / refine;
  const auto nx = static_cast<std::size_t>(std::llround((x1 - x0) / h)) + 1;
  const auto nz = static_cast<std::size_t>(std::llround((z1 - z0) / h)) + 1;
  const double ref = f(cx, cz);
  const double level = ref * std::pow(10.0, -threshold_db / 20.0);
  std::vector<char> inside(nx * nz, 0), seen(nx * nz, 0);
  for (std::size_t iz = 0; iz < nz; ++iz)
    for (std::size_t ix = 0; ix < nx; ++ix)
      inside[iz * nx + ix] = f(x0 + h * ix, z0 + h * iz) >= level;
  const auto sx = static_cast<std::size_t>(std::llround((cx - x0) / h));
  const auto sz = static_cast<std::size_t>(std::llround((cz - z0) / h));
  std::queue<std::size_t> todo;
  todo.push(sz * nx + sx);
  seen[sz * nx + sx] = 1;
  std::size_t xmin = sx, xmax = sx, zmin = sz, zmax = sz;
  while (!todo.empty()) {
    const std::size_t k = todo.front();
    todo.pop();
    const std::size_t ix = k % nx, iz = k / nx;
    xmin = std::min(xmin, ix); xmax = std::max(xmax, ix);
    zmin = std::min(zmin, iz); zmax = std::max(zmax, iz);
    auto visit = [&](std::size_t jx, std::size_t jz) {
      const std::size_t j = jz * nx + jx;
      if (!seen[j] && inside[j]) {
        seen[j] = 1;
        todo.push(j);
      }
    };
    if (ix > 0) visit(ix - 1, iz);
    if (ix + 1 < nx) visit(ix + 1, iz);
    if (iz > 0) visit(ix, iz - 1);
    if (iz + 1 < nz) visit(ix, iz + 1);
  }
  // The true crossing lies within one fine step outside the extreme nodes.
  return {h * static_cast<double>(xmax - xmin + 1), h * static_cast<double>(zmax - zmin + 1)};
}

}  // namespace msloc::oracle
