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

#include "acceptance/oracles.hpp"
#include "msloc/error.hpp"
#include "msloc/specfun.hpp"

using namespace msloc;
using std::numbers::pi;

TEST_SUITE("specfun") {

TEST_CASE("H0 and K0 against the 50-digit oracle") {
  for (int i = 0; i < 120; ++i) {
    const double x = std::pow(10.0, -4.0 + 6.5 * i / 119.0);
    const cplx h = oracle::hankel0_h1(x);
    CHECK(std::abs(hankel0_h1(x) - h) <= 1e-12 * std::abs(h));
    if (x < 600.0) {
      const double k = oracle::bessel_k0(x);
      CHECK(std::abs(bessel_k0(x) - k) <= 1e-12 * k);
    }
  }
}

TEST_CASE("K0 underflows to zero far out") {
  CHECK(bessel_k0(800.0) == 0.0);
  CHECK(bessel_k0(50.0) > 0.0);
}

TEST_CASE("free-field kernel regions") {
  const Kernel2D ff{KernelKind::free_field, 0.0};
  const Point2 s{0.0, 2.0}, r{4.0, 2.0};
  const double k = 18.0;
  CHECK(std::abs(q2d(ff, s, r, k * k).value - 0.25 * cplx(0.0, 1.0) * hankel0_h1(k * 4.0)) < 1e-15);
  CHECK(std::abs(q2d(ff, s, r, -k * k).value - bessel_k0(k * 4.0) / (2.0 * pi)) < 1e-15);
  CHECK(evanescent_kernel(k, 4.0) == bessel_k0(k * 4.0) / (2.0 * pi));
}

TEST_CASE("collar flags the k2 = 0 singularity") {
  const Kernel2D ff{KernelKind::free_field, 0.0};
  const Point2 s{0.0, 2.0}, r{4.0, 2.0};
  const double eps = collar_epsilon(2.0 * pi * 1000.0, 343.0);
  CHECK(eps == doctest::Approx(1e-6 * 2.0 * pi * 1000.0 / 343.0));
  CHECK(q2d(ff, s, r, 0.5 * eps * eps, eps).collar);
  CHECK_FALSE(q2d(ff, s, r, 4.0 * eps * eps, eps).collar);
  CHECK(std::isfinite(std::abs(q2d(ff, s, r, 0.0, eps).value)));
  CHECK_THROWS_AS(q2d(ff, s, r, 0.0, 0.0), DomainError);
}

TEST_CASE("half-plane kernel adds the image across the plane") {
  const Kernel2D hp{KernelKind::half_plane, -1.0};
  const Kernel2D ff{KernelKind::free_field, 0.0};
  const Point2 s{0.0, 2.0}, r{4.0, 1.5};
  const auto radii = pair_radii(hp, s, r);
  CHECK(radii.direct == doctest::Approx(std::hypot(4.0, 0.5)));
  CHECK(radii.image == doctest::Approx(std::hypot(4.0, 1.5 - (-4.0))));
  const double k2sq = 300.0;
  const Point2 image{0.0, -4.0};
  const cplx expected = q2d(ff, s, r, k2sq).value + q2d(ff, image, r, k2sq).value;
  CHECK(std::abs(q2d(hp, s, r, k2sq).value - expected) < 1e-14);
  CHECK(kernel_kind_from_string(to_string(KernelKind::half_plane)) == KernelKind::half_plane);
}

TEST_CASE("argument checks") {
  CHECK_THROWS_AS(hankel0_h1(0.0), DomainError);
  CHECK_THROWS_AS(bessel_k0(-1.0), DomainError);
}

}
