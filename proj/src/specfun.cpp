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

#include "msloc/specfun.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/bessel.hpp>

#include "msloc/error.hpp"

namespace msloc {

namespace {

constexpr double kPi = std::numbers::pi;

cplx free_field(double r, double k2_squared) {
  if (k2_squared > 0.0) return cplx(0.0, 0.25) * hankel0_h1(std::sqrt(k2_squared) * r);
  return evanescent_kernel(std::sqrt(-k2_squared), r);
}

}  // namespace

cplx hankel0_h1(double x) {
  if (!(x > 0.0)) throw DomainError("H0^(1) requires a positive argument");
  return {boost::math::cyl_bessel_j(0, x), boost::math::cyl_neumann(0, x)};
}

double bessel_k0(double x) {
  if (!(x > 0.0)) throw DomainError("K0 requires a positive argument");
  // Far in the tail K0 underflows; Boost reports that as an error.
  if (x > 700.0) return 0.0;
  return boost::math::cyl_bessel_k(0, x);
}

cplx evanescent_kernel(double kappa, double r2) {
  if (!(kappa > 0.0) || !(r2 > 0.0))
    throw DomainError("evanescent kernel requires kappa > 0 and r2 > 0");
  return {bessel_k0(kappa * r2) / (2.0 * kPi), 0.0};
}

std::string to_string(KernelKind kind) {
  return kind == KernelKind::free_field ? "free_field" : "half_plane";
}

KernelKind kernel_kind_from_string(const std::string& name) {
  if (name == "free_field" || name == "free") return KernelKind::free_field;
  if (name == "half_plane" || name == "mirror") return KernelKind::half_plane;
  throw ConfigError("unknown kernel kind '" + name + "'");
}

PairRadii pair_radii(const Kernel2D& kernel, Point2 source, Point2 receiver) {
  PairRadii r;
  r.direct = std::hypot(receiver.y - source.y, receiver.z - source.z);
  if (!(r.direct > 0.0)) throw DomainError("source and receiver share a cross-section point");
  if (kernel.kind == KernelKind::half_plane) {
    const double z_image = 2.0 * kernel.z_plane - source.z;
    r.image = std::hypot(receiver.y - source.y, receiver.z - z_image);
    if (!(r.image > 0.0)) throw DomainError("receiver coincides with the image source");
  }
  return r;
}

Q2dValue q2d_radii(const PairRadii& radii, double k2_squared, double collar_eps) {
  Q2dValue out;
  const double collar2 = collar_eps * collar_eps;
  if (std::abs(k2_squared) < collar2 || k2_squared == 0.0) {
    out.collar = true;
    k2_squared = k2_squared < 0.0 ? -collar2 : collar2;
    if (k2_squared == 0.0) throw DomainError("q2d evaluated at the singular wavenumber");
  }
  out.value = free_field(radii.direct, k2_squared);
  if (radii.image > 0.0) out.value += free_field(radii.image, k2_squared);
  return out;
}

Q2dValue q2d(const Kernel2D& kernel, Point2 source, Point2 receiver, double k2_squared,
             double collar_eps) {
  return q2d_radii(pair_radii(kernel, source, receiver), k2_squared, collar_eps);
}

double collar_epsilon(double omega0, double c) { return 1e-6 * omega0 / c; }

}  // namespace msloc
