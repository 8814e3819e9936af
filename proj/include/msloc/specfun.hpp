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

#include <complex>
#include <string>

namespace msloc {

using cplx = std::complex<double>;

/// H0^(1)(x) = J0(x) + i Y0(x) for x > 0.
cplx hankel0_h1(double x);

/// Modified Bessel function K0(x) for x > 0.
double bessel_k0(double x);

/// Free-field 2D solution on the evanescent side, (i/4) H0^(1)(i kappa r2),
/// which equals K0(kappa r2) / (2 pi).
cplx evanescent_kernel(double kappa, double r2);

enum class KernelKind { free_field, half_plane };

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& name);

struct Kernel2D {
  KernelKind kind = KernelKind::free_field;
  double z_plane = 0.0;  // reflecting plane, half_plane only
};

struct Point2 {
  double y = 0.0;
  double z = 0.0;
};

struct Q2dValue {
  cplx value;
  bool collar = false;  // |k2^2| fell inside the singular collar
};

/// Cross-section radii of a source-receiver pair; the image radius is zero
/// for the free-field kernel.
struct PairRadii {
  double direct = 0.0;
  double image = 0.0;
};

PairRadii pair_radii(const Kernel2D& kernel, Point2 source, Point2 receiver);

/// 2D field q-hat for the given radii and squared 2D wavenumber. Positive
/// k2_squared uses (i/4) H0^(1)(k2 r2), negative uses K0(kappa r2) / (2 pi).
/// Inside |k2_squared| < collar_eps^2 the value is taken at the collar edge
/// with the same sign and `collar` is set.
Q2dValue q2d_radii(const PairRadii& radii, double k2_squared, double collar_eps);

Q2dValue q2d(const Kernel2D& kernel, Point2 source, Point2 receiver, double k2_squared,
             double collar_eps = 0.0);

/// Collar half-width in wavenumber used by the transfer engine: 1e-6 w0 / c.
double collar_epsilon(double omega0, double c);

}  // namespace msloc
