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
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "msloc/scenario.hpp"
#include "msloc/specfun.hpp"
#include "msloc/spectral.hpp"

namespace msloc {

struct QuadratureSpec {
  double rel_tol = 1e-6;
  double abs_tol = 1e-12;
  std::size_t max_subdivisions = 20000;
  double truncation_db = 80.0;

  void validate() const;
};

/// Kernel matching the scenario: half-plane when the ground is enabled.
Kernel2D kernel_for(const Scenario& scenario);

struct IntegrationDomain {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> edges;  // initial panel boundaries, lo ... hi
  bool empty() const { return !(hi > lo); }
};

/// Evaluates the leakage-aware transfer integral
///   h = 1/(2 pi |v|) int q(k2(w)) g^(w' - w) exp(i (w - w0)(x_r - x_s) / v) dw
/// with k2(w)^2 = w^2/c^2 - (w - w0)^2/v^2, for one receiver and one bin at a
/// time. Sources that share a cross-section point are integrated together.
class TransferEngine {
 public:
  TransferEngine(const Scenario& scenario, const Window& window, const Kernel2D& kernel,
                 double f0, const QuadratureSpec& quad);

  /// Entries for receiver `receiver` at bin frequency omega_prime (rad/s)
  /// and the given sources, which must share y and z.
  std::vector<cplx> group(Vec3 receiver, double omega_prime,
                          std::span<const Vec3> sources) const;

  cplx entry(Vec3 receiver, double omega_prime, Vec3 source) const;

  IntegrationDomain domain(Vec3 receiver, double omega_prime, std::span<const Vec3> sources) const;

  double window_half_width() const { return window_half_width_; }
  double omega_minus() const { return omega_minus_; }
  double omega_plus() const { return omega_plus_; }

 private:
  Medium medium_;
  double v_;
  Window window_;
  Kernel2D kernel_;
  double omega0_;
  QuadratureSpec quad_;
  double window_half_width_;
  double omega_minus_;
  double omega_plus_;
  double collar_eps_;
  double tail_argument_;  // K0 argument where the evanescent integrand is negligible
};

struct TransferRow {
  std::size_t mic = 0;
  long bin = 0;
};

struct TransferMatrix {
  Eigen::MatrixXcd entries;
  std::vector<TransferRow> rows;
  std::size_t n_cols = 0;
  double delta_f = 1.0;
  std::string kernel;
  std::string scenario_hash;
  std::string window_hash;
  std::string selection_hash;
  std::string quadrature_hash;
  std::string key;  // combined cache key

  double row_frequency(std::size_t r) const { return static_cast<double>(rows.at(r).bin) * delta_f; }
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// Fills every (mic, bin) x source entry. Work is split into (row, cross-
/// section group) tasks that run in parallel; the result does not depend on
/// the thread count.
TransferMatrix assemble(const Scenario& scenario, const Window& window, const Kernel2D& kernel,
                        const BinSelection& selection, double f0, const QuadratureSpec& quad,
                        const ProgressFn& progress = {});

/// Single entry for microphone n, grid column l and bin frequency f_prime (Hz).
cplx transfer_entry(std::size_t n, std::size_t l, double f_prime, const Scenario& scenario,
                    const Window& window, const Kernel2D& kernel, double f0,
                    const QuadratureSpec& quad = {});

/// Infinite-window limit: the window transform is replaced by a delta at
/// f_prime, leaving q(k2(w')) exp(i (w' - w0)(x_r - x_s) / v) / (2 pi |v|).
/// f_prime must lie strictly inside the Doppler band.
cplx limit_transfer_entry(std::size_t n, std::size_t l, double f_prime,
                          const Scenario& scenario, const Kernel2D& kernel, double f0);

/// Ratio between a long-window transfer entry and its limit: the window
/// transform integrates to 2 pi fs g(center) with g(center) = 1.
double limit_scale(const Window& window);

/// Spatial period v_s / delta_f (m) produced by bins spaced delta_f apart.
double predicted_period(double delta_f, double v_s);

}  // namespace msloc
