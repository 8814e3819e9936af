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

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "msloc/simsrc.hpp"
#include "msloc/spectral.hpp"
#include "msloc/transfer.hpp"

namespace msloc {

struct ObservationVector {
  Eigen::VectorXcd values;
  std::string source_hash;
};

struct LcurvePoint {
  double lambda = 0.0;
  double residual = 0.0;
  double norm = 0.0;
  double curvature = 0.0;
};

struct RegularizationResult {
  Eigen::VectorXcd a;
  double lambda = 0.0;
  double residual_norm = 0.0;
  double solution_norm = 0.0;
  std::vector<LcurvePoint> lcurve_trace;
  std::map<std::string, std::string> metadata;  // hashes and provenance
};

/// Thin SVD H = U diag(s) V^* with the projections needed by the Tikhonov
/// filter and the L-curve.
class SvdSystem {
 public:
  explicit SvdSystem(const Eigen::MatrixXcd& H);

  const Eigen::MatrixXcd& U() const { return U_; }
  const Eigen::VectorXd& singular_values() const { return s_; }
  const Eigen::MatrixXcd& V() const { return V_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  /// Singular values kept for the unregularized pseudo-inverse.
  std::size_t numerical_rank() const;

  /// U^* p and the norm of the part of p outside range(U).
  struct Projection {
    Eigen::VectorXcd beta;
    double outside = 0.0;
    double p_norm = 0.0;
  };
  Projection project(const Eigen::VectorXcd& p) const;

  /// a = V diag(s / (s^2 + lambda)) U^* p; lambda = 0 gives the
  /// minimum-norm least-squares solution.
  Eigen::VectorXcd solve(const Projection& proj, double lambda) const;

  /// Residual and solution norms from the SVD sums.
  LcurvePoint point(const Projection& proj, double lambda) const;

 private:
  Eigen::MatrixXcd U_;
  Eigen::VectorXd s_;
  Eigen::MatrixXcd V_;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
};

/// Minimizer of ||H a - p||^2 + lambda ||a||^2.
RegularizationResult tikhonov_solve(const Eigen::MatrixXcd& H, const Eigen::VectorXcd& p,
                                    double lambda);

struct LcurveOptions {
  std::size_t n_points = 60;      // minimum number of grid points
  double points_per_decade = 10.0;
  double min_ratio = 1e-6;        // smallest lambda relative to s_max^2
  bool cover_spectrum = true;     // extend down to 0.01 s_low^2
  double lambda_floor = 0.0;      // corner search ignores lambdas below this
  std::vector<double> grid;       // explicit grid overrides everything above
};

/// Log-spaced lambdas from min_ratio * s_max^2 to s_max^2. With
/// cover_spectrum the lower end moves down to 0.01 s_low^2, s_low being the
/// smallest singular value above the rank tolerance, so the corner of a
/// badly conditioned system is always inside the grid. The grid has at
/// least n_points points and points_per_decade per decade.
std::vector<double> default_lambda_grid(const Eigen::VectorXd& singular_values,
                                        const LcurveOptions& opts = {});

struct CornerResult {
  double lambda = 0.0;
  std::size_t index = 0;
  std::vector<LcurvePoint> trace;
};

/// Signed curvature of (log residual, log solution norm) at lambda, from
/// the analytic lambda-derivatives of both norms.
double lcurve_curvature(const SvdSystem& svd, const SvdSystem::Projection& proj, double lambda);

/// Maximum-curvature lambda on an increasing grid of at least 20 points.
/// A curve without positive curvature falls back to the smallest allowed
/// lambda when that lambda fits the data (relative residual <= 1e-6) or
/// sits below 0.01 s_low^2, where regularization no longer acts; otherwise
/// NoCornerError is thrown.
CornerResult lcurve_corner(const SvdSystem& svd, const SvdSystem::Projection& proj,
                           const std::vector<double>& lambda_grid, double lambda_floor = 0.0);

CornerResult lcurve_corner(const Eigen::MatrixXcd& H, const Eigen::VectorXcd& p,
                           const std::vector<double>& lambda_grid, double lambda_floor = 0.0);

/// Windowed DFT of the recording at every (mic, bin) row of H.
ObservationVector extract_observations(const Recording& recording, const Window& window,
                                       const TransferMatrix& H);

/// Observations, L-curve corner and Tikhonov solve in one call.
RegularizationResult solve_pipeline(const TransferMatrix& H, const Recording& recording,
                                    const Window& window, const LcurveOptions& opts = {});

RegularizationResult solve_observations(const TransferMatrix& H, const ObservationVector& p,
                                        const LcurveOptions& opts = {});

}  // namespace msloc
