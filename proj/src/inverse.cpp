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

#include "msloc/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/SVD>

#include "msloc/error.hpp"
#include "msloc/serialize.hpp"

namespace msloc {

SvdSystem::SvdSystem(const Eigen::MatrixXcd& H)
    : rows_(static_cast<std::size_t>(H.rows())), cols_(static_cast<std::size_t>(H.cols())) {
  if (H.size() == 0) throw ConfigError("cannot factor an empty matrix");
  if (!H.allFinite()) throw NumericalError("matrix contains non-finite entries");
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(H, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    std::ostringstream os;
    os << "SVD of a " << H.rows() << "x" << H.cols() << " matrix failed";
    throw NumericalError(os.str());
  }
  U_ = svd.matrixU();
  s_ = svd.singularValues();
  V_ = svd.matrixV();
}

std::size_t SvdSystem::numerical_rank() const {
  if (s_.size() == 0 || s_(0) == 0.0) return 0;
  const double tol = static_cast<double>(std::max(rows_, cols_)) *
                     std::numeric_limits<double>::epsilon() * s_(0);
  std::size_t r = 0;
  while (r < static_cast<std::size_t>(s_.size()) && s_(static_cast<Eigen::Index>(r)) > tol) ++r;
  return r;
}

SvdSystem::Projection SvdSystem::project(const Eigen::VectorXcd& p) const {
  if (static_cast<std::size_t>(p.size()) != rows_)
    throw ConfigError("observation length does not match the matrix rows");
  Projection proj;
  proj.beta = U_.adjoint() * p;
  proj.p_norm = p.norm();
  proj.outside = rows_ > cols_ ? (p - U_ * proj.beta).norm() : 0.0;
  return proj;
}

Eigen::VectorXcd SvdSystem::solve(const Projection& proj, double lambda) const {
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
  const auto k = static_cast<Eigen::Index>(s_.size());
  Eigen::VectorXcd coeff = Eigen::VectorXcd::Zero(k);
  const auto rank = static_cast<Eigen::Index>(numerical_rank());
  for (Eigen::Index i = 0; i < k; ++i) {
    const double s = s_(i);
    if (lambda == 0.0) {
      if (i < rank) coeff(i) = proj.beta(i) / s;
    } else if (s > 0.0) {
      coeff(i) = proj.beta(i) * (s / (s * s + lambda));
    }
  }
  return V_ * coeff;
}

LcurvePoint SvdSystem::point(const Projection& proj, double lambda) const {
  LcurvePoint pt;
  pt.lambda = lambda;
  const auto rank = static_cast<Eigen::Index>(numerical_rank());
  double res2 = proj.outside * proj.outside;
  double sol2 = 0.0;
  for (Eigen::Index i = 0; i < s_.size(); ++i) {
    const double s = s_(i);
    const double b2 = std::norm(proj.beta(i));
    double f = 0.0;
    double g = 0.0;
    if (lambda == 0.0) {
      if (i < rank) {
        f = 1.0;
        g = 1.0 / s;
      }
    } else if (s > 0.0) {
      f = s * s / (s * s + lambda);
      g = s / (s * s + lambda);
    }
    res2 += (1.0 - f) * (1.0 - f) * b2;
    sol2 += g * g * b2;
  }
  pt.residual = std::sqrt(res2);
  pt.norm = std::sqrt(sol2);
  return pt;
}

RegularizationResult tikhonov_solve(const Eigen::MatrixXcd& H, const Eigen::VectorXcd& p,
                                    double lambda) {
  if (H.rows() != p.size()) throw ConfigError("matrix rows and observation length differ");
  const SvdSystem svd(H);
  RegularizationResult out;
  out.a = svd.solve(svd.project(p), lambda);
  out.lambda = lambda;
  out.residual_norm = (H * out.a - p).norm();
  out.solution_norm = out.a.norm();
  return out;
}

std::vector<double> default_lambda_grid(const Eigen::VectorXd& singular_values,
                                        const LcurveOptions& opts) {
  if (!opts.grid.empty()) return opts.grid;
  if (singular_values.size() == 0 || !(singular_values(0) > 0.0))
    throw NumericalError("lambda grid needs a nonzero singular value");
  if (opts.n_points < 2) throw ConfigError("lambda grid needs at least two points");
  if (!(opts.min_ratio > 0.0 && opts.min_ratio < 1.0))
    throw ConfigError("lambda grid ratio must lie in (0, 1)");
  const double top = singular_values(0) * singular_values(0);
  double bottom = opts.min_ratio * top;
  if (opts.cover_spectrum) {
    const double eps = std::numeric_limits<double>::epsilon();
    const auto m = static_cast<double>(singular_values.size());
    double s_low = singular_values(0);
    for (Eigen::Index i = 0; i < singular_values.size(); ++i)
      if (singular_values(i) > m * eps * singular_values(0)) s_low = singular_values(i);
    bottom = std::min(bottom, 0.01 * s_low * s_low);
  }
  const double lo = std::log10(bottom);
  const double hi = std::log10(top);
  const auto n = std::max(opts.n_points,
                          static_cast<std::size_t>(std::ceil(opts.points_per_decade * (hi - lo))) + 1);
  std::vector<double> grid(n);
  for (std::size_t k = 0; k < n; ++k)
    grid[k] = std::pow(10.0, lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1));
  return grid;
}

double lcurve_curvature(const SvdSystem& svd, const SvdSystem::Projection& proj, double lambda) {
  if (!(lambda > 0.0)) throw ConfigError("curvature needs a positive lambda");
  // Derivatives with respect to lam = sqrt(lambda); curvature does not
  // depend on the parametrization.
  const double lam = std::sqrt(lambda);
  const auto& s = svd.singular_values();
  const auto rank = static_cast<Eigen::Index>(svd.numerical_rank());
  double eta2 = 0.0, rho2 = proj.outside * proj.outside;
  double phi = 0.0, psi = 0.0, dphi = 0.0, dpsi = 0.0;
  for (Eigen::Index i = 0; i < rank; ++i) {
    const double si = s(i);
    const double b2 = std::norm(proj.beta(i));
    const double x2 = b2 / (si * si);
    const double f = si * si / (si * si + lambda);
    const double cf = 1.0 - f;
    const double f1 = -2.0 * f * cf / lam;
    const double f2 = -f1 * (3.0 - 4.0 * f) / lam;
    eta2 += f * f * x2;
    rho2 += cf * cf * b2;
    phi += f * f1 * x2;
    psi += cf * f1 * b2;
    dphi += (f1 * f1 + f * f2) * x2;
    dpsi += (-f1 * f1 + cf * f2) * b2;
  }
  for (Eigen::Index i = rank; i < s.size(); ++i) rho2 += std::norm(proj.beta(i));
  const double eta = std::sqrt(eta2);
  const double rho = std::sqrt(rho2);
  if (!(eta > 0.0) || !(rho > 0.0)) return 0.0;

  const double deta = phi / eta;
  const double drho = -psi / rho;
  const double ddeta = dphi / eta - deta * deta / eta;
  const double ddrho = -dpsi / rho - drho * drho / rho;
  const double dle = deta / eta;
  const double dlr = drho / rho;
  const double ddle = ddeta / eta - dle * dle;
  const double ddlr = ddrho / rho - dlr * dlr;
  const double denom = std::pow(dlr * dlr + dle * dle, 1.5);
  if (!(denom > 0.0)) return 0.0;
  return (dlr * ddle - ddlr * dle) / denom;
}

CornerResult lcurve_corner(const SvdSystem& svd, const SvdSystem::Projection& proj,
                           const std::vector<double>& lambda_grid, double lambda_floor) {
  if (lambda_grid.size() < 20) throw ConfigError("L-curve grid needs at least 20 points");
  for (std::size_t k = 0; k < lambda_grid.size(); ++k) {
    if (!(lambda_grid[k] > 0.0)) throw ConfigError("L-curve grid values must be positive");
    if (k > 0 && !(lambda_grid[k] > lambda_grid[k - 1]))
      throw ConfigError("L-curve grid must be strictly increasing");
  }
  CornerResult out;
  out.trace.reserve(lambda_grid.size());
  for (double lambda : lambda_grid) {
    auto pt = svd.point(proj, lambda);
    pt.curvature = lcurve_curvature(svd, proj, lambda);
    out.trace.push_back(pt);
  }

  std::optional<std::size_t> best;
  std::optional<std::size_t> first_allowed;
  for (std::size_t k = 0; k < out.trace.size(); ++k) {
    if (lambda_grid[k] < lambda_floor) continue;
    if (!first_allowed) first_allowed = k;
    if (!best || out.trace[k].curvature > out.trace[*best].curvature) best = k;
  }
  if (!best) throw ConfigError("lambda floor lies above the whole grid");

  if (!(out.trace[*best].curvature > 0.0)) {
    // Without a corner the smallest lambda is still the right answer when
    // it fits the data or leaves every retained filter factor above 0.99.
    const auto& pt = out.trace[*first_allowed];
    const auto rank = svd.numerical_rank();
    const double s_low = rank ? svd.singular_values()(static_cast<Eigen::Index>(rank - 1)) : 0.0;
    const bool fits = proj.p_norm > 0.0 && pt.residual <= 1e-6 * proj.p_norm;
    const bool unfiltered = pt.lambda <= 0.01 * s_low * s_low;
    if (fits || unfiltered) {
      out.index = *first_allowed;
      out.lambda = lambda_grid[out.index];
      return out;
    }
    throw NoCornerError(
        "the L-curve has no convex corner on the lambda grid; correlated or absent noise "
        "can flatten it, so add uncorrelated stabilization noise to the recording");
  }
  out.index = *best;
  out.lambda = lambda_grid[out.index];
  return out;
}

CornerResult lcurve_corner(const Eigen::MatrixXcd& H, const Eigen::VectorXcd& p,
                           const std::vector<double>& lambda_grid, double lambda_floor) {
  const SvdSystem svd(H);
  return lcurve_corner(svd, svd.project(p), lambda_grid, lambda_floor);
}

ObservationVector extract_observations(const Recording& recording, const Window& window,
                                       const TransferMatrix& H) {
  if (std::abs(H.delta_f - window.delta_f()) > 1e-9 * window.delta_f())
    throw ConfigError("transfer matrix was built for a different window length");
  ObservationVector obs;
  obs.values.resize(static_cast<Eigen::Index>(H.rows.size()));
  for (std::size_t r = 0; r < H.rows.size(); ++r)
    obs.values(static_cast<Eigen::Index>(r)) =
        windowed_dft(recording, H.rows[r].mic, window, H.rows[r].bin);
  obs.source_hash = hash_recording(recording);
  return obs;
}

RegularizationResult solve_observations(const TransferMatrix& H, const ObservationVector& p,
                                        const LcurveOptions& opts) {
  if (static_cast<std::size_t>(p.values.size()) != H.rows.size())
    throw ConfigError("observation vector does not match the transfer matrix rows");
  RegularizationResult out;
  out.metadata["transfer_key"] = H.key;
  out.metadata["scenario_hash"] = H.scenario_hash;
  out.metadata["window_hash"] = H.window_hash;
  out.metadata["selection_hash"] = H.selection_hash;
  out.metadata["observation_hash"] = p.source_hash;

  if (p.values.norm() == 0.0) {
    out.a = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(H.n_cols));
    return out;
  }
  const SvdSystem svd(H.entries);
  const auto proj = svd.project(p.values);
  const auto grid = default_lambda_grid(svd.singular_values(), opts);
  auto corner = lcurve_corner(svd, proj, grid, opts.lambda_floor);
  out.lambda = corner.lambda;
  out.a = svd.solve(proj, corner.lambda);
  out.residual_norm = (H.entries * out.a - p.values).norm();
  out.solution_norm = out.a.norm();
  out.lcurve_trace = std::move(corner.trace);
  return out;
}

RegularizationResult solve_pipeline(const TransferMatrix& H, const Recording& recording,
                                    const Window& window, const LcurveOptions& opts) {
  return solve_observations(H, extract_observations(recording, window, H), opts);
}

}  // namespace msloc
