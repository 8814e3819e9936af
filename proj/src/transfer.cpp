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

#include "msloc/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "msloc/error.hpp"
#include "msloc/quadrature.hpp"
#include "msloc/serialize.hpp"

namespace msloc {

namespace {

constexpr double kPi = std::numbers::pi;

// Sources with identical cross-section coordinates, in column order.
struct ColumnGroup {
  std::vector<std::size_t> columns;
  std::vector<Vec3> points;
};

std::vector<ColumnGroup> group_columns(const SourceGrid& grid) {
  std::map<std::pair<double, double>, std::size_t> lookup;
  std::vector<ColumnGroup> groups;
  for (std::size_t l = 0; l < grid.size(); ++l) {
    const Vec3& p = grid.point(l);
    auto [it, inserted] = lookup.emplace(std::make_pair(p.y, p.z), groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].columns.push_back(l);
    groups[it->second].points.push_back(p);
  }
  return groups;
}

}  // namespace

void QuadratureSpec::validate() const {
  if (!(rel_tol > 0.0 && rel_tol <= 1e-2)) throw ConfigError("rel_tol must lie in (0, 1e-2]");
  if (!(abs_tol > 0.0)) throw ConfigError("abs_tol must be positive");
  if (!(truncation_db > 0.0)) throw ConfigError("truncation_db must be positive");
  if (max_subdivisions == 0) throw ConfigError("max_subdivisions must be positive");
}

Kernel2D kernel_for(const Scenario& scenario) {
  Kernel2D k;
  if (scenario.ground.enabled) {
    k.kind = KernelKind::half_plane;
    k.z_plane = scenario.ground.z_plane;
  }
  return k;
}

TransferEngine::TransferEngine(const Scenario& scenario, const Window& window,
                               const Kernel2D& kernel, double f0, const QuadratureSpec& quad)
    : medium_(scenario.medium),
      v_(scenario.motion.v_s),
      window_(window),
      kernel_(kernel),
      omega0_(2.0 * kPi * f0),
      quad_(quad) {
  quad_.validate();
  if (v_ == 0.0) throw ConfigError("transfer functions need a nonzero source speed");
  const auto band = doppler_band(f0, v_, medium_);
  omega_minus_ = 2.0 * kPi * band.f_minus;
  omega_plus_ = 2.0 * kPi * band.f_plus;
  window_half_width_ = decay_limits(window_, quad_.truncation_db);
  collar_eps_ = collar_epsilon(omega0_, medium_.c);

  // Beyond K0(X) below this level the evanescent tail is far under abs_tol.
  const double images = kernel_.kind == KernelKind::half_plane ? 2.0 : 1.0;
  const double target =
      0.01 * quad_.abs_tol * (2.0 * kPi) * (2.0 * kPi * std::abs(v_)) / (images * window_.sum());
  double lo = 1e-3;
  double hi = 700.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (bessel_k0(mid) > target ? lo : hi) = mid;
  }
  tail_argument_ = hi;
}

IntegrationDomain TransferEngine::domain(Vec3 receiver, double omega_prime,
                                         std::span<const Vec3> sources) const {
  IntegrationDomain d;
  if (sources.empty()) return d;
  const Point2 src{sources.front().y, sources.front().z};
  const auto radii = pair_radii(kernel_, src, {receiver.y, receiver.z});
  const double r_min = radii.image > 0.0 ? std::min(radii.direct, radii.image) : radii.direct;

  // Frequencies where kappa reaches tail_argument / r_min: roots of
  // (1/v^2 - 1/c^2) w^2 - 2 w0 w / v^2 + w0^2 / v^2 - kappa^2 = 0.
  const double kappa = tail_argument_ / r_min;
  const double iv2 = 1.0 / (v_ * v_);
  const double a = iv2 - 1.0 / (medium_.c * medium_.c);
  const double b = -2.0 * omega0_ * iv2;
  const double cc = omega0_ * omega0_ * iv2 - kappa * kappa;
  const double disc = std::sqrt(b * b - 4.0 * a * cc);
  const double w_low = (-b - disc) / (2.0 * a);
  const double w_high = (-b + disc) / (2.0 * a);

  d.lo = std::max(omega_prime - window_half_width_, w_low);
  d.hi = std::min(omega_prime + window_half_width_, w_high);
  if (d.empty()) return d;

  double max_dx = 0.0;
  for (const auto& s : sources) max_dx = std::max(max_dx, std::abs(receiver.x - s.x));
  double h0 = 2.0 * kPi * window_.delta_f();
  if (max_dx > 0.0) h0 = std::min(h0, 2.0 * kPi * std::abs(v_) / max_dx);

  std::vector<double> cuts = {d.lo, d.hi};
  for (double w : {omega_minus_, omega_plus_, omega_prime})
    if (w > d.lo && w < d.hi) cuts.push_back(w);
  std::sort(cuts.begin(), cuts.end());
  d.edges.push_back(cuts.front());
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double len = cuts[k + 1] - cuts[k];
    if (!(len > 0.0)) continue;
    const auto pieces = static_cast<std::size_t>(std::max(1.0, std::ceil(len / h0)));
    for (std::size_t i = 1; i < pieces; ++i)
      d.edges.push_back(cuts[k] + len * static_cast<double>(i) / static_cast<double>(pieces));
    d.edges.push_back(cuts[k + 1]);
  }
  return d;
}

std::vector<cplx> TransferEngine::group(Vec3 receiver, double omega_prime,
                                        std::span<const Vec3> sources) const {
  const std::size_t n = sources.size();
  std::vector<cplx> out(n, cplx{});
  if (n == 0) return out;
  for (const auto& s : sources)
    if (s.y != sources.front().y || s.z != sources.front().z)
      throw ConfigError("grouped sources must share their cross-section point");

  const auto d = domain(receiver, omega_prime, sources);
  if (d.empty()) return out;
  const auto radii =
      pair_radii(kernel_, {sources.front().y, sources.front().z}, {receiver.y, receiver.z});

  std::vector<double> dx(n);
  for (std::size_t j = 0; j < n; ++j) dx[j] = receiver.x - sources[j].x;
  bool uniform = n > 2;
  const double step = n > 1 ? dx[1] - dx[0] : 0.0;
  for (std::size_t j = 2; j < n && uniform; ++j)
    uniform = std::abs((dx[j] - dx[j - 1]) - step) <= 1e-12 * std::max(1.0, std::abs(step));

  const double c2 = medium_.c * medium_.c;
  const double v2 = v_ * v_;
  auto integrand = [&](double w, cplx* values) {
    const double k2sq = w * w / c2 - (w - omega0_) * (w - omega0_) / v2;
    const cplx base =
        q2d_radii(radii, k2sq, collar_eps_).value * window_dtft(window_, omega_prime - w);
    const double alpha = (w - omega0_) / v_;
    if (uniform) {
      cplx phase = std::polar(1.0, alpha * dx[0]);
      const cplx rot = std::polar(1.0, alpha * step);
      for (std::size_t j = 0; j < n; ++j) {
        values[j] = base * phase;
        phase *= rot;
      }
    } else {
      for (std::size_t j = 0; j < n; ++j) values[j] = base * std::polar(1.0, alpha * dx[j]);
    }
  };

  VectorQuadOptions opt;
  const double prefactor = 1.0 / (2.0 * kPi * std::abs(v_));
  // Tolerances are stated for the entries, which carry the prefactor.
  opt.abs_tol = quad_.abs_tol / prefactor;
  opt.rel_tol = quad_.rel_tol;
  opt.max_subdivisions = quad_.max_subdivisions;
  const auto res = integrate_vector(integrand, n, d.edges, opt);
  for (std::size_t j = 0; j < n; ++j) out[j] = res.values[j] * prefactor;
  return out;
}

cplx TransferEngine::entry(Vec3 receiver, double omega_prime, Vec3 source) const {
  const Vec3 one[1] = {source};
  return group(receiver, omega_prime, one).front();
}

TransferMatrix assemble(const Scenario& scenario, const Window& window, const Kernel2D& kernel,
                        const BinSelection& selection, double f0, const QuadratureSpec& quad,
                        const ProgressFn& progress) {
  if (selection.n_mics() != scenario.array.size())
    throw ConfigError("bin selection and array disagree on the microphone count");
  if (std::abs(selection.delta_f - window.delta_f()) > 1e-9 * window.delta_f())
    throw ConfigError("bin selection was made for a different window length");
  const TransferEngine engine(scenario, window, kernel, f0, quad);

  TransferMatrix tm;
  tm.delta_f = selection.delta_f;
  tm.n_cols = scenario.grid.size();
  tm.kernel = to_string(kernel.kind);
  for (std::size_t n = 0; n < selection.n_mics(); ++n)
    for (long bin : selection.sets[n]) tm.rows.push_back({n, bin});
  tm.entries.resize(static_cast<Eigen::Index>(tm.rows.size()),
                    static_cast<Eigen::Index>(tm.n_cols));

  const auto groups = group_columns(scenario.grid);
  const std::size_t n_tasks = tm.rows.size() * groups.size();
  std::mutex guard;
  std::exception_ptr failure;
  std::size_t finished = 0;

#ifdef MSLOC_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::size_t task = 0; task < n_tasks; ++task) {
    {
      std::lock_guard<std::mutex> lock(guard);
      if (failure) continue;
    }
    const std::size_t r = task / groups.size();
    const auto& grp = groups[task % groups.size()];
    try {
      const auto& row = tm.rows[r];
      const double omega_prime = 2.0 * kPi * tm.row_frequency(r);
      const auto values =
          engine.group(scenario.array.positions[row.mic], omega_prime, grp.points);
      for (std::size_t j = 0; j < values.size(); ++j) {
        if (!std::isfinite(values[j].real()) || !std::isfinite(values[j].imag()))
          throw NumericalError("non-finite transfer entry");
        tm.entries(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(grp.columns[j])) =
            values[j];
      }
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "transfer entry (row " << r << ", mic " << tm.rows[r].mic << ", bin "
         << tm.rows[r].bin << ", column " << grp.columns.front() << "): " << e.what();
      std::lock_guard<std::mutex> lock(guard);
      if (!failure) failure = std::make_exception_ptr(NumericalError(os.str()));
      continue;
    }
    std::lock_guard<std::mutex> lock(guard);
    ++finished;
    if (progress) progress(finished, n_tasks);
  }
  if (failure) std::rethrow_exception(failure);

  tm.scenario_hash = hash_scenario(scenario);
  tm.window_hash = hash_window(window);
  tm.selection_hash = hash_selection(selection);
  tm.quadrature_hash = hash_quadrature(quad);
  tm.key = transfer_key(scenario, window, kernel, selection, f0, quad);
  return tm;
}

cplx transfer_entry(std::size_t n, std::size_t l, double f_prime, const Scenario& scenario,
                    const Window& window, const Kernel2D& kernel, double f0,
                    const QuadratureSpec& quad) {
  if (n >= scenario.array.size()) throw ConfigError("microphone index out of range");
  const TransferEngine engine(scenario, window, kernel, f0, quad);
  return engine.entry(scenario.array.positions[n], 2.0 * kPi * f_prime, scenario.grid.point(l));
}

cplx limit_transfer_entry(std::size_t n, std::size_t l, double f_prime,
                          const Scenario& scenario, const Kernel2D& kernel, double f0) {
  if (n >= scenario.array.size()) throw ConfigError("microphone index out of range");
  const double v = scenario.motion.v_s;
  const double c = scenario.medium.c;
  const auto band = doppler_band(f0, v, scenario.medium);
  if (!(f_prime > band.f_minus && f_prime < band.f_plus))
    throw DomainError("limit transfer entry needs a frequency strictly inside the Doppler band");
  const double w = 2.0 * kPi * f_prime;
  const double w0 = 2.0 * kPi * f0;
  const double k2sq = w * w / (c * c) - (w - w0) * (w - w0) / (v * v);
  const double eps = collar_epsilon(w0, c);
  if (k2sq < eps * eps) throw DomainError("limit transfer entry evaluated at a singular frequency");
  const Vec3 r = scenario.array.positions[n];
  const Vec3 s = scenario.grid.point(l);
  const auto q = q2d(kernel, {s.y, s.z}, {r.y, r.z}, k2sq);
  return q.value * std::polar(1.0, (w - w0) * (r.x - s.x) / v) / (2.0 * kPi * std::abs(v));
}

double limit_scale(const Window& window) { return 2.0 * kPi * window.fs(); }

double predicted_period(double delta_f, double v_s) {
  if (!(delta_f > 0.0)) throw DomainError("bin spacing must be positive");
  return std::abs(v_s) / delta_f;
}

}  // namespace msloc
