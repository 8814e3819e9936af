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

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <queue>
#include <span>
#include <sstream>
#include <vector>

#include "msloc/error.hpp"

namespace msloc {

/// 15-point Kronrod rule with its embedded 7-point Gauss rule (QUADPACK).
struct GaussKronrod15 {
  static constexpr std::array<double, 8> xk = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
  static constexpr std::array<double, 8> wk = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  // Gauss weights for the odd Kronrod nodes xk[1], xk[3], xk[5], xk[7].
  static constexpr std::array<double, 4> wg = {
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
};

struct VectorQuadResult {
  std::vector<std::complex<double>> values;
  double error = 0.0;
  std::size_t panels = 0;
  std::size_t evaluations = 0;
};

struct VectorQuadOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-6;
  std::size_t max_subdivisions = 20000;
};

/// Adaptive Gauss-Kronrod integration of n complex integrands sharing their
/// abscissae. `f(x, out)` writes the n values at x into out[0..n). The
/// initial panels are consecutive pairs of `edges`. Panels are bisected in
/// order of decreasing error (max over components of |K15 - G7|) until the
/// summed error is below max(abs_tol, rel_tol * max_j |I_j|). Results are
/// summed in left-to-right panel order, so they do not depend on the order
/// in which panels were refined.
template <class F>
VectorQuadResult integrate_vector(F&& f, std::size_t n, std::span<const double> edges,
                                  const VectorQuadOptions& opt) {
  using cplx = std::complex<double>;
  using GK = GaussKronrod15;
  VectorQuadResult res;
  res.values.assign(n, cplx{});
  if (edges.size() < 2 || n == 0) return res;

  struct Panel {
    double a, b, err;
    std::size_t slot;  // offset of the panel integrals in `store`
  };
  std::vector<cplx> store;
  std::vector<cplx> fx(n), gauss(n), kron(n);
  std::vector<std::size_t> free_slots;

  auto evaluate = [&](double a, double b) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    std::size_t slot;
    if (!free_slots.empty()) {
      slot = free_slots.back();
      free_slots.pop_back();
    } else {
      slot = store.size();
      store.resize(store.size() + n);
    }
    std::fill(gauss.begin(), gauss.end(), cplx{});
    std::fill(kron.begin(), kron.end(), cplx{});
    f(mid, fx.data());
    for (std::size_t j = 0; j < n; ++j) {
      kron[j] = fx[j] * GK::wk[7];
      gauss[j] = fx[j] * GK::wg[3];
    }
    for (std::size_t i = 0; i < 7; ++i) {
      const double dx = half * GK::xk[i];
      for (int side = 0; side < 2; ++side) {
        f(side == 0 ? mid - dx : mid + dx, fx.data());
        for (std::size_t j = 0; j < n; ++j) {
          kron[j] += fx[j] * GK::wk[i];
          if (i % 2 == 1) gauss[j] += fx[j] * GK::wg[i / 2];
        }
      }
    }
    res.evaluations += 15;
    double err = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      store[slot + j] = kron[j] * half;
      err = std::max(err, std::abs((kron[j] - gauss[j]) * half));
    }
    return Panel{a, b, err, slot};
  };

  auto by_error = [](const Panel& p, const Panel& q) {
    if (p.err != q.err) return p.err < q.err;
    return p.a > q.a;
  };
  std::priority_queue<Panel, std::vector<Panel>, decltype(by_error)> heap(by_error);
  std::vector<Panel> done;

  double total_err = 0.0;
  std::vector<cplx> total(n, cplx{});
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    if (!(edges[k + 1] > edges[k])) continue;
    const Panel p = evaluate(edges[k], edges[k + 1]);
    total_err += p.err;
    for (std::size_t j = 0; j < n; ++j) total[j] += store[p.slot + j];
    heap.push(p);
  }

  auto tolerance = [&]() {
    double peak = 0.0;
    for (const auto& v : total) peak = std::max(peak, std::abs(v));
    return std::max(opt.abs_tol, opt.rel_tol * peak);
  };

  std::size_t subdivisions = 0;
  while (!heap.empty() && total_err > tolerance()) {
    if (subdivisions >= opt.max_subdivisions) {
      std::ostringstream os;
      os << "adaptive quadrature did not converge after " << subdivisions
         << " subdivisions (error estimate " << total_err << ", tolerance " << tolerance()
         << ")";
      throw QuadratureError(os.str(), total_err);
    }
    const Panel p = heap.top();
    heap.pop();
    const double mid = 0.5 * (p.a + p.b);
    if (!(mid > p.a && mid < p.b)) {
      // Cannot split further in floating point; accept as is.
      done.push_back(p);
      continue;
    }
    const Panel left = evaluate(p.a, mid);
    const Panel right = evaluate(mid, p.b);
    total_err += left.err + right.err - p.err;
    for (std::size_t j = 0; j < n; ++j)
      total[j] += store[left.slot + j] + store[right.slot + j] - store[p.slot + j];
    free_slots.push_back(p.slot);
    heap.push(left);
    heap.push(right);
    ++subdivisions;
  }

  while (!heap.empty()) {
    done.push_back(heap.top());
    heap.pop();
  }
  std::sort(done.begin(), done.end(), [](const Panel& p, const Panel& q) { return p.a < q.a; });
  res.error = 0.0;
  for (const auto& p : done) {
    res.error += p.err;
    for (std::size_t j = 0; j < n; ++j) res.values[j] += store[p.slot + j];
  }
  res.panels = done.size();
  return res;
}

}  // namespace msloc
