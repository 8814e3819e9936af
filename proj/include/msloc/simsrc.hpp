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
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "msloc/scenario.hpp"

namespace msloc {

using cplx = std::complex<double>;

/// Tonal source s(t) = amplitude * exp(-i 2 pi f0 t).
struct SignalSpec {
  double f0 = 1000.0;
  cplx amplitude{1.0, 0.0};

  double omega0() const;
  void validate() const;
};

/// Sampled complex pressures, one row per microphone. Sample j of every
/// channel is taken at t_start + j / fs.
struct Recording {
  double fs = 10000.0;
  double t_start = 0.0;
  Eigen::MatrixXcd channels;
  std::string filter_note;  // description of any noise filter applied

  std::size_t n_channels() const { return static_cast<std::size_t>(channels.rows()); }
  std::size_t n_samples() const { return static_cast<std::size_t>(channels.cols()); }
  double time(std::size_t j) const { return t_start + static_cast<double>(j) / fs; }
};

/// Correlated noise radiated by a stationary point source.
struct NoiseSpec {
  double snr_db = std::numeric_limits<double>::infinity();
  Vec3 source_position{20.0, 10.0, 1.0};
  double band_low = 0.0;
  double band_high = 0.0;
  std::uint64_t seed = 1;
};

struct RetardedSolution {
  double tau = 0.0;       // emission time
  double distance = 0.0;  // c (t - tau)
  double mach_r = 0.0;    // Mach number along source -> receiver at emission
};

/// Emission time of the wave arriving at `receiver` at time t from a source
/// at `start` (its position at t = 0) moving along x with speed v.
RetardedSolution retarded_solution(Vec3 receiver, Vec3 start, double v, double c, double t);

double retarded_time(Vec3 receiver, const MotionSpec& motion, const Medium& medium, double t);

/// Pressure of the moving monopole, plus its mirror image when the ground
/// plane is enabled. Throws EvaluationError if the receiver lies on the path.
std::vector<cplx> simulate_pressure(const Scenario& scenario, const SignalSpec& signal,
                                    std::size_t mic, std::span<const double> times);

/// Same field for an arbitrary receiver position.
std::vector<cplx> simulate_at(const Scenario& scenario, const SignalSpec& signal,
                              Vec3 receiver, std::span<const double> times);

/// Samples every microphone on [t_begin, t_end): round((t_end - t_begin) fs)
/// samples at the interval midpoints t_begin + (j + 1/2) / fs, so a span
/// symmetric about zero is symmetric sample by sample.
Recording record_array(const Scenario& scenario, const SignalSpec& signal, double fs,
                       double t_begin, double t_end);

/// Butterworth order used by add_noise for a band: smallest order >= 4 that
/// is 60 dB down at 0.8 * low and 1.2 * high after forward-backward filtering.
int noise_filter_order(double band_low, double band_high);

/// Adds band-limited Gaussian noise from a stationary point source, delayed
/// by distance / c and attenuated by 1 / (4 pi r) at each microphone. The
/// level is set so that peak |p| on channel 0 over the noise RMS on channel 0
/// equals snr_db exactly. An infinite snr_db returns the input unchanged.
Recording add_noise(const Recording& recording, const Scenario& scenario,
                    const NoiseSpec& noise);

/// Independent white complex Gaussian noise on each channel, with RMS
/// 10^(-snr_db/20) times that channel's peak magnitude.
Recording add_stabilization_noise(const Recording& recording, double snr_db,
                                  std::uint64_t seed, bool enabled = true);

/// 20 log10(peak |signal| / RMS |noise|) for one channel.
double measure_snr_db(std::span<const cplx> signal, std::span<const cplx> noise);

/// Deterministic per-channel seed derived from a master seed.
std::uint64_t substream_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace msloc
