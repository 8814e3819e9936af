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
#include <optional>
#include <string>
#include <vector>

#include "msloc/scenario.hpp"
#include "msloc/simsrc.hpp"

namespace msloc {

enum class WindowKind { hanning, rectangular };

std::string to_string(WindowKind kind);
WindowKind window_kind_from_string(const std::string& name);

/// Sampled analysis window. Sample n sits at
/// center + (n - (N_g - 1) / 2) / fs, so the support is symmetric about
/// `center`. The Hanning samples follow the endpoint-free convention
/// 0.5 (1 - cos(2 pi (n + 1) / (N_g + 1))) and are all strictly positive.
class Window {
 public:
  Window(WindowKind kind, double duration, double fs, double center = 0.0);

  WindowKind kind() const { return kind_; }
  double duration() const { return duration_; }
  double fs() const { return fs_; }
  double center() const { return center_; }
  std::size_t size() const { return samples_.size(); }
  const std::vector<double>& samples() const { return samples_; }
  double time(std::size_t n) const;
  /// Bin spacing fs / N_g in Hz.
  double delta_f() const { return fs_ / static_cast<double>(samples_.size()); }
  double sum() const;

 private:
  WindowKind kind_;
  double duration_;
  double fs_;
  double center_;
  std::vector<double> samples_;
};

/// Sum_n g_n exp(i omega t_n) in closed form (Dirichlet kernels).
cplx window_dtft(const Window& window, double omega);

/// sin(N theta / 2) / sin(theta / 2) with the removable singularities filled in.
double dirichlet(std::size_t n, double theta);

/// Sum_n p(t_n) g_n exp(i omega_m t_n) with omega_m = 2 pi m delta_f, using
/// the absolute sample times. The window grid must coincide with the
/// recording grid; throws ConfigError naming the missing span otherwise.
cplx windowed_dft(const Recording& recording, std::size_t channel, const Window& window,
                  long bin);

/// Half-width (rad/s) beyond which |window_dtft| stays more than
/// threshold_db below its value at zero, out to the Nyquist limit. A window
/// that never gets there throws ConfigError unless `cap` is given, in which
/// case the cap is returned.
double decay_limits(const Window& window, double threshold_db = 80.0,
                    std::optional<double> cap = std::nullopt);

enum class BinStrategy { single, regular, random };

std::string to_string(BinStrategy strategy);
BinStrategy bin_strategy_from_string(const std::string& name);

struct FrequencyBand {
  double low = 0.0;
  double high = 0.0;
};

/// [0.92 f0, 1.12 f0] clipped to the Doppler band.
FrequencyBand default_band(double f0, double v_s, const Medium& medium);

/// First and last bin index whose frequency lies in the band.
struct BinRange {
  long first = 0;
  long last = -1;
  std::size_t count() const { return last >= first ? static_cast<std::size_t>(last - first + 1) : 0; }
};
BinRange available_bins(const FrequencyBand& band, double delta_f);

/// Per-microphone sets of DFT bin indices. Frequencies are index * delta_f.
struct BinSelection {
  BinStrategy strategy = BinStrategy::single;
  std::size_t M = 1;
  FrequencyBand band;
  double delta_f = 1.0;
  std::uint64_t seed = 0;
  std::vector<std::vector<long>> sets;

  std::size_t n_mics() const { return sets.size(); }
  std::size_t n_rows() const;
  double frequency(long bin) const { return static_cast<double>(bin) * delta_f; }
};

/// single: the bin nearest f0 for every microphone. regular: M bins equally
/// spaced over the available bins (exactly regular only when the spacing is
/// an integer number of bins), shared by all microphones. random: M distinct
/// bins per microphone, drawn from a per-microphone stream of `seed`.
BinSelection select_bins(BinStrategy strategy, const FrequencyBand& band, const Window& window,
                         std::size_t M, std::size_t n_mics, std::uint64_t seed, double f0);

}  // namespace msloc
