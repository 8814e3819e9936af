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

#include "msloc/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "msloc/error.hpp"

namespace msloc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kBinSlack = 1e-9;

}  // namespace

std::string to_string(WindowKind kind) {
  return kind == WindowKind::hanning ? "hanning" : "rectangular";
}

WindowKind window_kind_from_string(const std::string& name) {
  if (name == "hanning" || name == "hann") return WindowKind::hanning;
  if (name == "rectangular" || name == "rect") return WindowKind::rectangular;
  throw ConfigError("unknown window kind '" + name + "'");
}

Window::Window(WindowKind kind, double duration, double fs, double center)
    : kind_(kind), duration_(duration), fs_(fs), center_(center) {
  if (!(fs > 0.0)) throw ConfigError("window sampling rate must be positive");
  if (!(duration > 0.0)) throw ConfigError("window duration must be positive");
  const auto n = static_cast<std::size_t>(std::llround(duration * fs));
  if (n == 0) throw ConfigError("window is shorter than one sample");
  samples_.assign(n, 1.0);
  if (kind == WindowKind::hanning) {
    const double phi = 2.0 * kPi / static_cast<double>(n + 1);
    for (std::size_t k = 0; k < n; ++k)
      samples_[k] = 0.5 * (1.0 - std::cos(phi * static_cast<double>(k + 1)));
  }
}

double Window::time(std::size_t n) const {
  return center_ + (static_cast<double>(n) - 0.5 * static_cast<double>(size() - 1)) / fs_;
}

double Window::sum() const { return std::accumulate(samples_.begin(), samples_.end(), 0.0); }

double dirichlet(std::size_t n, double theta) {
  const double N = static_cast<double>(n);
  const double k = std::round(theta / (2.0 * kPi));
  const double reduced = theta - 2.0 * kPi * k;
  // D is 2 pi periodic for odd N and anti-periodic for even N.
  const bool flip = (n % 2 == 0) && (std::fmod(std::abs(k), 2.0) == 1.0);
  double value;
  if (std::abs(reduced) * N < 1e-3) {
    value = N * (1.0 - (N * N - 1.0) * reduced * reduced / 24.0);
  } else {
    value = std::sin(0.5 * N * reduced) / std::sin(0.5 * reduced);
  }
  return flip ? -value : value;
}

cplx window_dtft(const Window& window, double omega) {
  const std::size_t n = window.size();
  const double theta = omega / window.fs();
  double real;
  if (window.kind() == WindowKind::rectangular) {
    real = dirichlet(n, theta);
  } else {
    const double phi = 2.0 * kPi / static_cast<double>(n + 1);
    real = 0.5 * dirichlet(n, theta) + 0.25 * dirichlet(n, theta + phi) +
           0.25 * dirichlet(n, theta - phi);
  }
  if (window.center() == 0.0) return {real, 0.0};
  return std::polar(real, omega * window.center());
}

cplx windowed_dft(const Recording& recording, std::size_t channel, const Window& window,
                  long bin) {
  if (channel >= recording.n_channels()) throw ConfigError("channel index out of range");
  if (std::abs(recording.fs - window.fs()) > 1e-9 * window.fs())
    throw ConfigError("window and recording sampling rates differ");
  const double offset = (window.time(0) - recording.t_start) * recording.fs;
  const double j0 = std::round(offset);
  if (std::abs(offset - j0) > 1e-6)
    throw ConfigError("window samples do not coincide with the recording time grid");
  const double j_end = j0 + static_cast<double>(window.size());
  if (j0 < 0.0 || j_end > static_cast<double>(recording.n_samples())) {
    std::ostringstream os;
    os << "window needs samples over [" << window.time(0) << ", "
       << window.time(window.size() - 1) << "] s but the recording covers ["
       << recording.t_start << ", " << recording.time(recording.n_samples() - 1) << "] s";
    throw ConfigError(os.str());
  }
  const auto start = static_cast<Eigen::Index>(j0);
  const auto row = static_cast<Eigen::Index>(channel);
  const double omega = 2.0 * kPi * static_cast<double>(bin) * window.delta_f();
  const auto& g = window.samples();
  cplx acc{};
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double t = window.time(k);
    acc += recording.channels(row, start + static_cast<Eigen::Index>(k)) * g[k] *
           std::polar(1.0, omega * t);
  }
  return acc;
}

double decay_limits(const Window& window, double threshold_db, std::optional<double> cap) {
  if (!(threshold_db >= 0.0)) throw ConfigError("decay threshold must be non-negative");
  if (threshold_db == 0.0) return 0.0;
  const double peak = std::abs(window_dtft(window, 0.0));
  const double level = peak * std::pow(10.0, -threshold_db / 20.0);
  const double step = 2.0 * kPi * window.delta_f() / 50.0;
  const double nyquist = kPi * window.fs();
  const auto n_steps = static_cast<std::size_t>(std::floor(nyquist / step));

  // |g-hat| is even for the symmetric windows used here, so one side suffices.
  std::size_t last_above = 0;
  for (std::size_t k = 1; k <= n_steps; ++k)
    if (std::abs(window_dtft(window, static_cast<double>(k) * step)) >= level) last_above = k;

  if (last_above == n_steps) {
    if (cap) return *cap;
    std::ostringstream os;
    os << to_string(window.kind()) << " window never falls " << threshold_db
       << " dB below its peak; pass an explicit cap";
    throw ConfigError(os.str());
  }
  double lo = static_cast<double>(last_above) * step;
  double hi = lo + step;
  for (int it = 0; it < 60 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (std::abs(window_dtft(window, mid)) >= level ? lo : hi) = mid;
  }
  return cap ? std::min(hi, *cap) : hi;
}

std::string to_string(BinStrategy strategy) {
  switch (strategy) {
    case BinStrategy::single: return "single";
    case BinStrategy::regular: return "regular";
    case BinStrategy::random: return "random";
  }
  return "single";
}

BinStrategy bin_strategy_from_string(const std::string& name) {
  if (name == "single") return BinStrategy::single;
  if (name == "regular") return BinStrategy::regular;
  if (name == "random") return BinStrategy::random;
  throw ConfigError("unknown bin strategy '" + name + "'");
}

FrequencyBand default_band(double f0, double v_s, const Medium& medium) {
  const auto doppler = doppler_band(f0, v_s, medium);
  return {std::max(0.92 * f0, doppler.f_minus), std::min(1.12 * f0, doppler.f_plus)};
}

BinRange available_bins(const FrequencyBand& band, double delta_f) {
  if (!(delta_f > 0.0)) throw ConfigError("bin spacing must be positive");
  BinRange r;
  r.first = static_cast<long>(std::ceil(band.low / delta_f - kBinSlack));
  r.last = static_cast<long>(std::floor(band.high / delta_f + kBinSlack));
  return r;
}

std::size_t BinSelection::n_rows() const {
  std::size_t n = 0;
  for (const auto& s : sets) n += s.size();
  return n;
}

BinSelection select_bins(BinStrategy strategy, const FrequencyBand& band, const Window& window,
                         std::size_t M, std::size_t n_mics, std::uint64_t seed, double f0) {
  if (!(band.high > band.low)) throw ConfigError("bin band must satisfy low < high");
  if (M == 0) throw ConfigError("at least one bin per microphone is required");
  if (n_mics == 0) throw ConfigError("bin selection needs at least one microphone");
  BinSelection sel;
  sel.strategy = strategy;
  sel.M = M;
  sel.band = band;
  sel.delta_f = window.delta_f();
  sel.seed = seed;

  const auto range = available_bins(band, sel.delta_f);
  const std::size_t available = range.count();
  if (M > available) {
    std::ostringstream os;
    os << "M = " << M << " exceeds the " << available << " DFT bins available in ["
       << band.low << ", " << band.high << "] Hz at " << sel.delta_f << " Hz resolution";
    throw ConfigError(os.str());
  }

  switch (strategy) {
    case BinStrategy::single: {
      if (M != 1) throw ConfigError("single-bin strategy requires M = 1");
      const long nearest =
          std::clamp(static_cast<long>(std::lround(f0 / sel.delta_f)), range.first, range.last);
      sel.sets.assign(n_mics, {nearest});
      break;
    }
    case BinStrategy::regular: {
      std::vector<long> bins;
      const double span = static_cast<double>(available - 1);
      if (M == 1) {
        bins.push_back(range.first + static_cast<long>(std::lround(0.5 * span)));
      } else {
        for (std::size_t i = 0; i < M; ++i)
          bins.push_back(range.first +
                         static_cast<long>(std::lround(static_cast<double>(i) * span /
                                                       static_cast<double>(M - 1))));
      }
      sel.sets.assign(n_mics, bins);
      break;
    }
    case BinStrategy::random: {
      sel.sets.resize(n_mics);
      std::vector<long> pool(available);
      for (std::size_t n = 0; n < n_mics; ++n) {
        std::iota(pool.begin(), pool.end(), range.first);
        std::mt19937_64 rng(substream_seed(seed, n));
        // Partial Fisher-Yates; the first M entries are the draw.
        for (std::size_t i = 0; i < M; ++i) {
          std::uniform_int_distribution<std::size_t> pick(i, available - 1);
          std::swap(pool[i], pool[pick(rng)]);
        }
        std::vector<long> draw(pool.begin(), pool.begin() + static_cast<long>(M));
        std::sort(draw.begin(), draw.end());
        sel.sets[n] = std::move(draw);
      }
      break;
    }
  }
  return sel;
}

}  // namespace msloc
