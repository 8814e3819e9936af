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

#include "msloc/simsrc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <fftw3.h>

#include "msloc/error.hpp"

namespace msloc {

namespace {

constexpr double kPi = std::numbers::pi;

void add_monopole(std::vector<cplx>& out, const SignalSpec& signal, Vec3 receiver,
                  Vec3 start, double v, double c, std::span<const double> times) {
  const double w0 = signal.omega0();
  for (std::size_t j = 0; j < times.size(); ++j) {
    const auto sol = retarded_solution(receiver, start, v, c, times[j]);
    out[j] += signal.amplitude * std::exp(cplx(0.0, -w0 * sol.tau)) /
              (4.0 * kPi * sol.distance * (1.0 - sol.mach_r));
  }
}

std::size_t fft_size(std::size_t minimum) {
  std::size_t n = 1;
  while (n < minimum) n <<= 1;
  return n;
}

struct FftwPlan {
  fftw_plan plan = nullptr;
  ~FftwPlan() {
    if (plan) fftw_destroy_plan(plan);
  }
};

}  // namespace

double SignalSpec::omega0() const { return 2.0 * kPi * f0; }

void SignalSpec::validate() const {
  if (!(f0 > 0.0) || !std::isfinite(f0)) throw ConfigError("source frequency must be positive");
}

RetardedSolution retarded_solution(Vec3 receiver, Vec3 start, double v, double c, double t) {
  if (!(c > 0.0)) throw DomainError("speed of sound must be positive");
  if (std::abs(v) >= c) throw DomainError("source speed must be below the speed of sound");
  const double X = receiver.x - start.x - v * t;
  const double d2 = (receiver.y - start.y) * (receiver.y - start.y) +
                    (receiver.z - start.z) * (receiver.z - start.z);
  const double r2 = X * X + d2;
  if (r2 == 0.0) throw EvaluationError("receiver lies on the source path", t);
  // Positive root T of (c^2 - v^2) T^2 - 2 X v T - (X^2 + d^2) = 0, written
  // in the cancellation-free form.
  const double A = c * c - v * v;
  const double disc = std::sqrt(X * X * v * v + A * r2);
  const double T = X * v > 0.0 ? (X * v + disc) / A : r2 / (disc - X * v);
  const double R = c * T;
  if (!(R > 0.0) || !std::isfinite(R))
    throw EvaluationError("receiver lies on the source path", t);
  return {t - T, R, v * (X + v * T) / (c * R)};
}

double retarded_time(Vec3 receiver, const MotionSpec& motion, const Medium& medium, double t) {
  return retarded_solution(receiver, motion.position_at(0.0), motion.v_s, medium.c, t).tau;
}

std::vector<cplx> simulate_at(const Scenario& scenario, const SignalSpec& signal,
                              Vec3 receiver, std::span<const double> times) {
  signal.validate();
  for (std::size_t j = 1; j < times.size(); ++j)
    if (!(times[j] > times[j - 1])) throw ConfigError("sample times must be strictly increasing");
  std::vector<cplx> out(times.size(), cplx{});
  const Vec3 start = scenario.motion.position_at(0.0);
  add_monopole(out, signal, receiver, start, scenario.motion.v_s, scenario.medium.c, times);
  if (scenario.ground.enabled)
    add_monopole(out, signal, receiver, scenario.ground.mirror(start), scenario.motion.v_s,
                 scenario.medium.c, times);
  return out;
}

std::vector<cplx> simulate_pressure(const Scenario& scenario, const SignalSpec& signal,
                                    std::size_t mic, std::span<const double> times) {
  if (mic >= scenario.array.size()) throw ConfigError("microphone index out of range");
  return simulate_at(scenario, signal, scenario.array.positions[mic], times);
}

Recording record_array(const Scenario& scenario, const SignalSpec& signal, double fs,
                       double t_begin, double t_end) {
  if (!(fs > 0.0)) throw ConfigError("sampling rate must be positive");
  if (!(t_end > t_begin)) throw ConfigError("recording span is empty");
  const auto band = doppler_band(signal.f0, scenario.motion.v_s, scenario.medium);
  if (!(fs > 2.0 * band.f_plus)) {
    std::ostringstream os;
    os << "sampling rate " << fs << " Hz does not resolve the Doppler band up to "
       << band.f_plus << " Hz";
    throw ConfigError(os.str());
  }
  const auto n = static_cast<std::size_t>(std::llround((t_end - t_begin) * fs));
  Recording rec;
  rec.fs = fs;
  rec.t_start = t_begin + 0.5 / fs;
  std::vector<double> times(n);
  for (std::size_t j = 0; j < n; ++j) times[j] = rec.time(j);

  const std::size_t n_mics = scenario.array.size();
  rec.channels.resize(static_cast<Eigen::Index>(n_mics), static_cast<Eigen::Index>(n));
#ifdef MSLOC_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::size_t m = 0; m < n_mics; ++m) {
    const auto p = simulate_pressure(scenario, signal, m, times);
    for (std::size_t j = 0; j < n; ++j)
      rec.channels(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j)) = p[j];
  }
  return rec;
}

int noise_filter_order(double band_low, double band_high) {
  if (!(band_low > 0.0) || !(band_high > band_low))
    throw ConfigError("noise band must satisfy 0 < low < high");
  const double center2 = band_low * band_high;
  const double width = band_high - band_low;
  auto stop = [&](double f) { return std::abs((f * f - center2) / (f * width)); };
  const double x = std::min(stop(0.8 * band_low), stop(1.2 * band_high));
  // Forward-backward response is 1 / (1 + x^(2n)); -60 dB needs x^(2n) >= 999.
  int order = 4;
  while (std::pow(x, 2.0 * order) < 999.0) ++order;
  return order;
}

Recording add_noise(const Recording& recording, const Scenario& scenario,
                    const NoiseSpec& noise) {
  if (std::isinf(noise.snr_db) && noise.snr_db > 0.0) return recording;
  if (!std::isfinite(noise.snr_db)) throw ConfigError("noise SNR must be finite or +inf");
  if (!(noise.band_high < 0.5 * recording.fs))
    throw ConfigError("noise band must lie below the Nyquist frequency");
  const int order = noise_filter_order(noise.band_low, noise.band_high);
  if (recording.n_channels() == 0 || recording.n_samples() == 0)
    throw ConfigError("recording is empty");
  const double peak = recording.channels.row(0).cwiseAbs().maxCoeff();
  if (!(peak > 0.0)) throw ConfigError("cannot set an SNR against a zero signal");
  if (scenario.array.size() != recording.n_channels())
    throw ConfigError("recording and scenario disagree on the microphone count");

  const double c = scenario.medium.c;
  const std::size_t n_samples = recording.n_samples();
  double max_delay = 0.0;
  std::vector<double> distance(recording.n_channels());
  for (std::size_t m = 0; m < distance.size(); ++m) {
    distance[m] = norm(scenario.array.positions[m] - noise.source_position);
    if (!(distance[m] > 0.0)) throw ConfigError("noise source coincides with a microphone");
    max_delay = std::max(max_delay, distance[m] / c);
  }
  const std::size_t n_fft =
      fft_size(2 * n_samples + static_cast<std::size_t>(std::ceil(max_delay * recording.fs)));

  // Common white spectrum shaped by the zero-phase band-pass. The tone
  // convention exp(-i w t) puts positive frequencies on the exp(-i) side, so
  // a forward transform maps the spectrum back to time samples.
  std::mt19937_64 rng(substream_seed(noise.seed, 0));
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  const double center2 = noise.band_low * noise.band_high;
  const double width = noise.band_high - noise.band_low;
  std::vector<cplx> shaped(n_fft);
  std::vector<double> freq(n_fft);
  for (std::size_t k = 0; k < n_fft; ++k) {
    const double re = normal(rng);
    const double im = normal(rng);
    const double kk = k < n_fft / 2 ? static_cast<double>(k)
                                     : static_cast<double>(k) - static_cast<double>(n_fft);
    const double f = kk * recording.fs / static_cast<double>(n_fft);
    freq[k] = f;
    double gain = 0.0;
    if (f > 0.0) {
      const double x = (f * f - center2) / (f * width);
      gain = 1.0 / (1.0 + std::pow(x * x, order));
    }
    shaped[k] = cplx(re, im) * gain;
  }

  std::vector<cplx> buffer(n_fft);
  FftwPlan plan;
  plan.plan = fftw_plan_dft_1d(static_cast<int>(n_fft),
                               reinterpret_cast<fftw_complex*>(buffer.data()),
                               reinterpret_cast<fftw_complex*>(buffer.data()), FFTW_FORWARD,
                               FFTW_ESTIMATE);
  Eigen::MatrixXcd field(recording.channels.rows(), recording.channels.cols());
  for (std::size_t m = 0; m < distance.size(); ++m) {
    const double delay = distance[m] / c;
    for (std::size_t k = 0; k < n_fft; ++k)
      buffer[k] = shaped[k] * std::exp(cplx(0.0, 2.0 * kPi * freq[k] * delay));
    fftw_execute(plan.plan);
    const double scale = 1.0 / (4.0 * kPi * distance[m]);
    for (std::size_t j = 0; j < n_samples; ++j)
      field(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j)) = buffer[j] * scale;
  }

  const double rms0 = std::sqrt(field.row(0).cwiseAbs2().mean());
  if (!(rms0 > 0.0)) throw NumericalError("generated noise has zero power");
  const double target = peak / std::pow(10.0, noise.snr_db / 20.0);
  Recording out = recording;
  out.channels += field * (target / rms0);
  std::ostringstream note;
  note << "zero-phase Butterworth band-pass order " << order << " (forward-backward), "
       << noise.band_low << "-" << noise.band_high << " Hz";
  out.filter_note = note.str();
  return out;
}

Recording add_stabilization_noise(const Recording& recording, double snr_db,
                                  std::uint64_t seed, bool enabled) {
  if (!enabled || (std::isinf(snr_db) && snr_db > 0.0)) return recording;
  Recording out = recording;
  const double factor = std::pow(10.0, -snr_db / 20.0);
  for (Eigen::Index m = 0; m < out.channels.rows(); ++m) {
    const double sigma = factor * recording.channels.row(m).cwiseAbs().maxCoeff();
    std::mt19937_64 rng(substream_seed(seed, static_cast<std::uint64_t>(m) + 1));
    std::normal_distribution<double> normal(0.0, sigma * std::sqrt(0.5));
    for (Eigen::Index j = 0; j < out.channels.cols(); ++j) {
      const double re = normal(rng);
      const double im = normal(rng);
      out.channels(m, j) += cplx(re, im);
    }
  }
  return out;
}

double measure_snr_db(std::span<const cplx> signal, std::span<const cplx> noise) {
  double peak = 0.0;
  for (const auto& s : signal) peak = std::max(peak, std::abs(s));
  double power = 0.0;
  for (const auto& e : noise) power += std::norm(e);
  power /= static_cast<double>(std::max<std::size_t>(noise.size(), 1));
  return 20.0 * std::log10(peak / std::sqrt(power));
}

std::uint64_t substream_seed(std::uint64_t master, std::uint64_t stream) {
  // SplitMix64 finalizer over a golden-ratio stride.
  std::uint64_t z = master + (stream + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace msloc
