// spkver/audio.hpp

// Copyright 2026  The spkver authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace spkver {

// Mono sample sequence, nominal amplitude range [-1, 1).
struct AudioSignal {
  std::vector<double> samples;
  int sample_rate = 8000;
};

inline void check_finite(const AudioSignal& signal) {
  for (double s : signal.samples) {
    if (!std::isfinite(s)) {
      throw std::invalid_argument("audio signal contains non-finite samples");
    }
  }
}

// First-order pre-emphasis: y[0] = x[0], y[n] = x[n] - mu*x[n-1].
inline AudioSignal preemphasize(const AudioSignal& signal, double mu = 0.95) {
  if (!(mu >= 0.0 && mu < 1.0)) {
    throw std::invalid_argument("pre-emphasis coefficient must be in [0, 1), got " +
                                std::to_string(mu));
  }
  AudioSignal out;
  out.sample_rate = signal.sample_rate;
  out.samples.resize(signal.samples.size());
  if (!signal.samples.empty()) {
    out.samples[0] = signal.samples[0];
    for (std::size_t n = 1; n < signal.samples.size(); ++n) {
      out.samples[n] = signal.samples[n] - mu * signal.samples[n - 1];
    }
  }
  return out;
}

// Half-band linear-phase FIR (Hamming-windowed sinc, odd tap count),
// normalized to unity DC gain. Cutoff is half the input Nyquist.
inline std::vector<double> halfband_decimation_filter(int taps = 127) {
  if (taps < 3 || taps % 2 == 0) {
    throw std::invalid_argument("half-band filter needs an odd tap count >= 3");
  }
  const double pi = 3.14159265358979323846;
  const int mid = (taps - 1) / 2;
  std::vector<double> h(taps);
  for (int n = 0; n < taps; ++n) {
    const int k = n - mid;
    const double ideal = (k == 0) ? 0.5 : std::sin(pi * k / 2.0) / (pi * k);
    const double window = 0.54 - 0.46 * std::cos(2.0 * pi * n / (taps - 1));
    h[n] = ideal * window;
  }
  double sum = 0.0;
  for (double v : h) sum += v;
  for (double& v : h) v /= sum;
  return h;
}

// 16 kHz -> 8 kHz: anti-alias low-pass then keep every second sample.
// 8 kHz input passes through unchanged; other rates are rejected.
inline AudioSignal decimate_to_8khz(const AudioSignal& signal) {
  if (signal.sample_rate == 8000) {
    return signal;
  }
  if (signal.sample_rate != 16000) {
    throw std::invalid_argument("unsupported sample rate " +
                                std::to_string(signal.sample_rate) +
                                " Hz (expected 8000 or 16000)");
  }
  static const std::vector<double> h = halfband_decimation_filter();
  const int mid = static_cast<int>(h.size() - 1) / 2;
  const std::ptrdiff_t n_in = static_cast<std::ptrdiff_t>(signal.samples.size());
  AudioSignal out;
  out.sample_rate = 8000;
  out.samples.resize(static_cast<std::size_t>((n_in + 1) / 2));
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    const std::ptrdiff_t center = static_cast<std::ptrdiff_t>(2 * i);
    double acc = 0.0;
    for (int t = 0; t < static_cast<int>(h.size()); ++t) {
      const std::ptrdiff_t src = center - t + mid;
      if (src >= 0 && src < n_in) {
        acc += h[t] * signal.samples[src];
      }
    }
    out.samples[i] = acc;
  }
  return out;
}

}  // namespace spkver
