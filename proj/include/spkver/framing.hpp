// spkver/framing.hpp

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
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "spkver/audio.hpp"

namespace spkver {

// One analysis frame after windowing. log_energy is in dB relative to the
// loudest frame of the utterance, so it is always <= 0.
struct Frame {
  std::vector<double> samples;
  double log_energy = 0.0;
};

inline std::vector<double> hamming_window(int len) {
  std::vector<double> w(len);
  const double pi = 3.14159265358979323846;
  for (int n = 0; n < len; ++n) {
    w[n] = 0.54 - 0.46 * std::cos(2.0 * pi * n / (len - 1));
  }
  return w;
}

inline double frame_energy(const Frame& frame) {
  double e = 0.0;
  for (double s : frame.samples) e += s * s;
  return e;
}

// Slices the signal into Hamming-windowed frames. With the defaults
// (frame_len 240, overlap 2/3) the hop is 80 samples; trailing samples that
// do not fill a frame are dropped.
inline std::vector<Frame> frame_and_window(const AudioSignal& signal,
                                           int frame_len = 240,
                                           double overlap = 2.0 / 3.0) {
  if (frame_len < 2) {
    throw std::invalid_argument("frame length must be at least 2");
  }
  if (!(overlap >= 0.0 && overlap < 1.0)) {
    throw std::invalid_argument("overlap must be in [0, 1)");
  }
  const int step = static_cast<int>(std::lround(frame_len * (1.0 - overlap)));
  if (step < 1) {
    throw std::invalid_argument("frame overlap leaves an empty hop");
  }
  const std::ptrdiff_t len = static_cast<std::ptrdiff_t>(signal.samples.size());
  if (len < frame_len) {
    throw std::runtime_error("signal shorter than frame: need at least " +
                             std::to_string(frame_len) + " samples, got " +
                             std::to_string(len));
  }
  const std::vector<double> window = hamming_window(frame_len);
  const std::size_t count = static_cast<std::size_t>((len - frame_len) / step) + 1;
  std::vector<Frame> frames(count);
  std::vector<double> energies(count);
  double max_energy = 0.0;
  for (std::size_t f = 0; f < count; ++f) {
    Frame& frame = frames[f];
    frame.samples.resize(frame_len);
    const std::size_t start = f * static_cast<std::size_t>(step);
    for (int n = 0; n < frame_len; ++n) {
      frame.samples[n] = signal.samples[start + n] * window[n];
    }
    energies[f] = frame_energy(frame);
    if (energies[f] > max_energy) max_energy = energies[f];
  }
  for (std::size_t f = 0; f < count; ++f) {
    frames[f].log_energy = (energies[f] > 0.0 && max_energy > 0.0)
                               ? 10.0 * std::log10(energies[f] / max_energy)
                               : -std::numeric_limits<double>::infinity();
  }
  return frames;
}

// Removes frames more than floor_db below the loudest frame. The loudest
// frame always survives; the result is a subsequence of the input.
inline std::vector<Frame> drop_low_energy(const std::vector<Frame>& frames,
                                          double floor_db = 30.0) {
  if (frames.empty()) {
    throw std::invalid_argument("no frames to filter");
  }
  double max_energy = 0.0;
  for (const Frame& f : frames) max_energy = std::max(max_energy, frame_energy(f));
  if (max_energy <= 0.0) {
    throw std::runtime_error("silent utterance: all frames have zero energy");
  }
  std::vector<Frame> kept;
  kept.reserve(frames.size());
  for (const Frame& f : frames) {
    const double e = frame_energy(f);
    if (e > 0.0 && 10.0 * std::log10(e / max_energy) >= -floor_db) {
      kept.push_back(f);
    }
  }
  return kept;
}

}  // namespace spkver
