// spkver/wav.hpp

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

// Minimal RIFF/WAVE reader and writer for PCM 16-bit signed little-endian
// mono files. Samples map to [-1, 1) by dividing by 32768.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "spkver/audio.hpp"
#include "spkver/bytes.hpp"

namespace spkver {

inline AudioSignal read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open WAV file: " + path.string());
  }
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  const auto fail = [&](const std::string& why) -> std::runtime_error {
    return std::runtime_error("malformed WAV file " + path.string() + ": " + why);
  };
  if (bytes.size() < 12 || std::string(bytes.begin(), bytes.begin() + 4) != "RIFF" ||
      std::string(bytes.begin() + 8, bytes.begin() + 12) != "WAVE") {
    throw fail("missing RIFF/WAVE header");
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t data_offset = 0, data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string id(bytes.begin() + pos, bytes.begin() + pos + 4);
    const std::uint32_t size = detail::read_u32le(&bytes[pos + 4]);
    pos += 8;
    if (pos + size > bytes.size()) {
      throw fail("truncated chunk '" + id + "'");
    }
    if (id == "fmt ") {
      if (size < 16) throw fail("fmt chunk too small");
      format = detail::read_u16le(&bytes[pos]);
      channels = detail::read_u16le(&bytes[pos + 2]);
      rate = detail::read_u32le(&bytes[pos + 4]);
      bits = detail::read_u16le(&bytes[pos + 14]);
      have_fmt = true;
    } else if (id == "data") {
      data_offset = pos;
      data_size = size;
      break;
    }
    pos += size + (size % 2);  // chunks are word-aligned
  }
  if (!have_fmt) throw fail("missing fmt chunk");
  if (data_offset == 0 && data_size == 0) throw fail("missing data chunk");
  if (channels != 1) {
    throw std::runtime_error("mono required: " + path.string() + " has " +
                             std::to_string(channels) + " channels");
  }
  if (format != 1 || bits != 16) {
    throw std::runtime_error("unsupported encoding in " + path.string() +
                             " (PCM 16-bit required)");
  }
  if (data_size % 2 != 0) throw fail("odd data chunk size");

  AudioSignal signal;
  signal.sample_rate = static_cast<int>(rate);
  signal.samples.resize(data_size / 2);
  for (std::size_t i = 0; i < signal.samples.size(); ++i) {
    const std::int16_t v =
        static_cast<std::int16_t>(detail::read_u16le(&bytes[data_offset + 2 * i]));
    signal.samples[i] = static_cast<double>(v) / 32768.0;
  }
  return signal;
}

inline std::int16_t quantize_pcm16(double x) {
  double v = std::lround(x * 32768.0);
  if (v > 32767.0) v = 32767.0;
  if (v < -32768.0) v = -32768.0;
  return static_cast<std::int16_t>(v);
}

inline void write_wav(const std::filesystem::path& path, const AudioSignal& signal) {
  const std::uint32_t n = static_cast<std::uint32_t>(signal.samples.size());
  const std::uint32_t data_size = 2 * n;
  std::string out;
  out.reserve(44 + data_size);
  out += "RIFF";
  detail::put_u32le(out, 36 + data_size);
  out += "WAVE";
  out += "fmt ";
  detail::put_u32le(out, 16);
  detail::put_u16le(out, 1);  // PCM
  detail::put_u16le(out, 1);  // mono
  detail::put_u32le(out, static_cast<std::uint32_t>(signal.sample_rate));
  detail::put_u32le(out, static_cast<std::uint32_t>(signal.sample_rate) * 2);
  detail::put_u16le(out, 2);   // block align
  detail::put_u16le(out, 16);  // bits per sample
  out += "data";
  detail::put_u32le(out, data_size);
  for (double s : signal.samples) {
    detail::put_u16le(out, static_cast<std::uint16_t>(quantize_pcm16(s)));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    throw std::runtime_error("cannot open for writing: " + path.string());
  }
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

}  // namespace spkver
