// spkver/corpus.hpp

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

// Manifest-driven corpus access plus a seeded synthetic corpus generator.
// Each synthetic speaker is a stable order-10 all-pole source; "microphones"
// are fixed 9-tap channel filters shared across speakers, "sessions" perturb
// the pole angles by up to +/-2%, and the two "languages" differ only in
// excitation style (white noise vs pulse train plus noise).

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "spkver/audio.hpp"
#include "spkver/condition.hpp"
#include "spkver/rng.hpp"
#include "spkver/wav.hpp"

namespace spkver {

enum class Role { Train, Dev, Test };

inline std::string role_name(Role r) {
  switch (r) {
    case Role::Train: return "train";
    case Role::Dev: return "dev";
    case Role::Test: return "test";
  }
  throw std::invalid_argument("unknown role");
}

inline Role parse_role(std::string_view s) {
  if (s == "train") return Role::Train;
  if (s == "dev") return Role::Dev;
  if (s == "test") return Role::Test;
  throw std::invalid_argument("unknown role '" + std::string(s) +
                              "' (expected train, dev or test)");
}

struct ManifestRecord {
  std::string utterance_id;
  std::string speaker_id;
  Condition condition;
  Role role = Role::Train;
  int dev_index = 0;  // 1..K for dev records, 0 otherwise
  std::string path;   // relative to the manifest directory unless absolute
};

struct Manifest {
  std::vector<ManifestRecord> records;
  std::filesystem::path base_dir;

  std::vector<std::string> speakers() const {
    std::set<std::string> ids;
    for (const ManifestRecord& r : records) ids.insert(r.speaker_id);
    return {ids.begin(), ids.end()};
  }

  std::filesystem::path resolve(const ManifestRecord& record) const {
    const std::filesystem::path p(record.path);
    return p.is_absolute() ? p : base_dir / p;
  }
};

inline constexpr const char* kManifestHeader =
    "utterance_id,speaker_id,session,language,microphone,channel,role,dev_index,path";

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  fields.push_back(field);
  return fields;
}

}  // namespace detail

inline void save_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  std::ostringstream out;
  out << kManifestHeader << "\n";
  for (const ManifestRecord& r : manifest.records) {
    for (char c : r.utterance_id + r.speaker_id + r.path) {
      if (c == ',' || c == '\n') {
        throw std::invalid_argument("manifest fields must not contain ',' or newline: " +
                                    r.utterance_id);
      }
    }
    out << r.utterance_id << ',' << r.speaker_id << ",S" << r.condition.session << ','
        << r.condition.language << ",M" << r.condition.microphone << ','
        << channel_name(r.condition.channel) << ',' << role_name(r.role) << ',';
    if (r.role == Role::Dev) out << r.dev_index;
    out << ',' << r.path << "\n";
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    throw std::runtime_error("cannot open for writing: " + path.string());
  }
  const std::string s = out.str();
  f.write(s.data(), static_cast<std::streamsize>(s.size()));
  if (!f) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

// Loads and validates a manifest. Field errors name the record's line number;
// duplicate utterance ids report both lines; every path must resolve to an
// existing file.
inline Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open manifest: " + path.string());
  }
  Manifest manifest;
  manifest.base_dir = path.has_parent_path() ? path.parent_path()
                                             : std::filesystem::path(".");
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("manifest " + path.string() + " is empty");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kManifestHeader) {
    throw std::runtime_error("manifest " + path.string() + " has an unexpected header (want '" +
                             std::string(kManifestHeader) + "')");
  }
  std::map<std::string, int> seen_ids;  // utterance_id -> line number
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fail = [&](const std::string& why) -> std::runtime_error {
      return std::runtime_error("manifest " + path.string() + " line " +
                                std::to_string(line_no) + ": " + why);
    };
    const std::vector<std::string> fields = detail::split_csv_line(line);
    if (fields.size() != 9) {
      throw fail("expected 9 fields, got " + std::to_string(fields.size()));
    }
    ManifestRecord r;
    r.utterance_id = fields[0];
    r.speaker_id = fields[1];
    if (r.utterance_id.empty()) throw fail("empty utterance_id");
    if (r.speaker_id.empty()) throw fail("empty speaker_id");
    try {
      if (fields[2].size() != 2 || fields[2][0] != 'S') {
        throw std::invalid_argument("bad session '" + fields[2] + "' (expected S1..S4)");
      }
      if (fields[2][1] < '1' || fields[2][1] > '4') {
        throw std::invalid_argument("bad session '" + fields[2] + "' (expected S1..S4)");
      }
      r.condition.session = fields[2][1] - '0';
      if (fields[3] != "c" && fields[3] != "s") {
        throw std::invalid_argument("bad language '" + fields[3] + "' (expected c or s)");
      }
      r.condition.language = fields[3][0];
      if (fields[4].size() != 2 || fields[4][0] != 'M' || fields[4][1] < '1' ||
          fields[4][1] > '3') {
        throw std::invalid_argument("bad microphone '" + fields[4] + "' (expected M1..M3)");
      }
      r.condition.microphone = fields[4][1] - '0';
      r.condition.channel = parse_channel(fields[5]);
      r.role = parse_role(fields[6]);
    } catch (const std::invalid_argument& e) {
      throw fail(e.what());
    }
    if (r.role == Role::Dev) {
      try {
        std::size_t used = 0;
        r.dev_index = std::stoi(fields[7], &used);
        if (used != fields[7].size() || r.dev_index < 1) throw std::exception();
      } catch (const std::exception&) {
        throw fail("dev records need dev_index >= 1, got '" + fields[7] + "'");
      }
    } else if (!fields[7].empty() && fields[7] != "0") {
      throw fail("dev_index must be empty for role '" + fields[6] + "'");
    }
    r.path = fields[8];
    if (r.path.empty()) throw fail("empty path");
    const auto [it, inserted] = seen_ids.emplace(r.utterance_id, line_no);
    if (!inserted) {
      throw fail("duplicate utterance_id '" + r.utterance_id + "' (also at line " +
                 std::to_string(it->second) + ")");
    }
    manifest.records.push_back(std::move(r));
  }
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    const std::filesystem::path p = manifest.resolve(manifest.records[i]);
    if (!std::filesystem::exists(p)) {
      throw std::runtime_error("manifest " + path.string() + ": file not found: " +
                               p.string() + " (utterance '" +
                               manifest.records[i].utterance_id + "')");
    }
  }
  return manifest;
}

// Reads a manifest record's audio and brings it to 8 kHz.
inline AudioSignal read_utterance(const Manifest& manifest, const ManifestRecord& record) {
  return decimate_to_8khz(read_wav(manifest.resolve(record)));
}

// ---------------------------------------------------------------------------
// Synthetic corpus
// ---------------------------------------------------------------------------

struct SynthSpec {
  int n_speakers = 20;
  std::uint64_t seed = 0;
  int sessions = 2;
  int microphones = 2;
  int languages = 2;
  double train_seconds = 60.0;
  int dev_sentences = 5;
  int test_sentences = 5;
  double sentence_seconds = 3.0;

  void validate() const {
    if (n_speakers < 7) {
      throw std::invalid_argument("need at least 7 speakers (5 cohorts + target + 1), got " +
                                  std::to_string(n_speakers));
    }
    if (sessions < 1 || sessions > 4) {
      throw std::invalid_argument("sessions must be 1..4");
    }
    if (microphones < 1 || microphones > 3) {
      throw std::invalid_argument("microphones must be 1..3");
    }
    if (languages < 1 || languages > 2) {
      throw std::invalid_argument("languages must be 1..2");
    }
    if (dev_sentences < 1 || test_sentences < 1) {
      throw std::invalid_argument("sentence counts must be >= 1");
    }
    if (!(train_seconds > 0.0) || !(sentence_seconds > 0.0)) {
      throw std::invalid_argument("durations must be positive");
    }
  }
};

namespace detail {

// Tags for the seeded stream hierarchy.
inline constexpr std::uint64_t kTagPoles = 101;
inline constexpr std::uint64_t kTagSession = 102;
inline constexpr std::uint64_t kTagPitch = 103;
inline constexpr std::uint64_t kTagExcitation = 104;
inline constexpr std::uint64_t kTagGain = 105;

}  // namespace detail

class SynthCorpus {
 public:
  static constexpr int kSampleRate = 8000;
  static constexpr int kSourceOrder = 10;  // five conjugate pole pairs
  static constexpr int kMicTaps = 9;

  explicit SynthCorpus(SynthSpec spec) : spec_(spec) { spec_.validate(); }

  const SynthSpec& spec() const { return spec_; }

  // Fixed channel filters, identical for every speaker.
  static std::array<double, kMicTaps> microphone_filter(int mic) {
    switch (mic) {
      case 1:  // close to flat, light room reflection
        return {1.0, 0.22, 0.08, 0.03, 0.0, 0.0, 0.0, 0.0, 0.0};
      case 2:  // dark: strong low-pass tilt
        return {0.30, 0.55, 0.62, 0.48, 0.26, 0.12, 0.05, 0.02, 0.01};
      case 3:  // bright with a comb-like dip
        return {0.85, -0.45, 0.20, 0.05, 0.42, -0.12, -0.25, 0.10, 0.06};
      default:
        throw std::invalid_argument("microphone index out of range: " + std::to_string(mic));
    }
  }

  std::string speaker_id(int speaker) const {
    const int width = std::max<int>(2, static_cast<int>(std::to_string(spec_.n_speakers).size()));
    std::string digits = std::to_string(speaker);
    while (static_cast<int>(digits.size()) < width) digits.insert(digits.begin(), '0');
    return "s" + digits;
  }

  Manifest manifest() const {
    Manifest m;
    for (int speaker = 1; speaker <= spec_.n_speakers; ++speaker) {
      for (int session = 1; session <= spec_.sessions; ++session) {
        for (int lang = 0; lang < spec_.languages; ++lang) {
          for (int mic = 1; mic <= spec_.microphones; ++mic) {
            Condition cond;
            cond.session = session;
            cond.language = (lang == 0) ? 'c' : 's';
            cond.microphone = mic;
            append_record(m, speaker, cond, Role::Train, 0);
            for (int i = 1; i <= spec_.dev_sentences; ++i) {
              append_record(m, speaker, cond, Role::Dev, i);
            }
            for (int i = 1; i <= spec_.test_sentences; ++i) {
              append_record(m, speaker, cond, Role::Test, i);
            }
          }
        }
      }
    }
    return m;
  }

  // Deterministic synthesis of one utterance. The pre-microphone source
  // depends on (speaker, session, language, role, index) only, so the same
  // sentence recorded through two microphones differs exactly by the
  // channel filter.
  AudioSignal utterance(const ManifestRecord& record) const {
    const int speaker = speaker_index(record.speaker_id);
    const Condition& cond = record.condition;
    const double seconds = (record.role == Role::Train) ? spec_.train_seconds
                                                        : spec_.sentence_seconds;
    const int n = static_cast<int>(std::lround(seconds * kSampleRate));
    const int warmup = 1600;

    const std::vector<double> a = predictor(speaker, cond.session);
    const int lang = (cond.language == 'c') ? 0 : 1;
    const std::uint64_t role_tag = static_cast<std::uint64_t>(record.role);
    const std::uint64_t index = static_cast<std::uint64_t>(record.dev_index != 0
                                                               ? record.dev_index
                                                               : sentence_index(record));

    Rng ex(derive_seed(spec_.seed, {detail::kTagExcitation,
                                    static_cast<std::uint64_t>(speaker),
                                    static_cast<std::uint64_t>(cond.session),
                                    static_cast<std::uint64_t>(lang), role_tag, index}));
    std::vector<double> e(static_cast<std::size_t>(n + warmup));
    if (lang == 0) {
      for (double& v : e) v = ex.normal();
    } else {
      const int period = pulse_period(speaker);
      for (std::size_t i = 0; i < e.size(); ++i) {
        e[i] = kPulseNoiseMix * ex.normal();
        if (static_cast<int>(i % static_cast<std::size_t>(period)) == 0) {
          e[i] += kPulseGain;
        }
      }
    }

    // Source: all-pole filter 1/A(z).
    std::vector<double> y(e.size(), 0.0);
    for (std::size_t i = 0; i < e.size(); ++i) {
      double acc = e[i];
      for (int k = 1; k <= kSourceOrder; ++k) {
        if (i >= static_cast<std::size_t>(k)) acc -= a[k - 1] * y[i - k];
      }
      y[i] = acc;
    }

    // Channel: microphone FIR.
    const std::array<double, kMicTaps> h = microphone_filter(cond.microphone);
    AudioSignal signal;
    signal.sample_rate = kSampleRate;
    signal.samples.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const std::size_t center = static_cast<std::size_t>(i + warmup);
      double acc = 0.0;
      for (int t = 0; t < kMicTaps; ++t) {
        acc += h[t] * y[center - t];
      }
      signal.samples[static_cast<std::size_t>(i)] = acc;
    }

    // Per-sentence gain jitter: normalize the peak to a jittered target,
    // then snap to the 16-bit grid so in-memory and on-disk samples agree.
    Rng gain(derive_seed(spec_.seed, {detail::kTagGain, static_cast<std::uint64_t>(speaker),
                                      static_cast<std::uint64_t>(cond.session),
                                      static_cast<std::uint64_t>(lang), role_tag, index}));
    const double target = gain.uniform(0.15, 0.45);
    double peak = 0.0;
    for (double v : signal.samples) peak = std::max(peak, std::abs(v));
    const double scale = (peak > 0.0) ? target / peak : 1.0;
    for (double& v : signal.samples) {
      v = static_cast<double>(quantize_pcm16(v * scale)) / 32768.0;
    }
    return signal;
  }

  AudioSignal utterance(const std::string& utterance_id) const {
    for (const ManifestRecord& r : manifest().records) {
      if (r.utterance_id == utterance_id) return utterance(r);
    }
    throw std::invalid_argument("unknown synthetic utterance id: " + utterance_id);
  }

  // Predictor coefficients a[1..10] for one (speaker, session).
  std::vector<double> predictor(int speaker, int session) const {
    Rng base(derive_seed(spec_.seed, {detail::kTagPoles, static_cast<std::uint64_t>(speaker)}));
    std::array<double, 5> radius, angle;
    const double pi = 3.14159265358979323846;
    // Formant-style slots: each pole pair lives in its own band, so
    // speakers differ within bands the way vocal tracts do. Radii lean
    // toward the sharp end of [0.6, 0.95]; pronounced peaks keep speakers
    // distinct and make session drift visible.
    static constexpr double kSlotCenters[5] = {0.10, 0.28, 0.46, 0.64, 0.82};
    static constexpr double kSlotHalfWidth = 0.06;
    for (int i = 0; i < 5; ++i) {
      const double u = base.uniform();
      radius[i] = 0.95 - 0.35 * u * u;
      angle[i] = pi * (kSlotCenters[i] + kSlotHalfWidth * base.uniform(-1.0, 1.0));
    }
    Rng jitter(derive_seed(spec_.seed, {detail::kTagSession, static_cast<std::uint64_t>(speaker),
                                        static_cast<std::uint64_t>(session)}));
    for (int i = 0; i < 5; ++i) {
      angle[i] += pi * jitter.uniform(-kSessionAngleJitter, kSessionAngleJitter);
    }
    // Expand prod_i (1 - 2 r cos(theta) z^-1 + r^2 z^-2) into 1 + sum a_k z^-k.
    std::vector<double> poly{1.0};
    for (int i = 0; i < 5; ++i) {
      const std::array<double, 3> quad{1.0, -2.0 * radius[i] * std::cos(angle[i]),
                                       radius[i] * radius[i]};
      std::vector<double> next(poly.size() + 2, 0.0);
      for (std::size_t p = 0; p < poly.size(); ++p) {
        for (std::size_t q = 0; q < quad.size(); ++q) {
          next[p + q] += poly[p] * quad[q];
        }
      }
      poly = std::move(next);
    }
    return {poly.begin() + 1, poly.end()};
  }

  int pulse_period(int speaker) const {
    Rng pitch(derive_seed(spec_.seed, {detail::kTagPitch, static_cast<std::uint64_t>(speaker)}));
    const double f0 = pitch.uniform(90.0, 220.0);
    return static_cast<int>(std::lround(kSampleRate / f0));
  }

 private:
  static constexpr double kSessionAngleJitter = 0.02;
  static constexpr double kPulseGain = 0.8;
  static constexpr double kPulseNoiseMix = 1.0;

  void append_record(Manifest& m, int speaker, const Condition& cond, Role role,
                     int index) const {
    ManifestRecord r;
    r.speaker_id = speaker_id(speaker);
    r.condition = cond;
    r.role = role;
    r.dev_index = (role == Role::Dev) ? index : 0;
    std::string suffix = role_name(role);
    if (role != Role::Train) suffix += std::to_string(index);
    r.utterance_id = r.speaker_id + "_" + cond.str() + "_" + suffix;
    r.path = "wav/" + r.utterance_id + ".wav";
    m.records.push_back(std::move(r));
  }

  int speaker_index(const std::string& id) const {
    for (int speaker = 1; speaker <= spec_.n_speakers; ++speaker) {
      if (speaker_id(speaker) == id) return speaker;
    }
    throw std::invalid_argument("unknown synthetic speaker id: " + id);
  }

  // Test sentences carry their index in the utterance id suffix; dev
  // sentences carry it in dev_index.
  int sentence_index(const ManifestRecord& record) const {
    if (record.role == Role::Train) return 0;
    const std::string& id = record.utterance_id;
    const std::size_t pos = id.find_last_not_of("0123456789");
    if (pos == std::string::npos || pos + 1 >= id.size()) {
      throw std::invalid_argument("cannot infer sentence index from id: " + id);
    }
    return std::stoi(id.substr(pos + 1));
  }

  SynthSpec spec_;
};

// Writes the whole synthetic corpus (WAV files plus manifest.csv) under
// out_dir. Byte-identical for identical specs.
inline Manifest synthesize_corpus(const SynthSpec& spec,
                                  const std::filesystem::path& out_dir) {
  const SynthCorpus corpus(spec);
  Manifest manifest = corpus.manifest();
  std::filesystem::create_directories(out_dir / "wav");
  for (const ManifestRecord& r : manifest.records) {
    write_wav(out_dir / r.path, corpus.utterance(r));
  }
  manifest.base_dir = out_dir;
  save_manifest(manifest, out_dir / "manifest.csv");
  return manifest;
}

}  // namespace spkver
