// spkver/condition.hpp

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

// Recording conditions and their compact notation: "S4cM1" is session 4,
// Catalan, microphone 1. A train/test pair reads "S4cM1S2cM2", or "M1M3"
// as microphone-only shorthand relative to a base condition.

#pragma once

#include <compare>
#include <stdexcept>
#include <string>
#include <string_view>

namespace spkver {

enum class Channel { Normal, AnechoicRoom, Isdn };

inline std::string channel_name(Channel c) {
  switch (c) {
    case Channel::Normal: return "normal";
    case Channel::AnechoicRoom: return "AR";
    case Channel::Isdn: return "ISDN";
  }
  throw std::invalid_argument("unknown channel");
}

inline Channel parse_channel(std::string_view s) {
  if (s == "normal") return Channel::Normal;
  if (s == "AR") return Channel::AnechoicRoom;
  if (s == "ISDN") return Channel::Isdn;
  throw std::invalid_argument("unknown channel '" + std::string(s) +
                              "' (expected normal, AR or ISDN)");
}

struct Condition {
  int session = 1;      // 1..4, rendered S1..S4
  char language = 'c';  // 'c' (Catalan) or 's' (Spanish)
  int microphone = 1;   // 1..3, rendered M1..M3
  Channel channel = Channel::Normal;

  auto operator<=>(const Condition&) const = default;

  std::string str() const {
    return "S" + std::to_string(session) + std::string(1, language) + "M" +
           std::to_string(microphone);
  }

  // Parses "S4cM1". The channel is not part of the notation and defaults
  // to normal.
  static Condition parse(std::string_view text) {
    const auto bad = [&]() -> std::invalid_argument {
      return std::invalid_argument("bad condition notation '" + std::string(text) +
                                   "' (expected e.g. S4cM1)");
    };
    if (text.size() != 5 || (text[0] != 'S' && text[0] != 's') ||
        (text[3] != 'M' && text[3] != 'm')) {
      throw bad();
    }
    Condition c;
    if (text[1] < '1' || text[1] > '4') throw bad();
    c.session = text[1] - '0';
    if (text[2] != 'c' && text[2] != 's') throw bad();
    c.language = text[2];
    if (text[4] < '1' || text[4] > '3') throw bad();
    c.microphone = text[4] - '0';
    return c;
  }
};

struct ConditionPair {
  Condition train;
  Condition test;

  auto operator<=>(const ConditionPair&) const = default;

  std::string str() const { return train.str() + test.str(); }

  // Accepts "S4cM1S2cM2" (full) or "M1M3" (microphones swapped into the
  // base condition, which fixes session and language).
  static ConditionPair parse(std::string_view text, const Condition& base = {}) {
    ConditionPair pair;
    if (text.size() == 10) {
      pair.train = Condition::parse(text.substr(0, 5));
      pair.test = Condition::parse(text.substr(5, 5));
      return pair;
    }
    if (text.size() == 4 && (text[0] == 'M' || text[0] == 'm') &&
        (text[2] == 'M' || text[2] == 'm') && text[1] >= '1' && text[1] <= '3' &&
        text[3] >= '1' && text[3] <= '3') {
      pair.train = base;
      pair.train.microphone = text[1] - '0';
      pair.test = base;
      pair.test.microphone = text[3] - '0';
      return pair;
    }
    throw std::invalid_argument("bad condition pair '" + std::string(text) +
                                "' (expected e.g. S4cM1S2cM2 or M1M3)");
  }
};

}  // namespace spkver
