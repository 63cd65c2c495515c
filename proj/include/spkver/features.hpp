// spkver/features.hpp

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

// Cepstral parameterizations and their compositions: plain LPCC, adaptive
// component weighting, fixed lifters (linear, bandpass, postfilter), cepstral
// mean subtraction and per-component variance normalization. A ParamChain
// describes one composition; apply_chain() runs it over the frames of an
// utterance and yields the final feature matrix.

#pragma once

#include <Eigen/Dense>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "spkver/audio.hpp"
#include "spkver/bytes.hpp"
#include "spkver/framing.hpp"
#include "spkver/lpc.hpp"

namespace spkver {

// N frames x D coefficients for one utterance.
struct FeatureMatrix {
  Eigen::MatrixXd values;
  std::string chain_id;

  Eigen::Index n_frames() const { return values.rows(); }
  Eigen::Index dim() const { return values.cols(); }
};

// Per-frame LPC analysis results; input to every parameterization.
struct FrameAnalysis {
  FrameLpc lpc;
  FrameCepstrum cepstrum;
};

// Adaptive component weighting: the cepstrum of N(z)/A(z) where
// N(z) = sum_{k=0}^{P-1} (P-k) a_k z^-k (a_0 = 1) gives every spectral pole
// unit residue. Returned as c_A - c_B with B(z) = N(z)/P monic.
inline FrameCepstrum acw_cepstrum(const FrameLpc& lpc, int ncep = -1) {
  const int order = static_cast<int>(lpc.coeffs.size());
  if (order < 1) {
    throw std::invalid_argument("ACW needs a predictor of order >= 1");
  }
  if (ncep < 0) ncep = order;
  FrameCepstrum c_a = lpc_to_cepstrum(lpc, ncep);
  if (order == 1) {
    return c_a;  // numerator is the constant P; no zero contribution
  }
  std::vector<double> b(order - 1);
  for (int k = 1; k < order; ++k) {
    b[k - 1] = (order - k) * lpc.coeffs[k - 1] / order;
  }
  const FrameCepstrum c_b = lpc_to_cepstrum(std::span<const double>(b), ncep);
  for (int n = 0; n < ncep; ++n) {
    c_a.coeffs[n] -= c_b.coeffs[n];
  }
  return c_a;
}

enum class LifterKind { Linear, Bandpass, Postfilter };

// Half-amplitude of the bandpass lifter's sine term, as printed in the
// classical definition used here: w(n) = 1 + kBandpassGain * sin(n*pi/L).
inline constexpr double kBandpassGain = 0.5;

inline double lifter_weight(LifterKind kind, int n, int len, double alpha = 1.0,
                            double beta = 0.9, double bandpass_gain = kBandpassGain) {
  const double pi = 3.14159265358979323846;
  switch (kind) {
    case LifterKind::Linear:
      return static_cast<double>(n);
    case LifterKind::Bandpass:
      return 1.0 + bandpass_gain * std::sin(n * pi / len);
    case LifterKind::Postfilter:
      return std::pow(alpha, n) - std::pow(beta, n);
  }
  throw std::invalid_argument("unknown lifter kind");
}

// Applies w(n) per coefficient, n = 1..L. Coefficients beyond L are invalid.
inline FrameCepstrum lifter(const FrameCepstrum& c, LifterKind kind, int len,
                            double alpha = 1.0, double beta = 0.9,
                            double bandpass_gain = kBandpassGain) {
  const int n_coeffs = static_cast<int>(c.coeffs.size());
  if (n_coeffs > len) {
    throw std::invalid_argument("lifter length " + std::to_string(len) +
                                " shorter than cepstrum (" + std::to_string(n_coeffs) +
                                " coefficients)");
  }
  FrameCepstrum out = c;
  for (int n = 1; n <= n_coeffs; ++n) {
    out.coeffs[n - 1] *= lifter_weight(kind, n, len, alpha, beta, bandpass_gain);
  }
  return out;
}

// Cepstral mean subtraction: removes each column's arithmetic mean.
inline FeatureMatrix cms(const FeatureMatrix& f) {
  if (f.values.rows() < 1) {
    throw std::invalid_argument("CMS needs at least one frame");
  }
  FeatureMatrix out = f;
  const Eigen::RowVectorXd mean = f.values.colwise().mean();
  out.values.rowwise() -= mean;
  return out;
}

// Scales each column to unit population standard deviation (mean is NOT
// removed). Columns with sigma < 1e-12 are left unscaled; their indices are
// appended to *degenerate when provided.
inline FeatureMatrix sigma_normalize(const FeatureMatrix& f,
                                     std::vector<Eigen::Index>* degenerate = nullptr) {
  const Eigen::Index n = f.values.rows();
  if (n < 1) {
    throw std::invalid_argument("sigma normalization needs at least one frame");
  }
  FeatureMatrix out = f;
  const Eigen::RowVectorXd mean = f.values.colwise().mean();
  for (Eigen::Index j = 0; j < f.values.cols(); ++j) {
    const double var = (f.values.col(j).array() - mean[j]).square().sum() / n;
    const double sigma = std::sqrt(var);
    if (sigma < 1e-12) {
      if (degenerate) degenerate->push_back(j);
      continue;
    }
    out.values.col(j) /= sigma;
  }
  return out;
}

// Removes the first k coefficients (columns 1..k).
inline FeatureMatrix drop_coefficients(const FeatureMatrix& f, int k) {
  if (k < 0 || k >= f.values.cols()) {
    throw std::invalid_argument("cannot drop " + std::to_string(k) + " of " +
                                std::to_string(f.values.cols()) + " coefficients");
  }
  FeatureMatrix out;
  out.chain_id = f.chain_id;
  out.values = f.values.rightCols(f.values.cols() - k).eval();
  return out;
}

enum class BaseKind { Lpcc, Acw };
enum class Normalization { Cms, Sigma };

// Declarative description of a parameterization pipeline. Application order
// is fixed: base cepstrum, coefficient dropping, lifter, then the utterance
// normalizations in listed order.
struct ParamChain {
  BaseKind base = BaseKind::Lpcc;
  int drop_first = 0;
  std::optional<LifterKind> lifter;
  double pf_alpha = 1.0;
  double pf_beta = 0.9;
  std::vector<Normalization> normalizations;

  static ParamChain parse(std::string_view text);
  std::string name() const;
};

namespace detail {

inline std::string ascii_upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (static_cast<unsigned char>(c) < 128) {
      c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
  }
  return out;
}

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace detail

inline ParamChain ParamChain::parse(std::string_view text) {
  // Tokens are separated by '+' or '-' outside parentheses; both separators
  // appear in the conventional chain labels ("CMS+ACW", "CMS-LW", "SIGMA-LPCC").
  std::vector<std::string> tokens;
  std::string current;
  int depth = 0;
  for (char c : text) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if ((c == '+' || c == '-') && depth == 0) {
      tokens.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  tokens.push_back(current);

  ParamChain chain;
  bool saw_acw = false;
  for (const std::string& raw : tokens) {
    const std::string token = detail::trim(raw);
    if (token.empty()) {
      throw std::invalid_argument("empty token in chain '" + std::string(text) + "'");
    }
    const std::string up = detail::ascii_upper(token);
    if (up == "LPCC") {
      continue;  // base marker; LPCC is the default
    }
    if (up.rfind("LPCC[", 0) == 0) {
      if (up.size() < 9 || up.substr(up.size() - 4) != "..P]") {
        throw std::invalid_argument("bad coefficient range '" + token +
                                    "' (expected LPCC[k..P])");
      }
      const std::string num = up.substr(5, up.size() - 9);
      std::size_t used = 0;
      int first = 0;
      try {
        first = std::stoi(num, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != num.size() || first < 1) {
        throw std::invalid_argument("bad coefficient range '" + token +
                                    "' (expected LPCC[k..P])");
      }
      chain.drop_first = first - 1;
      continue;
    }
    if (up == "ACW") {
      saw_acw = true;
      continue;
    }
    if (up == "CMS" || up == "SIGMA" || token == "\xcf\x83") {
      const Normalization norm = (up == "CMS") ? Normalization::Cms : Normalization::Sigma;
      for (Normalization existing : chain.normalizations) {
        if (existing == norm) {
          throw std::invalid_argument("duplicate normalization '" + token + "' in chain '" +
                                      std::string(text) + "'");
        }
      }
      chain.normalizations.push_back(norm);
      continue;
    }
    std::optional<LifterKind> kind;
    double alpha = 1.0, beta = 0.9;
    if (up == "LW") {
      kind = LifterKind::Linear;
    } else if (up == "BPL") {
      kind = LifterKind::Bandpass;
    } else if (up == "PF") {
      kind = LifterKind::Postfilter;
    } else if (up.rfind("PF(", 0) == 0 && up.back() == ')') {
      const std::string args = token.substr(3, token.size() - 4);
      const std::size_t comma = args.find(',');
      if (comma == std::string::npos) {
        throw std::invalid_argument("postfilter needs two parameters: '" + token + "'");
      }
      try {
        std::size_t ua = 0, ub = 0;
        const std::string sa = detail::trim(args.substr(0, comma));
        const std::string sb = detail::trim(args.substr(comma + 1));
        alpha = std::stod(sa, &ua);
        beta = std::stod(sb, &ub);
        if (ua != sa.size() || ub != sb.size()) throw std::invalid_argument("trailing junk");
      } catch (const std::exception&) {
        throw std::invalid_argument("bad postfilter parameters in '" + token + "'");
      }
      kind = LifterKind::Postfilter;
    } else {
      throw std::invalid_argument("unknown parameterization token '" + token +
                                  "' in chain '" + std::string(text) + "'");
    }
    if (chain.lifter) {
      throw std::invalid_argument("chain '" + std::string(text) +
                                  "' names more than one lifter");
    }
    chain.lifter = kind;
    chain.pf_alpha = alpha;
    chain.pf_beta = beta;
  }
  if (saw_acw) chain.base = BaseKind::Acw;
  return chain;
}

inline std::string ParamChain::name() const {
  std::string out = (base == BaseKind::Acw) ? "ACW" : "LPCC";
  if (drop_first > 0) {
    out += "[" + std::to_string(drop_first + 1) + "..P]";
  }
  if (lifter) {
    switch (*lifter) {
      case LifterKind::Linear:
        out += "+LW";
        break;
      case LifterKind::Bandpass:
        out += "+BPL";
        break;
      case LifterKind::Postfilter:
        out += "+PF(" + detail::format_double(pf_alpha) + "," +
               detail::format_double(pf_beta) + ")";
        break;
    }
  }
  for (Normalization norm : normalizations) {
    out += (norm == Normalization::Cms) ? "+CMS" : "+SIGMA";
  }
  return out;
}

// Runs a chain over per-frame analyses. Degenerate sigma columns, if any,
// are reported through *warnings.
inline FeatureMatrix apply_chain(const std::vector<FrameAnalysis>& frames,
                                 const ParamChain& chain,
                                 std::vector<std::string>* warnings = nullptr) {
  if (frames.empty()) {
    throw std::invalid_argument("cannot build features from zero frames");
  }
  const int order = static_cast<int>(frames[0].lpc.coeffs.size());
  if (chain.drop_first >= order) {
    throw std::invalid_argument("chain drops " + std::to_string(chain.drop_first) +
                                " of " + std::to_string(order) + " coefficients");
  }
  FeatureMatrix f;
  f.values.resize(static_cast<Eigen::Index>(frames.size()), order);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const FrameCepstrum base = (chain.base == BaseKind::Acw)
                                   ? acw_cepstrum(frames[i].lpc, order)
                                   : frames[i].cepstrum;
    if (static_cast<int>(base.coeffs.size()) != order) {
      throw std::invalid_argument("frame cepstrum length does not match the LPC order");
    }
    for (int j = 0; j < order; ++j) {
      f.values(static_cast<Eigen::Index>(i), j) = base.coeffs[j];
    }
  }
  if (chain.drop_first > 0) {
    f = drop_coefficients(f, chain.drop_first);
  }
  if (chain.lifter) {
    const int dim = static_cast<int>(f.values.cols());
    for (int j = 0; j < dim; ++j) {
      f.values.col(j) *=
          lifter_weight(*chain.lifter, j + 1, dim, chain.pf_alpha, chain.pf_beta);
    }
  }
  for (Normalization norm : chain.normalizations) {
    if (norm == Normalization::Cms) {
      f = cms(f);
    } else {
      std::vector<Eigen::Index> degenerate;
      f = sigma_normalize(f, &degenerate);
      if (!degenerate.empty() && warnings) {
        std::string msg = "sigma normalization left constant column(s) unscaled:";
        for (Eigen::Index j : degenerate) msg += " " + std::to_string(j + 1);
        warnings->push_back(msg);
      }
    }
  }
  f.chain_id = chain.name();
  return f;
}

// Front-end settings shared by every parameterization.
struct FrontendConfig {
  double preemphasis = 0.95;
  int frame_len = 240;
  double overlap = 2.0 / 3.0;
  double energy_floor_db = 30.0;
  int lpc_order = 20;
};

// Frame-level LPC analysis of a whole utterance (after pre-emphasis,
// windowing and energy-based frame dropping).
inline std::vector<FrameAnalysis> analyze_utterance(const AudioSignal& signal,
                                                    const FrontendConfig& config = {}) {
  check_finite(signal);
  const AudioSignal at_8k = decimate_to_8khz(signal);
  const AudioSignal emphasized = preemphasize(at_8k, config.preemphasis);
  const std::vector<Frame> frames =
      drop_low_energy(frame_and_window(emphasized, config.frame_len, config.overlap),
                      config.energy_floor_db);
  std::vector<FrameAnalysis> analyses;
  analyses.reserve(frames.size());
  for (const Frame& frame : frames) {
    FrameAnalysis a;
    a.lpc = levinson_durbin(autocorrelate(frame.samples, config.lpc_order));
    a.cepstrum = lpc_to_cepstrum(a.lpc);
    analyses.push_back(std::move(a));
  }
  return analyses;
}

inline FeatureMatrix extract_features(const AudioSignal& signal, const ParamChain& chain,
                                      const FrontendConfig& config = {},
                                      std::vector<std::string>* warnings = nullptr) {
  return apply_chain(analyze_utterance(signal, config), chain, warnings);
}

// Feature file format (version 1, little-endian):
//   "SVFM" | u32 version | u32 len + chain_id | u32 rows | u32 cols |
//   rows*cols f64, row-major.
inline void save_features(const std::filesystem::path& path, const FeatureMatrix& f) {
  std::string out;
  out += "SVFM";
  detail::put_u32le(out, 1);
  detail::put_u32le(out, static_cast<std::uint32_t>(f.chain_id.size()));
  out += f.chain_id;
  detail::put_u32le(out, static_cast<std::uint32_t>(f.values.rows()));
  detail::put_u32le(out, static_cast<std::uint32_t>(f.values.cols()));
  for (Eigen::Index i = 0; i < f.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < f.values.cols(); ++j) {
      std::uint64_t bits;
      const double v = f.values(i, j);
      std::memcpy(&bits, &v, sizeof bits);
      for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
    }
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) {
    throw std::runtime_error("cannot open for writing: " + path.string());
  }
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

inline FeatureMatrix load_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open feature file: " + path.string());
  }
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  const auto fail = [&]() -> std::runtime_error {
    return std::runtime_error("malformed feature file: " + path.string());
  };
  const unsigned char* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 16 || bytes.substr(0, 4) != "SVFM") throw fail();
  std::size_t pos = 4;
  if (detail::read_u32le(p + pos) != 1) throw fail();
  pos += 4;
  const std::uint32_t name_len = detail::read_u32le(p + pos);
  pos += 4;
  if (pos + name_len + 8 > bytes.size()) throw fail();
  FeatureMatrix f;
  f.chain_id = bytes.substr(pos, name_len);
  pos += name_len;
  const std::uint32_t rows = detail::read_u32le(p + pos);
  const std::uint32_t cols = detail::read_u32le(p + pos + 4);
  pos += 8;
  if (pos + 8ull * rows * cols != bytes.size()) throw fail();
  f.values.resize(rows, cols);
  for (std::uint32_t i = 0; i < rows; ++i) {
    for (std::uint32_t j = 0; j < cols; ++j) {
      std::uint64_t bits = 0;
      for (int b = 7; b >= 0; --b) bits = (bits << 8) | p[pos + b];
      pos += 8;
      double v;
      std::memcpy(&v, &bits, sizeof v);
      f.values(i, j) = v;
    }
  }
  return f;
}

}  // namespace spkver
