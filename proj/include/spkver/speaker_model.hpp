// spkver/speaker_model.hpp

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

// Covariance speaker models compared with the arithmetic-harmonic sphericity
// measure, likelihood mapping and cohort-based score normalization.

#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "spkver/bytes.hpp"
#include "spkver/features.hpp"

namespace spkver {

// Symmetric positive-definite covariance model of one speaker's features.
struct SpeakerModel {
  std::string speaker_id;
  std::string chain_id;
  Eigen::MatrixXd covariance;
  std::int64_t n_frames = 0;
  bool regularized = false;
};

// Population covariance about the column means, with a relative ridge on the
// diagonal when the smallest eigenvalue falls below eps * trace / D.
inline Eigen::MatrixXd covariance_of(const Eigen::MatrixXd& rows, bool* regularized,
                                     double eps = 1e-8) {
  const Eigen::Index n = rows.rows();
  const Eigen::Index dim = rows.cols();
  if (n < 2) {
    throw std::invalid_argument("covariance needs at least 2 frames, got " +
                                std::to_string(n));
  }
  const Eigen::RowVectorXd mean = rows.colwise().mean();
  const Eigen::MatrixXd centered = rows.rowwise() - mean;
  Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n);
  cov = ((cov + cov.transpose()) / 2.0).eval();  // exact symmetry
  if (regularized) *regularized = false;
  const double floor = eps * cov.trace() / static_cast<double>(dim);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov,
                                                           Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < floor) {
    cov.diagonal().array() += floor;
    if (regularized) *regularized = true;
  }
  if (!(cov.trace() > 0.0)) {
    throw std::runtime_error("degenerate model: all frames identical");
  }
  return cov;
}

inline SpeakerModel train_covariance(const FeatureMatrix& features,
                                     const std::string& speaker_id) {
  if (!features.values.allFinite()) {
    throw std::invalid_argument("features for speaker " + speaker_id +
                                " contain non-finite values");
  }
  SpeakerModel model;
  model.speaker_id = speaker_id;
  model.chain_id = features.chain_id;
  model.n_frames = features.values.rows();
  try {
    model.covariance = covariance_of(features.values, &model.regularized);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(std::string(e.what()) + " (speaker " + speaker_id + ")");
  }
  return model;
}

// Arithmetic-harmonic sphericity measure
//   d(A, B) = log( tr(B A^-1) * tr(A B^-1) ) - 2 log(D).
// Zero iff the matrices are proportional; symmetric in its arguments.
// Solved through Cholesky factorizations, never an explicit inverse.
inline double sphericity_distance(const Eigen::MatrixXd& model_cov,
                                  const Eigen::MatrixXd& test_cov) {
  const Eigen::Index dim = model_cov.rows();
  if (model_cov.cols() != dim || test_cov.rows() != dim || test_cov.cols() != dim) {
    throw std::invalid_argument(
        "sphericity distance dimension mismatch: " + std::to_string(model_cov.rows()) +
        "x" + std::to_string(model_cov.cols()) + " vs " +
        std::to_string(test_cov.rows()) + "x" + std::to_string(test_cov.cols()));
  }
  const Eigen::LLT<Eigen::MatrixXd> llt_model(model_cov);
  if (llt_model.info() != Eigen::Success) {
    throw std::runtime_error("model covariance is not positive definite");
  }
  const Eigen::LLT<Eigen::MatrixXd> llt_test(test_cov);
  if (llt_test.info() != Eigen::Success) {
    throw std::runtime_error("test covariance is not positive definite");
  }
  const double tr_test_over_model = llt_model.solve(test_cov).trace();
  const double tr_model_over_test = llt_test.solve(model_cov).trace();
  return std::log(tr_test_over_model * tr_model_over_test) -
         2.0 * std::log(static_cast<double>(dim));
}

// Match score in (0, 1]: L = exp(-a d).
inline double likelihood(double distance, double a = 2.0) {
  if (!(a > 0.0)) {
    throw std::invalid_argument("likelihood exponent must be positive");
  }
  return std::exp(-a * distance);
}

// The competing models whose best likelihood is subtracted from a claimed
// speaker's likelihood.
struct CohortSet {
  std::string speaker_id;
  std::vector<std::string> cohort_ids;
};

// Keeps the K most likely competitors; ties break toward the smaller id.
inline CohortSet pick_top_cohorts(const std::string& speaker_id,
                                  std::vector<std::pair<std::string, double>> candidates,
                                  int k, std::vector<std::string>* warnings = nullptr) {
  std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  CohortSet cohort;
  cohort.speaker_id = speaker_id;
  const int take = std::min<int>(k, static_cast<int>(candidates.size()));
  for (int i = 0; i < take; ++i) {
    cohort.cohort_ids.push_back(candidates[i].first);
  }
  if (take < k && warnings) {
    warnings->push_back("speaker " + speaker_id + ": only " + std::to_string(take) +
                        " cohort candidates available (wanted " + std::to_string(k) + ")");
  }
  return cohort;
}

// Scores every other model against each speaker's designated first sentence
// and keeps the K highest-likelihood competitors.
inline std::map<std::string, CohortSet> select_cohorts(
    const std::map<std::string, SpeakerModel>& models,
    const std::map<std::string, Eigen::MatrixXd>& first_sentence_cov, int k = 5,
    double a = 2.0, std::vector<std::string>* warnings = nullptr) {
  std::map<std::string, CohortSet> cohorts;
  for (const auto& [speaker, cov] : first_sentence_cov) {
    std::vector<std::pair<std::string, double>> candidates;
    for (const auto& [other, model] : models) {
      if (other == speaker) continue;
      candidates.emplace_back(other,
                              likelihood(sphericity_distance(model.covariance, cov), a));
    }
    cohorts[speaker] = pick_top_cohorts(speaker, std::move(candidates), k, warnings);
  }
  return cohorts;
}

// Cohort normalization; an empty cohort set means raw scoring.
inline double normalize_score(double own_likelihood,
                              std::span<const double> cohort_likelihoods) {
  if (cohort_likelihoods.empty()) {
    return own_likelihood;
  }
  return own_likelihood -
         *std::max_element(cohort_likelihoods.begin(), cohort_likelihoods.end());
}

// ---------------------------------------------------------------------------
// Model file format (version 1, little-endian):
//   "SVCM" | u32 version | u32 len + speaker_id | u32 len + chain_id |
//   u32 D | u64 n_frames | u8 regularized | D(D+1)/2 f64 upper triangle,
//   row-major.
// ---------------------------------------------------------------------------

namespace detail {

inline void put_string(std::string& out, const std::string& s) {
  put_u32le(out, static_cast<std::uint32_t>(s.size()));
  out += s;
}

struct ByteReader {
  const unsigned char* data;
  std::size_t size;
  std::size_t pos = 0;
  std::string context;

  void need(std::size_t n) const {
    if (pos + n > size) {
      throw std::runtime_error("malformed model file " + context + ": truncated");
    }
  }
  std::uint32_t u32() {
    need(4);
    const std::uint32_t v = read_u32le(data + pos);
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    const std::uint64_t lo = read_u32le(data + pos);
    const std::uint64_t hi = read_u32le(data + pos + 4);
    pos += 8;
    return lo | (hi << 32);
  }
  std::uint8_t u8() {
    need(1);
    return data[pos++];
  }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(data + pos), n);
    pos += n;
    return s;
  }
  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) bits = (bits << 8) | data[pos + i];
    pos += 8;
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }
};

inline void put_f64le(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
  }
}

}  // namespace detail

inline constexpr std::uint32_t kModelFormatVersion = 1;

inline void save_model(const std::filesystem::path& path, const SpeakerModel& model) {
  const Eigen::Index dim = model.covariance.rows();
  std::string out;
  out += "SVCM";
  detail::put_u32le(out, kModelFormatVersion);
  detail::put_string(out, model.speaker_id);
  detail::put_string(out, model.chain_id);
  detail::put_u32le(out, static_cast<std::uint32_t>(dim));
  detail::put_u32le(out, static_cast<std::uint32_t>(model.n_frames & 0xffffffffULL));
  detail::put_u32le(out, static_cast<std::uint32_t>(model.n_frames >> 32));
  out.push_back(model.regularized ? 1 : 0);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = i; j < dim; ++j) {
      detail::put_f64le(out, model.covariance(i, j));
    }
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

inline SpeakerModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open model file: " + path.string());
  }
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  detail::ByteReader r{reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(),
                       0, path.string()};
  r.need(4);
  if (bytes.substr(0, 4) != "SVCM") {
    throw std::runtime_error("malformed model file " + path.string() + ": bad magic");
  }
  r.pos = 4;
  const std::uint32_t version = r.u32();
  if (version != kModelFormatVersion) {
    throw std::runtime_error("unsupported model format version " +
                             std::to_string(version) + " in " + path.string());
  }
  SpeakerModel model;
  model.speaker_id = r.str();
  model.chain_id = r.str();
  const std::uint32_t dim = r.u32();
  model.n_frames = static_cast<std::int64_t>(r.u64());
  model.regularized = r.u8() != 0;
  model.covariance.resize(dim, dim);
  for (std::uint32_t i = 0; i < dim; ++i) {
    for (std::uint32_t j = i; j < dim; ++j) {
      const double v = r.f64();
      model.covariance(i, j) = v;
      model.covariance(j, i) = v;
    }
  }
  if (r.pos != r.size) {
    throw std::runtime_error("malformed model file " + path.string() + ": trailing bytes");
  }
  return model;
}

}  // namespace spkver
