// spkver/evaluation.hpp

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

// Verification trials and error-rate evaluation: claimed-identity scoring
// with optional cohort normalization, per-speaker threshold sweeps, the
// leftmost equal-error-rate operating point, fixed-threshold evaluation
// under mismatched conditions, and the protocol runner that ties a corpus,
// parameterization chains and condition pairs into result tables.

#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "spkver/condition.hpp"
#include "spkver/corpus.hpp"
#include "spkver/features.hpp"
#include "spkver/speaker_model.hpp"

namespace spkver {

struct Trial {
  std::string claimed_speaker;
  std::string utterance_id;
  bool is_target = false;
};

struct TrialSet {
  Condition train_condition;
  Condition test_condition;
  std::vector<Trial> trials;
};

struct Score {
  std::string claimed_speaker;
  std::string utterance_id;
  bool is_target = false;
  double distance = 0.0;
  double raw_likelihood = 0.0;
  std::optional<double> normalized;

  double value() const { return normalized ? *normalized : raw_likelihood; }
};

// Covariance statistics of one test utterance under a specific chain.
struct UtteranceStats {
  Eigen::MatrixXd covariance;
  std::string chain_id;
  std::int64_t n_frames = 0;
};

inline UtteranceStats utterance_stats(const FeatureMatrix& features) {
  UtteranceStats stats;
  stats.chain_id = features.chain_id;
  stats.n_frames = features.values.rows();
  bool regularized = false;
  stats.covariance = covariance_of(features.values, &regularized);
  return stats;
}

// Scores every trial in order. When cohorts are supplied, each score also
// carries the cohort-normalized likelihood L - max(cohort L), all computed
// on the same test utterance.
inline std::vector<Score> score_trials(
    const TrialSet& trials, const std::map<std::string, SpeakerModel>& models,
    const std::map<std::string, UtteranceStats>& stats,
    const std::map<std::string, CohortSet>* cohorts = nullptr, double a = 2.0) {
  std::map<std::pair<std::string, std::string>, std::pair<double, double>> memo;
  const auto score_one = [&](const std::string& model_id,
                             const std::string& utt_id) -> std::pair<double, double> {
    const auto key = std::make_pair(model_id, utt_id);
    const auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    const auto model_it = models.find(model_id);
    if (model_it == models.end()) {
      throw std::runtime_error("no model for claimed speaker '" + model_id + "'");
    }
    const auto stats_it = stats.find(utt_id);
    if (stats_it == stats.end()) {
      throw std::runtime_error("no features for utterance '" + utt_id + "'");
    }
    if (model_it->second.chain_id != stats_it->second.chain_id) {
      throw std::runtime_error("chain mismatch: model '" + model_id + "' uses " +
                               model_it->second.chain_id + ", utterance '" + utt_id +
                               "' uses " + stats_it->second.chain_id);
    }
    const double d =
        sphericity_distance(model_it->second.covariance, stats_it->second.covariance);
    const auto result = std::make_pair(d, likelihood(d, a));
    memo.emplace(key, result);
    return result;
  };

  std::vector<Score> scores;
  scores.reserve(trials.trials.size());
  for (const Trial& trial : trials.trials) {
    Score s;
    s.claimed_speaker = trial.claimed_speaker;
    s.utterance_id = trial.utterance_id;
    s.is_target = trial.is_target;
    const auto [d, L] = score_one(trial.claimed_speaker, trial.utterance_id);
    s.distance = d;
    s.raw_likelihood = L;
    if (cohorts) {
      const auto cohort_it = cohorts->find(trial.claimed_speaker);
      if (cohort_it == cohorts->end()) {
        throw std::runtime_error("no cohort set for speaker '" + trial.claimed_speaker + "'");
      }
      std::vector<double> cohort_l;
      cohort_l.reserve(cohort_it->second.cohort_ids.size());
      for (const std::string& other : cohort_it->second.cohort_ids) {
        cohort_l.push_back(score_one(other, trial.utterance_id).second);
      }
      s.normalized = normalize_score(L, cohort_l);
    }
    scores.push_back(std::move(s));
  }
  return scores;
}

// far / frr arrays over an evenly spaced threshold grid. A score is accepted
// iff score >= t, so far is non-increasing and frr non-decreasing in t.
struct SweepCurve {
  std::vector<double> thresholds;
  std::vector<double> far;
  std::vector<double> frr;
};

inline SweepCurve sweep_thresholds(std::span<const double> target_scores,
                                   std::span<const double> impostor_scores,
                                   int grid_size, double lo, double hi,
                                   const std::string& label = "") {
  const std::string who = label.empty() ? "" : (" for " + label);
  if (target_scores.empty()) {
    throw std::runtime_error("no target scores" + who);
  }
  if (impostor_scores.empty()) {
    throw std::runtime_error("no impostor scores" + who);
  }
  if (grid_size < 2) {
    throw std::invalid_argument("threshold grid needs at least 2 points");
  }
  SweepCurve curve;
  curve.thresholds.resize(grid_size);
  curve.far.resize(grid_size);
  curve.frr.resize(grid_size);
  for (int k = 0; k < grid_size; ++k) {
    const double t = lo + (hi - lo) * k / (grid_size - 1);
    std::int64_t accepts = 0, rejects = 0;
    for (double s : impostor_scores) {
      if (s >= t) ++accepts;
    }
    for (double s : target_scores) {
      if (s < t) ++rejects;
    }
    curve.thresholds[k] = t;
    curve.far[k] = static_cast<double>(accepts) / impostor_scores.size();
    curve.frr[k] = static_cast<double>(rejects) / target_scores.size();
  }
  return curve;
}

struct EerPoint {
  std::size_t index = 0;
  double threshold = 0.0;
  double far = 0.0;
  double frr = 0.0;
  double eer = 0.0;
  bool no_crossing = false;
};

// The leftmost grid point with far <= frr. When several thresholds satisfy
// far = frr, the lowest one keeps the rejection rate from blowing up under
// mismatched testing conditions. No crossing at all selects the rightmost
// point and sets the flag.
inline EerPoint select_eer_threshold(const SweepCurve& curve) {
  if (curve.thresholds.empty() || curve.far.size() != curve.thresholds.size() ||
      curve.frr.size() != curve.thresholds.size()) {
    throw std::invalid_argument("threshold sweep arrays are empty or mismatched");
  }
  EerPoint point;
  point.no_crossing = true;
  for (std::size_t k = 0; k < curve.thresholds.size(); ++k) {
    if (curve.far[k] <= curve.frr[k]) {
      point.index = k;
      point.no_crossing = false;
      break;
    }
  }
  if (point.no_crossing) {
    point.index = curve.thresholds.size() - 1;
  }
  point.threshold = curve.thresholds[point.index];
  point.far = curve.far[point.index];
  point.frr = curve.frr[point.index];
  point.eer = (point.far + point.frr) / 2.0;
  return point;
}

struct SpeakerThreshold {
  double threshold = 0.0;
  double eer = 0.0;
  double far = 0.0;
  double frr = 0.0;
  bool no_crossing = false;
};

// Per-speaker threshold selection from a scored trial list. Raw likelihoods
// sweep the fixed [0, 1] grid; cohort-normalized scores sweep the observed
// range of each speaker's own scores.
inline std::map<std::string, SpeakerThreshold> set_thresholds(
    std::span<const Score> scores, int grid_size = 100, bool cohort_mode = false) {
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_speaker;
  for (const Score& s : scores) {
    auto& [targets, impostors] = by_speaker[s.claimed_speaker];
    (s.is_target ? targets : impostors).push_back(s.value());
  }
  std::map<std::string, SpeakerThreshold> thresholds;
  for (const auto& [speaker, sets] : by_speaker) {
    const auto& [targets, impostors] = sets;
    double lo = 0.0, hi = 1.0;
    if (cohort_mode) {
      lo = std::numeric_limits<double>::infinity();
      hi = -lo;
      for (double v : targets) lo = std::min(lo, v), hi = std::max(hi, v);
      for (double v : impostors) lo = std::min(lo, v), hi = std::max(hi, v);
    }
    const SweepCurve curve =
        sweep_thresholds(targets, impostors, grid_size, lo, hi, "speaker " + speaker);
    const EerPoint point = select_eer_threshold(curve);
    thresholds[speaker] = {point.threshold, point.eer, point.far, point.frr,
                           point.no_crossing};
  }
  return thresholds;
}

struct EvalResult {
  double far = 0.0;
  double frr = 0.0;
  double hter = 0.0;
  std::int64_t n_target = 0;
  std::int64_t n_impostor = 0;
  std::int64_t false_accepts = 0;
  std::int64_t false_rejects = 0;
};

// Accept iff score >= T(claimed speaker).
inline EvalResult evaluate_fixed_thresholds(std::span<const Score> scores,
                                            const std::map<std::string, double>& thresholds) {
  EvalResult result;
  for (const Score& s : scores) {
    const auto it = thresholds.find(s.claimed_speaker);
    if (it == thresholds.end()) {
      throw std::runtime_error("no threshold for claimed speaker '" + s.claimed_speaker + "'");
    }
    const bool accept = s.value() >= it->second;
    if (s.is_target) {
      ++result.n_target;
      if (!accept) ++result.false_rejects;
    } else {
      ++result.n_impostor;
      if (accept) ++result.false_accepts;
    }
  }
  if (result.n_target > 0) {
    result.frr = static_cast<double>(result.false_rejects) / result.n_target;
  }
  if (result.n_impostor > 0) {
    result.far = static_cast<double>(result.false_accepts) / result.n_impostor;
  }
  result.hter = (result.far + result.frr) / 2.0;
  return result;
}

// ---------------------------------------------------------------------------
// Protocol runner
// ---------------------------------------------------------------------------

using UtteranceLoader = std::function<AudioSignal(const ManifestRecord&)>;

// Supplies a trained model for (speaker, train condition, chain), or nullopt
// when unavailable (the cell is then skipped).
using ModelProvider = std::function<std::optional<SpeakerModel>(
    const std::string& speaker, const Condition& train_condition,
    const std::string& chain_id)>;

enum class CohortChoice { Off, On, Both };

struct ProtocolOptions {
  std::vector<ParamChain> chains;
  std::vector<ConditionPair> pairs;
  CohortChoice cohorts = CohortChoice::Both;
  int cohort_size = 5;
  double likelihood_a = 2.0;
  int grid_size = 100;
  FrontendConfig frontend;
  // Optional externally trained models (e.g. loaded from disk). When absent,
  // models are trained from the manifest's train utterances.
  ModelProvider model_provider;
  // Optional pre-set per-speaker thresholds; skips the dev phase.
  std::optional<std::map<std::string, double>> fixed_thresholds;
  bool fixed_thresholds_cohorts = false;
};

struct ResultRow {
  ConditionPair pair;
  std::string chain;
  bool cohorts = false;
  std::string phase;  // "dev_eer" or "test_hter"
  double far = 0.0;
  double frr = 0.0;
  double value = 0.0;  // mean per-speaker EER, or HTER
  int grid_size = 100;
  std::int64_t n_target = 0;
  std::int64_t n_impostor = 0;
};

struct DetTable {
  ConditionPair pair;
  std::string chain;
  bool cohorts = false;
  SweepCurve curve;
};

struct SkippedCell {
  ConditionPair pair;
  std::string chain;  // "*" when the whole pair is skipped
  std::string reason;
};

struct CellThresholds {
  ConditionPair pair;
  std::string chain;
  bool cohorts = false;
  std::map<std::string, SpeakerThreshold> per_speaker;
};

struct ProtocolResult {
  std::vector<ResultRow> rows;
  std::vector<DetTable> det_tables;
  std::vector<SkippedCell> skipped;
  std::vector<CellThresholds> thresholds;
  std::vector<std::string> warnings;
};

namespace detail {

struct AnalyzedUtterance {
  std::vector<FrameAnalysis> frames;
  double seconds = 0.0;
};

// Frame analyses are chain-independent, so each utterance is analyzed once
// per pair and reused by every chain.
class AnalysisCache {
 public:
  AnalysisCache(const UtteranceLoader& loader, const FrontendConfig& frontend)
      : loader_(loader), frontend_(frontend) {}

  const AnalyzedUtterance& get(const ManifestRecord& record) {
    auto it = cache_.find(record.utterance_id);
    if (it != cache_.end()) return it->second;
    const AudioSignal signal = loader_(record);
    AnalyzedUtterance analyzed;
    analyzed.seconds = static_cast<double>(signal.samples.size()) /
                       std::max(1, signal.sample_rate);
    try {
      analyzed.frames = analyze_utterance(signal, frontend_);
    } catch (const std::exception& e) {
      throw std::runtime_error("utterance '" + record.utterance_id + "': " + e.what());
    }
    return cache_.emplace(record.utterance_id, std::move(analyzed)).first->second;
  }

 private:
  const UtteranceLoader& loader_;
  FrontendConfig frontend_;
  std::map<std::string, AnalyzedUtterance> cache_;
};

inline const double kMinTrainSeconds = 60.0;

}  // namespace detail

inline ProtocolResult run_protocol(const Manifest& manifest, const UtteranceLoader& loader,
                                   const ProtocolOptions& options) {
  if (options.chains.empty()) {
    throw std::invalid_argument("protocol needs at least one chain");
  }
  if (options.pairs.empty()) {
    throw std::invalid_argument("protocol needs at least one condition pair");
  }
  const std::vector<std::string> speakers = manifest.speakers();
  if (speakers.size() < 2) {
    throw std::invalid_argument("protocol needs at least 2 speakers");
  }
  std::vector<CohortChoice> modes;
  if (options.fixed_thresholds) {
    modes = {options.fixed_thresholds_cohorts ? CohortChoice::On : CohortChoice::Off};
  } else if (options.cohorts == CohortChoice::Both) {
    modes = {CohortChoice::Off, CohortChoice::On};
  } else {
    modes = {options.cohorts};
  }

  ProtocolResult result;
  detail::AnalysisCache cache(loader, options.frontend);
  for (const ConditionPair& pair : options.pairs) {
    // Collect the records this pair needs.
    std::map<std::string, std::vector<const ManifestRecord*>> train_recs;
    std::vector<const ManifestRecord*> dev_recs, test_recs;
    for (const ManifestRecord& r : manifest.records) {
      if (r.condition == pair.train && r.role == Role::Train) {
        train_recs[r.speaker_id].push_back(&r);
      }
      if (r.condition == pair.test && r.role == Role::Dev) dev_recs.push_back(&r);
      if (r.condition == pair.test && r.role == Role::Test) test_recs.push_back(&r);
    }
    for (auto& [speaker, recs] : train_recs) {
      std::sort(recs.begin(), recs.end(), [](const ManifestRecord* a, const ManifestRecord* b) {
        return a->utterance_id < b->utterance_id;
      });
    }
    const auto by_id = [](const ManifestRecord* a, const ManifestRecord* b) {
      return a->utterance_id < b->utterance_id;
    };
    std::sort(dev_recs.begin(), dev_recs.end(), by_id);
    std::sort(test_recs.begin(), test_recs.end(), by_id);

    std::string missing;
    for (const std::string& speaker : speakers) {
      const bool needs_train = !options.model_provider;
      if (needs_train && !train_recs.count(speaker)) {
        missing = "no train utterances for speaker " + speaker + " under " + pair.train.str();
        break;
      }
      const bool has_dev = std::any_of(dev_recs.begin(), dev_recs.end(),
                                       [&](const ManifestRecord* r) {
                                         return r->speaker_id == speaker;
                                       });
      const bool has_test = std::any_of(test_recs.begin(), test_recs.end(),
                                        [&](const ManifestRecord* r) {
                                          return r->speaker_id == speaker;
                                        });
      if (!options.fixed_thresholds && !has_dev) {
        missing = "no dev sentences for speaker " + speaker + " under " + pair.test.str();
        break;
      }
      if (!has_test) {
        missing = "no test sentences for speaker " + speaker + " under " + pair.test.str();
        break;
      }
    }
    if (!missing.empty()) {
      result.skipped.push_back({pair, "*", missing});
      continue;
    }

    std::set<std::string> short_train_warned;
    for (const ParamChain& chain : options.chains) {
      const std::string chain_id = chain.name();
      try {
        // Models.
        std::map<std::string, SpeakerModel> models;
        bool cell_skipped = false;
        for (const std::string& speaker : speakers) {
          if (options.model_provider) {
            std::optional<SpeakerModel> model =
                options.model_provider(speaker, pair.train, chain_id);
            if (!model) {
              result.skipped.push_back({pair, chain_id,
                                        "missing model for speaker " + speaker + " under " +
                                            pair.train.str()});
              cell_skipped = true;
              break;
            }
            if (model->chain_id != chain_id) {
              throw std::runtime_error("model for speaker " + speaker + " uses chain " +
                                       model->chain_id + ", expected " + chain_id);
            }
            models.emplace(speaker, std::move(*model));
          } else {
            double total_seconds = 0.0;
            std::vector<FeatureMatrix> parts;
            for (const ManifestRecord* rec : train_recs[speaker]) {
              const detail::AnalyzedUtterance& analyzed = cache.get(*rec);
              total_seconds += analyzed.seconds;
              parts.push_back(apply_chain(analyzed.frames, chain, &result.warnings));
            }
            if (total_seconds < detail::kMinTrainSeconds &&
                short_train_warned.insert(speaker).second) {
              result.warnings.push_back("speaker " + speaker + " under " + pair.train.str() +
                                        ": only " + std::to_string(total_seconds) +
                                        " s of training speech (60 s expected)");
            }
            Eigen::Index rows = 0;
            for (const FeatureMatrix& part : parts) rows += part.values.rows();
            FeatureMatrix stacked;
            stacked.chain_id = chain_id;
            stacked.values.resize(rows, parts[0].values.cols());
            Eigen::Index at = 0;
            for (const FeatureMatrix& part : parts) {
              stacked.values.middleRows(at, part.values.rows()) = part.values;
              at += part.values.rows();
            }
            models.emplace(speaker, train_covariance(stacked, speaker));
          }
        }
        if (cell_skipped) continue;

        // Test utterance statistics (and dev, unless thresholds are fixed).
        std::map<std::string, UtteranceStats> stats;
        std::map<std::string, Eigen::MatrixXd> first_dev_cov;
        const auto add_stats = [&](const ManifestRecord* rec) {
          if (stats.count(rec->utterance_id)) return;
          const detail::AnalyzedUtterance& analyzed = cache.get(*rec);
          stats.emplace(rec->utterance_id,
                        utterance_stats(apply_chain(analyzed.frames, chain, &result.warnings)));
        };
        TrialSet dev_trials{pair.train, pair.test, {}};
        TrialSet test_trials{pair.train, pair.test, {}};
        if (!options.fixed_thresholds) {
          for (const ManifestRecord* rec : dev_recs) {
            add_stats(rec);
            if (rec->dev_index == 1) {
              first_dev_cov.emplace(rec->speaker_id, stats.at(rec->utterance_id).covariance);
            }
            for (const std::string& claimed : speakers) {
              dev_trials.trials.push_back({claimed, rec->utterance_id,
                                           claimed == rec->speaker_id});
            }
          }
        }
        for (const ManifestRecord* rec : test_recs) {
          add_stats(rec);
          for (const std::string& claimed : speakers) {
            test_trials.trials.push_back({claimed, rec->utterance_id,
                                          claimed == rec->speaker_id});
          }
        }

        for (CohortChoice mode : modes) {
          const bool use_cohorts = (mode == CohortChoice::On);
          std::map<std::string, CohortSet> cohorts;
          if (use_cohorts) {
            if (options.fixed_thresholds) {
              // Cohorts are normally chosen from dev sentences; with fixed
              // thresholds the dev phase is skipped, so choose them from the
              // first test sentence of each speaker instead.
              std::map<std::string, Eigen::MatrixXd> first_test_cov;
              for (const ManifestRecord* rec : test_recs) {
                if (!first_test_cov.count(rec->speaker_id)) {
                  first_test_cov.emplace(rec->speaker_id,
                                         stats.at(rec->utterance_id).covariance);
                }
              }
              cohorts = select_cohorts(models, first_test_cov, options.cohort_size,
                                       options.likelihood_a, &result.warnings);
            } else {
              cohorts = select_cohorts(models, first_dev_cov, options.cohort_size,
                                       options.likelihood_a, &result.warnings);
            }
          }

          std::map<std::string, double> applied;
          if (options.fixed_thresholds) {
            applied = *options.fixed_thresholds;
          } else {
            const std::vector<Score> dev_scores =
                score_trials(dev_trials, models, stats, use_cohorts ? &cohorts : nullptr,
                             options.likelihood_a);
            const std::map<std::string, SpeakerThreshold> per_speaker =
                set_thresholds(dev_scores, options.grid_size, use_cohorts);
            result.thresholds.push_back({pair, chain_id, use_cohorts, per_speaker});
            double eer_sum = 0.0;
            for (const auto& [speaker, st] : per_speaker) {
              applied[speaker] = st.threshold;
              eer_sum += st.eer;
            }
            const EvalResult dev_eval = evaluate_fixed_thresholds(dev_scores, applied);
            ResultRow dev_row;
            dev_row.pair = pair;
            dev_row.chain = chain_id;
            dev_row.cohorts = use_cohorts;
            dev_row.phase = "dev_eer";
            dev_row.far = dev_eval.far;
            dev_row.frr = dev_eval.frr;
            dev_row.value = eer_sum / static_cast<double>(per_speaker.size());
            dev_row.grid_size = options.grid_size;
            dev_row.n_target = dev_eval.n_target;
            dev_row.n_impostor = dev_eval.n_impostor;
            result.rows.push_back(dev_row);
          }

          const std::vector<Score> test_scores =
              score_trials(test_trials, models, stats, use_cohorts ? &cohorts : nullptr,
                           options.likelihood_a);
          const EvalResult test_eval = evaluate_fixed_thresholds(test_scores, applied);
          ResultRow test_row;
          test_row.pair = pair;
          test_row.chain = chain_id;
          test_row.cohorts = use_cohorts;
          test_row.phase = "test_hter";
          test_row.far = test_eval.far;
          test_row.frr = test_eval.frr;
          test_row.value = test_eval.hter;
          test_row.grid_size = options.grid_size;
          test_row.n_target = test_eval.n_target;
          test_row.n_impostor = test_eval.n_impostor;
          result.rows.push_back(test_row);

          // Pooled DET data over the test scores.
          std::vector<double> targets, impostors;
          for (const Score& s : test_scores) {
            (s.is_target ? targets : impostors).push_back(s.value());
          }
          double lo = 0.0, hi = 1.0;
          if (use_cohorts) {
            lo = std::numeric_limits<double>::infinity();
            hi = -lo;
            for (double v : targets) lo = std::min(lo, v), hi = std::max(hi, v);
            for (double v : impostors) lo = std::min(lo, v), hi = std::max(hi, v);
          }
          DetTable det;
          det.pair = pair;
          det.chain = chain_id;
          det.cohorts = use_cohorts;
          det.curve = sweep_thresholds(targets, impostors, options.grid_size, lo, hi);
          result.det_tables.push_back(std::move(det));
        }
      } catch (const std::exception& e) {
        result.skipped.push_back({pair, chain_id, e.what()});
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// CSV / file output
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    throw std::runtime_error("cannot open for writing: " + path.string());
  }
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

}  // namespace detail

inline constexpr const char* kResultsHeader =
    "train_condition,test_condition,chain,cohort_mode,phase,FAR,FRR,value,"
    "threshold_count,n_target,n_impostor";

inline void write_results_csv(const std::filesystem::path& path,
                              const std::vector<ResultRow>& rows) {
  std::string out = std::string(kResultsHeader) + "\n";
  for (const ResultRow& r : rows) {
    out += r.pair.train.str() + "," + r.pair.test.str() + "," + r.chain + "," +
           (r.cohorts ? "on" : "off") + "," + r.phase + "," + detail::fmt_double(r.far) +
           "," + detail::fmt_double(r.frr) + "," + detail::fmt_double(r.value) + "," +
           std::to_string(r.grid_size) + "," + std::to_string(r.n_target) + "," +
           std::to_string(r.n_impostor) + "\n";
  }
  detail::write_text_file(path, out);
}

inline void write_det_csv(const std::filesystem::path& path, const DetTable& det) {
  std::string out = "threshold,far,frr\n";
  for (std::size_t k = 0; k < det.curve.thresholds.size(); ++k) {
    out += detail::fmt_double(det.curve.thresholds[k]) + "," +
           detail::fmt_double(det.curve.far[k]) + "," +
           detail::fmt_double(det.curve.frr[k]) + "\n";
  }
  detail::write_text_file(path, out);
}

inline void write_skipped_csv(const std::filesystem::path& path,
                              const std::vector<SkippedCell>& skipped) {
  std::string out = "train_condition,test_condition,chain,reason\n";
  for (const SkippedCell& s : skipped) {
    std::string reason = s.reason;
    for (char& c : reason) {
      if (c == ',' || c == '\n') c = ';';
    }
    out += s.pair.train.str() + "," + s.pair.test.str() + "," + s.chain + "," + reason + "\n";
  }
  detail::write_text_file(path, out);
}

// Threshold file: a few "# key=value" metadata lines, then per-speaker rows.
struct ThresholdFile {
  ConditionPair pair;
  std::string chain;
  bool cohorts = false;
  int grid_size = 100;
  int cohort_size = 5;
  std::map<std::string, SpeakerThreshold> per_speaker;

  std::map<std::string, double> thresholds() const {
    std::map<std::string, double> t;
    for (const auto& [speaker, st] : per_speaker) t[speaker] = st.threshold;
    return t;
  }
};

inline void save_thresholds(const std::filesystem::path& path, const ThresholdFile& file) {
  std::string out;
  out += "# spkver thresholds v1\n";
  out += "# pair=" + file.pair.str() + "\n";
  out += "# chain=" + file.chain + "\n";
  out += std::string("# cohort_mode=") + (file.cohorts ? "on" : "off") + "\n";
  out += "# grid=" + std::to_string(file.grid_size) + "\n";
  out += "# cohorts=" + std::to_string(file.cohort_size) + "\n";
  out += "speaker_id,threshold,eer,far,frr,no_crossing\n";
  for (const auto& [speaker, st] : file.per_speaker) {
    out += speaker + "," + detail::fmt_double(st.threshold) + "," +
           detail::fmt_double(st.eer) + "," + detail::fmt_double(st.far) + "," +
           detail::fmt_double(st.frr) + "," + (st.no_crossing ? "1" : "0") + "\n";
  }
  detail::write_text_file(path, out);
}

inline ThresholdFile load_thresholds(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open thresholds file: " + path.string());
  }
  ThresholdFile file;
  std::string line;
  bool saw_header = false, saw_magic = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string body = line.substr(1);
      const std::string trimmed = detail::trim(body);
      if (trimmed == "spkver thresholds v1") {
        saw_magic = true;
        continue;
      }
      const std::size_t eq = trimmed.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = trimmed.substr(0, eq);
      const std::string value = trimmed.substr(eq + 1);
      if (key == "pair") {
        file.pair = ConditionPair::parse(value);
      } else if (key == "chain") {
        file.chain = value;
      } else if (key == "cohort_mode") {
        file.cohorts = (value == "on");
      } else if (key == "grid") {
        file.grid_size = std::stoi(value);
      } else if (key == "cohorts") {
        file.cohort_size = std::stoi(value);
      }
      continue;
    }
    if (!saw_header) {
      if (line != "speaker_id,threshold,eer,far,frr,no_crossing") {
        throw std::runtime_error("thresholds file " + path.string() +
                                 " has an unexpected column header");
      }
      saw_header = true;
      continue;
    }
    const std::vector<std::string> fields = detail::split_csv_line(line);
    if (fields.size() != 6) {
      throw std::runtime_error("thresholds file " + path.string() + " line " +
                               std::to_string(line_no) + ": expected 6 fields");
    }
    SpeakerThreshold st;
    st.threshold = std::stod(fields[1]);
    st.eer = std::stod(fields[2]);
    st.far = std::stod(fields[3]);
    st.frr = std::stod(fields[4]);
    st.no_crossing = (fields[5] == "1");
    file.per_speaker[fields[0]] = st;
  }
  if (!saw_magic || !saw_header || file.per_speaker.empty()) {
    throw std::runtime_error("malformed thresholds file: " + path.string());
  }
  return file;
}

}  // namespace spkver
