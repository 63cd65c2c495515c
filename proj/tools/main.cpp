// tools/main.cpp

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

// Batch command-line surface: corpus synthesis, feature extraction, model
// training, threshold fixing and protocol evaluation.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spkver/spkver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// All chains reported in the parameterization comparison tables.
const std::vector<std::string> kSweepChains = {
    "LPCC",    "LPCC[3..P]", "SIGMA-LPCC",    "ACW",     "CMS",
    "CMS+ACW", "CMS+ACW+SIGMA", "CMS+SIGMA",  "CMS-LW",  "ACW+SIGMA",
    "PF",      "CMS+PF",     "CMS+PF+SIGMA"};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  for (char c : text) {
    if (c == ',') {
      if (!item.empty()) out.push_back(item);
      item.clear();
    } else {
      item.push_back(c);
    }
  }
  if (!item.empty()) out.push_back(item);
  return out;
}

std::string sanitize_filename(const std::string& name) {
  std::string out = name;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '.' || c == '+' || c == '-';
    if (!ok) c = '_';
  }
  return out;
}

// Accepts "S4c" (session + language) or a full "S4cM1" as the base condition
// for microphone-only pair notation.
spkver::Condition parse_base_condition(const std::string& text) {
  if (text.size() == 3) {
    return spkver::Condition::parse(text + "M1");
  }
  return spkver::Condition::parse(text);
}

void ensure_output_dir(const fs::path& dir, bool force) {
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) {
      throw std::runtime_error("output path is not a directory: " + dir.string());
    }
    if (!fs::is_empty(dir) && !force) {
      throw std::runtime_error("output directory " + dir.string() +
                               " is not empty (pass --force to overwrite)");
    }
  } else {
    fs::create_directories(dir);
  }
}

fs::path model_filename(const std::string& speaker, const spkver::Condition& condition,
                        const std::string& chain_id) {
  return speaker + "__" + condition.str() + "__" + sanitize_filename(chain_id) + ".cvm";
}

struct CommonArgs {
  std::string manifest_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::string chains = "LPCC";
  int order = 20;
  int cohorts = 5;
  int grid = 100;
  double likelihood_a = 2.0;
  std::string cohort_mode = "both";
  std::string base_condition = "S1c";
  bool force = false;
};

std::vector<spkver::ParamChain> parse_chains(const std::string& text) {
  std::vector<spkver::ParamChain> chains;
  for (const std::string& name : split_list(text)) {
    chains.push_back(spkver::ParamChain::parse(name));
  }
  if (chains.empty()) {
    throw std::runtime_error("no chains given");
  }
  return chains;
}

spkver::CohortChoice parse_cohort_mode(const std::string& text) {
  if (text == "on") return spkver::CohortChoice::On;
  if (text == "off") return spkver::CohortChoice::Off;
  if (text == "both") return spkver::CohortChoice::Both;
  throw std::runtime_error("bad cohort mode '" + text + "' (expected on, off or both)");
}

json common_config_json(const CommonArgs& args, const std::string& command) {
  json j;
  j["command"] = command;
  j["manifest"] = args.manifest_path;
  j["out"] = args.out_dir;
  j["seed"] = args.seed;
  j["chains"] = args.chains;
  j["order"] = args.order;
  j["cohorts"] = args.cohorts;
  j["grid"] = args.grid;
  j["likelihood_a"] = args.likelihood_a;
  j["cohort_mode"] = args.cohort_mode;
  j["condition"] = args.base_condition;
  return j;
}

void write_config_echo(const fs::path& dir, const json& config) {
  std::ofstream f(dir / "config.json", std::ios::binary | std::ios::trunc);
  f << config.dump(2) << "\n";
}

int cmd_synth(const CommonArgs& common, const spkver::SynthSpec& spec) {
  if (common.out_dir.empty()) throw std::runtime_error("synth needs --out");
  ensure_output_dir(common.out_dir, common.force);
  const spkver::Manifest manifest = spkver::synthesize_corpus(spec, common.out_dir);
  json config;
  config["command"] = "synth";
  config["out"] = common.out_dir;
  config["speakers"] = spec.n_speakers;
  config["seed"] = spec.seed;
  config["sessions"] = spec.sessions;
  config["microphones"] = spec.microphones;
  config["languages"] = spec.languages;
  config["train_seconds"] = spec.train_seconds;
  config["dev_sentences"] = spec.dev_sentences;
  config["test_sentences"] = spec.test_sentences;
  config["sentence_seconds"] = spec.sentence_seconds;
  write_config_echo(common.out_dir, config);
  std::cout << "wrote " << manifest.records.size() << " utterances under "
            << common.out_dir << "\n";
  return 0;
}

int cmd_extract(const CommonArgs& common) {
  if (common.manifest_path.empty()) throw std::runtime_error("extract needs --manifest");
  if (common.out_dir.empty()) throw std::runtime_error("extract needs --out");
  ensure_output_dir(common.out_dir, common.force);
  const spkver::Manifest manifest = spkver::load_manifest(common.manifest_path);
  const std::vector<spkver::ParamChain> chains = parse_chains(common.chains);
  spkver::FrontendConfig frontend;
  frontend.lpc_order = common.order;

  std::string index = "utterance_id,chain,path,frames,dim\n";
  for (const spkver::ParamChain& chain : chains) {
    const std::string chain_id = chain.name();
    const fs::path chain_dir = fs::path(common.out_dir) / "features" /
                               sanitize_filename(chain_id);
    fs::create_directories(chain_dir);
    for (const spkver::ManifestRecord& record : manifest.records) {
      const spkver::AudioSignal signal = spkver::read_utterance(manifest, record);
      std::vector<std::string> warnings;
      const spkver::FeatureMatrix features =
          spkver::extract_features(signal, chain, frontend, &warnings);
      for (const std::string& w : warnings) {
        std::cerr << "warning: " << record.utterance_id << ": " << w << "\n";
      }
      const fs::path out = chain_dir / (record.utterance_id + ".fmat");
      spkver::save_features(out, features);
      index += record.utterance_id + "," + chain_id + "," +
               fs::relative(out, common.out_dir).string() + "," +
               std::to_string(features.values.rows()) + "," +
               std::to_string(features.values.cols()) + "\n";
    }
  }
  std::ofstream f(fs::path(common.out_dir) / "features_index.csv",
                  std::ios::binary | std::ios::trunc);
  f << index;
  write_config_echo(common.out_dir, common_config_json(common, "extract"));
  std::cout << "extracted features for " << manifest.records.size() << " utterances x "
            << chains.size() << " chain(s)\n";
  return 0;
}

int cmd_train(const CommonArgs& common, const std::string& train_conditions) {
  if (common.manifest_path.empty()) throw std::runtime_error("train needs --manifest");
  if (common.out_dir.empty()) throw std::runtime_error("train needs --out");
  ensure_output_dir(common.out_dir, common.force);
  const spkver::Manifest manifest = spkver::load_manifest(common.manifest_path);
  const std::vector<spkver::ParamChain> chains = parse_chains(common.chains);
  spkver::FrontendConfig frontend;
  frontend.lpc_order = common.order;

  std::vector<spkver::Condition> conditions;
  if (train_conditions.empty()) {
    std::set<spkver::Condition> seen;
    for (const spkver::ManifestRecord& r : manifest.records) {
      if (r.role == spkver::Role::Train) seen.insert(r.condition);
    }
    conditions.assign(seen.begin(), seen.end());
  } else {
    for (const std::string& text : split_list(train_conditions)) {
      conditions.push_back(spkver::Condition::parse(text));
    }
  }
  if (conditions.empty()) {
    throw std::runtime_error("manifest has no train utterances");
  }

  const fs::path models_dir = fs::path(common.out_dir) / "models";
  fs::create_directories(models_dir);
  int written = 0;
  for (const spkver::Condition& condition : conditions) {
    for (const std::string& speaker : manifest.speakers()) {
      std::vector<const spkver::ManifestRecord*> recs;
      for (const spkver::ManifestRecord& r : manifest.records) {
        if (r.speaker_id == speaker && r.role == spkver::Role::Train &&
            r.condition == condition) {
          recs.push_back(&r);
        }
      }
      if (recs.empty()) {
        throw std::runtime_error("no train utterances for speaker " + speaker +
                                 " under " + condition.str());
      }
      std::sort(recs.begin(), recs.end(),
                [](const spkver::ManifestRecord* a, const spkver::ManifestRecord* b) {
                  return a->utterance_id < b->utterance_id;
                });
      std::vector<std::vector<spkver::FrameAnalysis>> analyses;
      for (const spkver::ManifestRecord* rec : recs) {
        analyses.push_back(
            spkver::analyze_utterance(spkver::read_utterance(manifest, *rec), frontend));
      }
      for (const spkver::ParamChain& chain : chains) {
        std::vector<spkver::FeatureMatrix> parts;
        for (const auto& frames : analyses) {
          parts.push_back(spkver::apply_chain(frames, chain));
        }
        Eigen::Index rows = 0;
        for (const auto& p : parts) rows += p.values.rows();
        spkver::FeatureMatrix stacked;
        stacked.chain_id = chain.name();
        stacked.values.resize(rows, parts[0].values.cols());
        Eigen::Index at = 0;
        for (const auto& p : parts) {
          stacked.values.middleRows(at, p.values.rows()) = p.values;
          at += p.values.rows();
        }
        const spkver::SpeakerModel model = spkver::train_covariance(stacked, speaker);
        spkver::save_model(models_dir / model_filename(speaker, condition, model.chain_id),
                           model);
        std::cout << "trained speaker=" << speaker << " condition=" << condition.str()
                  << " chain=" << model.chain_id << " frames=" << model.n_frames
                  << " regularized=" << (model.regularized ? 1 : 0) << "\n";
        ++written;
      }
    }
  }
  write_config_echo(common.out_dir, common_config_json(common, "train"));
  std::cout << "wrote " << written << " model file(s) under " << models_dir.string() << "\n";
  return 0;
}

spkver::ProtocolOptions build_protocol_options(const CommonArgs& common,
                                               const std::string& pairs_text,
                                               const std::vector<std::string>& chain_names) {
  if (common.grid < 2) throw std::runtime_error("--grid must be at least 2");
  if (common.cohorts < 1) throw std::runtime_error("--cohorts must be at least 1");
  if (common.order < 1) throw std::runtime_error("--order must be at least 1");
  if (!(common.likelihood_a > 0.0)) throw std::runtime_error("--likelihood-a must be positive");
  spkver::ProtocolOptions options;
  for (const std::string& name : chain_names) {
    options.chains.push_back(spkver::ParamChain::parse(name));
  }
  const spkver::Condition base = parse_base_condition(common.base_condition);
  for (const std::string& text : split_list(pairs_text)) {
    options.pairs.push_back(spkver::ConditionPair::parse(text, base));
  }
  if (options.pairs.empty()) {
    throw std::runtime_error("no condition pairs given (--pairs)");
  }
  options.cohorts = parse_cohort_mode(common.cohort_mode);
  options.cohort_size = common.cohorts;
  options.likelihood_a = common.likelihood_a;
  options.grid_size = common.grid;
  options.frontend.lpc_order = common.order;
  return options;
}

int run_evaluation(const CommonArgs& common, const std::string& pairs_text,
                   const std::vector<std::string>& chain_names,
                   const std::string& models_dir, const std::string& fixed_thresholds_path,
                   const std::string& command) {
  if (common.manifest_path.empty()) throw std::runtime_error(command + " needs --manifest");
  if (common.out_dir.empty()) throw std::runtime_error(command + " needs --out");
  ensure_output_dir(common.out_dir, common.force);
  const spkver::Manifest manifest = spkver::load_manifest(common.manifest_path);
  spkver::ProtocolOptions options = build_protocol_options(common, pairs_text, chain_names);

  if (!models_dir.empty()) {
    const fs::path dir = models_dir;
    options.model_provider = [dir](const std::string& speaker,
                                   const spkver::Condition& condition,
                                   const std::string& chain_id)
        -> std::optional<spkver::SpeakerModel> {
      const fs::path path = dir / model_filename(speaker, condition, chain_id);
      if (!fs::exists(path)) return std::nullopt;
      return spkver::load_model(path);
    };
  }
  if (!fixed_thresholds_path.empty()) {
    const spkver::ThresholdFile file = spkver::load_thresholds(fixed_thresholds_path);
    options.fixed_thresholds = file.thresholds();
    options.fixed_thresholds_cohorts = file.cohorts;
    options.chains = {spkver::ParamChain::parse(file.chain)};
  }

  const spkver::UtteranceLoader loader = [&](const spkver::ManifestRecord& record) {
    return spkver::read_utterance(manifest, record);
  };
  const spkver::ProtocolResult result = spkver::run_protocol(manifest, loader, options);

  for (const std::string& w : result.warnings) {
    std::cerr << "warning: " << w << "\n";
  }
  const fs::path out = common.out_dir;
  spkver::write_results_csv(out / "results.csv", result.rows);
  spkver::write_skipped_csv(out / "skipped.csv", result.skipped);
  fs::create_directories(out / "det");
  for (const spkver::DetTable& det : result.det_tables) {
    const std::string name = det.pair.str() + "__" + sanitize_filename(det.chain) + "__" +
                             (det.cohorts ? "on" : "off") + ".csv";
    spkver::write_det_csv(out / "det" / name, det);
  }
  json config = common_config_json(common, command);
  config["pairs"] = pairs_text;
  config["resolved_chains"] = json::array();
  for (const spkver::ParamChain& chain : options.chains) {
    config["resolved_chains"].push_back(chain.name());
  }
  if (!models_dir.empty()) config["models"] = models_dir;
  if (!fixed_thresholds_path.empty()) config["fixed_thresholds"] = fixed_thresholds_path;
  write_config_echo(out, config);

  for (const spkver::ResultRow& row : result.rows) {
    std::cout << row.pair.train.str() << "->" << row.pair.test.str() << " chain="
              << row.chain << " cohorts=" << (row.cohorts ? "on" : "off")
              << " phase=" << row.phase << " FAR=" << row.far << " FRR=" << row.frr
              << " value=" << row.value << "\n";
  }
  if (!result.skipped.empty()) {
    std::cout << result.skipped.size() << " cell(s) skipped; see skipped.csv\n";
  }
  return 0;
}

int cmd_thresholds(const CommonArgs& common, const std::string& pair_text,
                   const std::string& chain_name) {
  if (common.manifest_path.empty()) throw std::runtime_error("thresholds needs --manifest");
  if (common.out_dir.empty()) throw std::runtime_error("thresholds needs --out");
  if (common.cohort_mode == "both") {
    throw std::runtime_error("thresholds needs --cohort-mode on or off (not both)");
  }
  ensure_output_dir(common.out_dir, common.force);
  const spkver::Manifest manifest = spkver::load_manifest(common.manifest_path);
  spkver::ProtocolOptions options = build_protocol_options(common, pair_text, {chain_name});
  const spkver::UtteranceLoader loader = [&](const spkver::ManifestRecord& record) {
    return spkver::read_utterance(manifest, record);
  };
  const spkver::ProtocolResult result = spkver::run_protocol(manifest, loader, options);
  for (const std::string& w : result.warnings) {
    std::cerr << "warning: " << w << "\n";
  }
  if (!result.skipped.empty()) {
    throw std::runtime_error("threshold fixing failed: " + result.skipped[0].reason);
  }
  if (result.thresholds.empty()) {
    throw std::runtime_error("no thresholds were produced");
  }
  const spkver::CellThresholds& cell = result.thresholds[0];
  spkver::ThresholdFile file;
  file.pair = cell.pair;
  file.chain = cell.chain;
  file.cohorts = cell.cohorts;
  file.grid_size = common.grid;
  file.cohort_size = common.cohorts;
  file.per_speaker = cell.per_speaker;
  spkver::save_thresholds(fs::path(common.out_dir) / "thresholds.csv", file);
  json config = common_config_json(common, "thresholds");
  config["pair"] = pair_text;
  write_config_echo(common.out_dir, config);
  std::cout << "fixed thresholds for " << file.per_speaker.size() << " speaker(s) on "
            << cell.pair.str() << " (chain " << cell.chain << ", cohorts "
            << (cell.cohorts ? "on" : "off") << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"text-independent speaker verification with covariance models"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from an INI file");

  CommonArgs common;
  app.add_option("--manifest", common.manifest_path, "corpus manifest CSV");
  app.add_option("--out", common.out_dir, "output directory");
  app.add_option("--seed", common.seed, "random seed")->capture_default_str();
  app.add_option("--chains", common.chains,
                 "comma-separated parameterization chains (e.g. LPCC,CMS+ACW)")
      ->capture_default_str();
  app.add_option("--order", common.order, "LPC analysis order")->capture_default_str();
  app.add_option("--cohorts", common.cohorts, "cohort size K")->capture_default_str();
  app.add_option("--grid", common.grid, "threshold grid size")->capture_default_str();
  app.add_option("--likelihood-a", common.likelihood_a, "likelihood exponent a")
      ->capture_default_str();
  app.add_option("--cohort-mode", common.cohort_mode, "cohort normalization: on, off or both")
      ->capture_default_str();
  app.add_option("--condition", common.base_condition,
                 "base condition for microphone-only pair notation (e.g. S4c)")
      ->capture_default_str();
  app.add_flag("--force", common.force, "overwrite non-empty output directories");

  spkver::SynthSpec spec;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  synth->fallthrough();
  synth->add_option("--speakers", spec.n_speakers, "number of speakers")
      ->capture_default_str();
  synth->add_option("--sessions", spec.sessions, "recording sessions (1..4)")
      ->capture_default_str();
  synth->add_option("--microphones", spec.microphones, "microphones (1..3)")
      ->capture_default_str();
  synth->add_option("--languages", spec.languages, "languages (1..2)")
      ->capture_default_str();
  synth->add_option("--train-seconds", spec.train_seconds, "training speech per condition")
      ->capture_default_str();
  synth->add_option("--dev-sentences", spec.dev_sentences, "threshold-setting sentences")
      ->capture_default_str();
  synth->add_option("--test-sentences", spec.test_sentences, "held-out test sentences")
      ->capture_default_str();
  synth->add_option("--sentence-seconds", spec.sentence_seconds, "sentence duration")
      ->capture_default_str();

  CLI::App* extract = app.add_subcommand("extract", "extract feature matrices");
  extract->fallthrough();

  std::string train_conditions;
  CLI::App* train = app.add_subcommand("train", "train covariance speaker models");
  train->fallthrough();
  train->add_option("--train-condition", train_conditions,
                    "comma-separated training conditions (default: all with train data)");

  std::string thresholds_pair = "S1cM1S1cM1";
  std::string thresholds_chain = "CMS+ACW";
  CLI::App* thresholds = app.add_subcommand("thresholds", "fix per-speaker thresholds");
  thresholds->fallthrough();
  thresholds->add_option("--pair", thresholds_pair, "condition pair used for fixing")
      ->capture_default_str();
  thresholds->add_option("--chain", thresholds_chain, "parameterization chain")
      ->capture_default_str();

  std::string eval_pairs;
  std::string models_dir;
  std::string fixed_thresholds_path;
  CLI::App* evaluate = app.add_subcommand("evaluate", "run a verification protocol");
  evaluate->fallthrough();
  evaluate->add_option("--pairs", eval_pairs,
                       "comma-separated condition pairs (e.g. M1M1,M1M2 or S4cM1S2cM2)")
      ->required();
  evaluate->add_option("--models", models_dir, "load models written by 'train'");
  evaluate->add_option("--fixed-thresholds", fixed_thresholds_path,
                       "apply a thresholds.csv instead of sweeping");

  std::string sweep_pairs;
  CLI::App* sweep = app.add_subcommand("sweep", "evaluate every tabled chain in one run");
  sweep->fallthrough();
  sweep->add_option("--pairs", sweep_pairs, "comma-separated condition pairs")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      spec.seed = common.seed;
      return cmd_synth(common, spec);
    }
    if (*extract) {
      return cmd_extract(common);
    }
    if (*train) {
      return cmd_train(common, train_conditions);
    }
    if (*thresholds) {
      return cmd_thresholds(common, thresholds_pair, thresholds_chain);
    }
    if (*evaluate) {
      return run_evaluation(common, eval_pairs, split_list(common.chains), models_dir,
                            fixed_thresholds_path, "evaluate");
    }
    if (*sweep) {
      return run_evaluation(common, sweep_pairs, kSweepChains, "", "", "sweep");
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
