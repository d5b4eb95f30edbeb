// Copyright (c) 2026, the gazete authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gazete/corpus.hpp"
#include "gazete/synthesis.hpp"
#include "gazete/training.hpp"

namespace gazete::pipeline {

struct CorpusSection {
  std::vector<std::string> inputs;
  corpus::CleaningConfig cleaning;
  std::string stopword_file;
  corpus::DedupConfig dedupe;
};

struct SynthesisSection {
  bool mock = true;
  std::uint64_t seed = 42;
  bool seed_set = false;
  std::string endpoint;
  std::string model = "gpt-4o-mini";
  int timeout_seconds = 60;
  std::string prompt_file;
  std::map<std::string, std::string> source_names;  // source key -> display name
  synthesis::GateConfig gates;
  synthesis::RetryPolicy retry;
};

struct DatasetSection {
  std::array<double, 3> ratios{0.8, 0.1, 0.1};
  std::uint64_t seed = 42;
  bool seed_set = false;
};

struct InferenceSection {
  std::vector<std::string> external_inputs;
  std::vector<std::string> report_formats{"csv", "markdown", "json"};
  int batch_size = 32;
  bool strict_cleaning_check = false;
};

struct PipelineConfig {
  std::uint64_t seed = 42;
  std::string out_dir = "out";
  CorpusSection corpus;
  SynthesisSection synthesis;
  DatasetSection dataset;
  training::TrainConfig training;
  bool training_seed_set = false;
  InferenceSection inference;

  // Per-stage seeds fall back to the top-level seed unless set explicitly.
  std::uint64_t synthesis_seed() const { return synthesis.seed_set ? synthesis.seed : seed; }
  std::uint64_t dataset_seed() const { return dataset.seed_set ? dataset.seed : seed; }
  std::uint64_t training_seed() const { return training_seed_set ? training.seed : seed; }
};

// JSON with // comments. Unknown keys are rejected with their full path.
// Relative input paths resolve against the config file's directory; out_dir
// resolves against the working directory.
PipelineConfig load_config(const std::string& path);
PipelineConfig parse_config(const std::string& text, const std::string& config_dir);

struct StageOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  bool force_mock = false;
};

inline constexpr std::array<const char*, 8> kStageOrder = {
    "ingest", "clean", "synthesize", "split", "train", "evaluate", "predict", "report"};

// Runs one stage (or "pipeline" for all, in order). Throws on failure with a
// message naming the problem; missing upstream artifacts name the stage to
// run first.
void run_stage(const std::string& stage, PipelineConfig config,
               const StageOverrides& overrides = {});

}  // namespace gazete::pipeline
