// Copyright (c) 2026, the gazete authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gazete/dataset.hpp"
#include "gazete/encoder.hpp"

namespace gazete::training {

struct TrainConfig {
  std::string pretrained_id = "dbmdz/bert-base-turkish-cased";
  std::string encoder_dir;  // local encoder bundle for non-builtin ids
  int max_length = 512;
  double learning_rate = 2e-5;
  double weight_decay = 0.01;
  std::string scheduler = "linear-with-warmup";
  double warmup_ratio = 0.1;
  double max_grad_norm = 1.0;
  int max_epochs = 6;
  int per_device_batch = 8;
  int grad_accum_steps = 2;
  double hidden_dropout = 0.2;
  double attention_dropout = 0.2;
  double label_smoothing = 0.1;
  int early_stop_patience = 2;
  std::string early_stop_metric = "val_f1";
  bool mixed_precision = false;  // accepted for config parity; all math is f64
  std::uint64_t seed = 42;

  int effective_batch() const { return per_device_batch * grad_accum_steps; }
};

// Throws std::invalid_argument naming the offending field.
void validate(const TrainConfig& config);

// Canonical JSON snapshot (keys sorted), used for fingerprints and the
// checkpoint config file.
std::string to_canonical_json(const TrainConfig& config);

struct ClassifierHead {
  Eigen::MatrixXd w;  // 2 x hidden
  Eigen::Vector2d b;
};

// softmax(W·h + b). Throws on a dimension mismatch.
std::array<double, 2> head_forward(const Eigen::VectorXd& pooled, const ClassifierHead& head);

// (1-alpha)·one_hot(label) + alpha/2. Throws for alpha outside [0,1) or a
// label outside {0,1}.
std::array<double, 2> smooth_targets(int label_index, double alpha);

// -sum target_k·log(max(probs_k, 1e-12)). Both arguments must sum to 1
// within 1e-6 (throws otherwise).
double smoothed_cross_entropy(const std::array<double, 2>& probs,
                              const std::array<double, 2>& target);

// Linear warmup to base_lr at warmup_steps = round(warmup_ratio·total_steps),
// then linear decay to zero at total_steps.
double lr_at(long long step, long long total_steps, double warmup_ratio, double base_lr);

// True when the trailing non-improvement streak has reached `patience`
// (strict improvement resets the streak).
bool early_stop_decision(const std::vector<double>& history, int patience);

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  double val_precision = 0.0;
  double val_recall = 0.0;
  double val_f1 = 0.0;
  bool is_best = false;
};

std::string epoch_record_to_json(const EpochRecord& record);
EpochRecord epoch_record_from_json(const std::string& line);

// One epoch of work as seen by the stopping logic.
struct EpochOutcome {
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  double val_precision = 0.0;
  double val_recall = 0.0;
  double val_f1 = 0.0;
};

struct LoopResult {
  std::vector<EpochRecord> records;
  int best_epoch = 0;  // 1-based index into records
};

// Drives the epoch/early-stop/best-checkpoint protocol. run_epoch is called
// with 1-based epoch numbers; on_new_best fires on every strict val-F1
// improvement (the caller snapshots weights there). Exactly one record comes
// back with is_best set; ties keep the earlier epoch.
LoopResult run_epoch_loop(int max_epochs, int patience,
                          const std::function<EpochOutcome(int)>& run_epoch,
                          const std::function<void(int)>& on_new_best = {});

// Maps config.pretrained_id to an encoder description: bundled presets by
// id, otherwise encoder_dir/encoder.json. Unknown ids without a directory
// produce an actionable error.
model::EncoderSpec resolve_encoder(const TrainConfig& config);

struct Checkpoint {
  std::shared_ptr<model::TransformerClassifier> model;
  TrainConfig config;
  double best_metric = 0.0;
  int best_epoch = 0;
  std::string cleaning_fingerprint;  // preprocessing provenance, may be empty
  std::string fingerprint;           // digest of the serialized weights
};

// Directory layout: weights.bin, config.json, label_map.json,
// metrics.jsonl. Every file is written to a temp name and renamed.
void save_checkpoint(const Checkpoint& checkpoint, const std::string& dir,
                     const std::vector<EpochRecord>& records);
Checkpoint load_checkpoint(const std::string& dir);

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochRecord> records;
};

// Full fine-tuning run: AdamW with decoupled decay, gradient accumulation
// with global-norm clipping, linear warmup/decay schedule, early stopping on
// validation F1 (AiRewritten positive). All randomness derives from
// config.seed. Throws on NaN loss and on empty train/validation splits.
TrainResult train(const TrainConfig& config, const dataset::SplitBundle& splits,
                  const std::string& cleaning_fingerprint = "");

}  // namespace gazete::training
