// Copyright (c) 2026, the gazete authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "gazete/dataset.hpp"
#include "gazete/rng.hpp"

namespace gazete::model {

using Matrix = Eigen::MatrixXd;

struct EncoderSpec {
  std::string id;
  std::int32_t vocab_buckets = 0;  // hashed-word tokenizer; 0 means vocab_file
  std::string vocab_file;          // WordPiece vocabulary, when provided
  int dim = 64;
  int layers = 1;
  int heads = 2;
  int ffn_dim = 128;
  int max_positions = 512;
  std::string pooling = "mean";  // "mean" | "cls"
  std::uint64_t init_seed = 0;

  std::int32_t vocab_size() const;
};

// Registry of bundled encoder presets ("tiny:v1", "mini:v1"). Other ids must
// come with an encoder directory; see training::resolve_encoder.
bool is_builtin_encoder(const std::string& id);
EncoderSpec builtin_encoder_spec(const std::string& id);

std::unique_ptr<dataset::Tokenizer> make_tokenizer(const EncoderSpec& spec);

struct Tensor {
  std::string name;
  Matrix value;
  Matrix grad;
  bool no_decay = false;  // biases and layer-norm parameters skip weight decay
};

// Bidirectional transformer encoder with a two-way linear classification
// head. All math is double precision; gradients are exact and are verified
// against finite differences in the test suite.
class TransformerClassifier {
 public:
  TransformerClassifier(EncoderSpec spec, double hidden_dropout, double attention_dropout);

  // Deterministic "factory" initialization derived from spec.init_seed.
  void init_weights();

  // Accumulates gradients for one (trimmed) sequence and returns its loss
  // against the smoothed target distribution.
  double train_step_example(const std::vector<std::int32_t>& ids,
                            const std::array<double, 2>& target, DeterministicRng& dropout_rng);

  // Inference mode: dropout off, no gradient bookkeeping.
  std::array<double, 2> predict(const std::vector<std::int32_t>& ids) const;

  void zero_grad();

  std::vector<Tensor>& tensors() { return tensors_; }
  const std::vector<Tensor>& tensors() const { return tensors_; }
  Tensor& tensor(const std::string& name);

  const EncoderSpec& spec() const { return spec_; }
  void set_dropout(double hidden, double attention);

  std::vector<Matrix> snapshot_values() const;
  void restore_values(const std::vector<Matrix>& values);

  void save(const std::string& path) const;
  static TransformerClassifier load(const std::string& path, double hidden_dropout = 0.0,
                                    double attention_dropout = 0.0);

 private:
  TransformerClassifier() = default;  // used by load()

  // vocab_override sizes the word embedding when the vocabulary file is not
  // available (restoring a checkpoint relies on the recorded tensor shapes).
  void build_tensors(std::int32_t vocab_override = 0);

  Matrix embed(const std::vector<std::int32_t>& ids) const;

  // Shared forward pass; with training=true it also accumulates gradients
  // and samples dropout from dropout_rng, otherwise it touches no state.
  std::array<double, 2> forward_backward(const std::vector<std::int32_t>& ids,
                                         const std::array<double, 2>& target,
                                         DeterministicRng& dropout_rng, bool training);

  EncoderSpec spec_;
  double hidden_dropout_ = 0.0;
  double attention_dropout_ = 0.0;
  std::vector<Tensor> tensors_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Trims an encoded example to its real length using the attention mask
// (padding is strictly trailing).
std::vector<std::int32_t> trim_to_mask(const dataset::EncodedExample& encoded);

}  // namespace gazete::model
