// Copyright (c) 2026, the gazete authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "gazete/corpus.hpp"

namespace gazete::dataset {

// Fixed label mapping, recorded in every checkpoint's label map file.
inline constexpr int kHumanIndex = 0;
inline constexpr int kAiIndex = 1;

int label_index(corpus::OriginLabel label);
corpus::OriginLabel label_from_index(int index);

struct LabeledExample {
  std::string id;
  std::string text;
  corpus::OriginLabel label = corpus::OriginLabel::HumanWritten;
  std::string source;
  int year = 0;
};

// Joins the human corpus with its rewritten counterparts into one labeled
// example list, ordered by id. Throws on an unlabeled or mislabeled article
// and on an id shared between the two inputs.
std::vector<LabeledExample> make_examples(const std::vector<corpus::Article>& human,
                                          const std::vector<corpus::Article>& rewritten);

struct SplitBundle {
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> validation;
  std::vector<LabeledExample> test;
  std::array<double, 3> ratios{0.8, 0.1, 0.1};
  std::uint64_t seed = 42;
};

// Stratified partition. Split sizes follow largest-remainder rounding of
// N * ratio; within each split every class count stays within one example of
// exact proportionality. Membership depends only on (examples, ratios, seed).
SplitBundle stratified_split(const std::vector<LabeledExample>& examples,
                             const std::array<double, 3>& ratios, std::uint64_t seed);

// Split manifests are the authority for reruns: {id, label, source, year}
// JSON-lines, one file per split, rows ordered by id.
void write_manifest(const std::string& path, const std::vector<LabeledExample>& split);

struct ManifestRow {
  std::string id;
  corpus::OriginLabel label;
  std::string source;
  int year = 0;
};

std::vector<ManifestRow> read_manifest(const std::string& path);

// Full example rows {id, text, label, source, year}, used to hand a split to
// the training stage without re-joining the corpora.
void write_examples_jsonl(const std::string& path, const std::vector<LabeledExample>& examples);
std::vector<LabeledExample> read_examples_jsonl(const std::string& path);

// -------------------------------------------------------------------------
// Tokenization
// -------------------------------------------------------------------------

inline constexpr std::int32_t kPadId = 0;
inline constexpr std::int32_t kUnkId = 1;
inline constexpr std::int32_t kClsId = 2;
inline constexpr std::int32_t kSepId = 3;
inline constexpr std::int32_t kSpecialTokens = 4;

class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::vector<std::int32_t> tokenize(const std::string& text) const = 0;
  virtual std::int32_t vocab_size() const = 0;
  virtual std::int32_t pad_id() const { return kPadId; }
  virtual std::int32_t cls_id() const { return kClsId; }
  virtual std::int32_t sep_id() const { return kSepId; }
};

// Word-level tokenizer over a fixed hash-bucket vocabulary; the bundled
// compact encoders use this.
class HashedWordTokenizer : public Tokenizer {
 public:
  explicit HashedWordTokenizer(std::int32_t buckets);
  std::vector<std::int32_t> tokenize(const std::string& text) const override;
  std::int32_t vocab_size() const override { return buckets_ + kSpecialTokens; }

 private:
  std::int32_t buckets_;
};

// Greedy longest-match subword tokenizer with "##" continuations, for
// encoders that ship a vocabulary file ([PAD]/[UNK]/[CLS]/[SEP] must be
// present).
class WordPieceTokenizer : public Tokenizer {
 public:
  explicit WordPieceTokenizer(const std::string& vocab_path);
  std::vector<std::int32_t> tokenize(const std::string& text) const override;
  std::int32_t vocab_size() const override;
  std::int32_t pad_id() const override;
  std::int32_t cls_id() const override;
  std::int32_t sep_id() const override;

  std::int32_t id_of(const std::string& token) const;  // -1 when absent

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

struct TokenizationSpec {
  std::string encoder_id;
  int max_length = 512;
};

struct EncodedExample {
  std::vector<std::int32_t> ids;    // length exactly max_length
  std::vector<std::int32_t> mask;   // 1 for CLS/content/SEP, 0 for padding
  int label = 0;
};

// [CLS] content... [SEP] padded to max_length; content beyond the window is
// tail-truncated.
EncodedExample encode(const LabeledExample& example, const TokenizationSpec& spec,
                      const Tokenizer& tokenizer);

}  // namespace gazete::dataset
