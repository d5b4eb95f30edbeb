// Copyright (c) 2026, the gazete authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "gazete/corpus.hpp"

namespace gazete::synthesis {

struct RewritePrompt {
  std::string newspaper_name;
  std::string template_text;
  std::string rendered;
};

// Placeholder token replaced by the newspaper name when rendering.
inline constexpr const char* kNamePlaceholder = "{newspaper_name}";

std::string load_prompt_template(const std::string& path);

// Renders the stored editorial-rewrite template with every placeholder
// substituted literally (no pattern expansion). Throws on an empty name.
RewritePrompt build_prompt(const std::string& newspaper_name, const std::string& template_text);

struct RewriteResult {
  std::string original_id;
  std::string rewritten_text;
  double length_ratio = 0.0;
  double cosine_similarity = 0.0;
  bool accepted = false;
  std::vector<std::string> rejection_reasons;
  std::map<std::string, std::string> provider_metadata;
};

// Transient provider failure; rewrite_article retries these.
class ProviderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RewriteClient {
 public:
  virtual ~RewriteClient() = default;
  virtual std::string rewrite(const std::string& prompt, const std::string& article_body) = 0;
  virtual std::map<std::string, std::string> metadata() const { return {}; }
};

// Offline deterministic rewriter: substitutes a seeded fraction of
// synonym-table hits and normalizes punctuation, so the synthesis stage is
// reproducible byte-for-byte without a provider.
class MockRewriteClient : public RewriteClient {
 public:
  struct Options {
    std::uint64_t seed = 42;
    double replace_probability = 0.5;
    // pairs of (original token, replacement token); empty -> built-in table
    std::vector<std::pair<std::string, std::string>> synonyms;
  };

  explicit MockRewriteClient(Options options);
  std::string rewrite(const std::string& prompt, const std::string& article_body) override;
  std::map<std::string, std::string> metadata() const override;

  static const std::vector<std::pair<std::string, std::string>>& builtin_synonyms();

 private:
  Options options_;
};

// Term-frequency cosine over the union vocabulary of the pair. Whitespace
// tokens, no weighting. Result is in [0, 1]; throws if either text has no
// tokens.
double cosine_similarity(const std::string& a, const std::string& b);

struct GateConfig {
  double min_length_ratio = 0.80;
  double max_length_ratio = 1.25;
  double min_cosine = 0.75;
};

struct RetryPolicy {
  int max_attempts = 3;
  int base_delay_ms = 250;
  double backoff_multiplier = 2.0;
};

// Calls the client with bounded retries, computes length ratio and cosine
// against the original body, and applies the verification gates.
RewriteResult rewrite_article(const corpus::Article& original, RewriteClient& client,
                              const RewritePrompt& prompt, const GateConfig& gates = {},
                              const RetryPolicy& retry = {});

// Re-applies the gate predicates to an already-measured result and recomputes
// the accepted flag. Deterministic and monotone under gate tightening.
RewriteResult verify_pair(const corpus::Article& original, RewriteResult result,
                          const GateConfig& gates);

// Materializes the accepted counterpart article: same source and date, id
// derived from the original, origin AiRewritten.
corpus::Article materialize_rewritten(const corpus::Article& original,
                                      const RewriteResult& result);

struct SynthesisSummary {
  std::size_t total = 0;
  std::size_t accepted = 0;
  double acceptance_rate = 0.0;
  double mean_cosine = 0.0;
  double min_cosine = 0.0;
  double mean_length_ratio = 0.0;
  std::map<std::string, std::size_t> rejection_counts;
  std::map<std::string, std::size_t> length_ratio_histogram;  // "0.95" -> count, 0.05 buckets
  bool no_data = false;
};

SynthesisSummary synthesis_report(const std::vector<RewriteResult>& results);

std::string summary_to_json(const SynthesisSummary& summary);

void write_results_jsonl(const std::string& path, const std::vector<RewriteResult>& results);
std::vector<RewriteResult> read_results_jsonl(const std::string& path);

}  // namespace gazete::synthesis
