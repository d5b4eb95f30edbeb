// Copyright (c) 2026, the gazete authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <string>
#include <vector>

#include "gazete/corpus.hpp"
#include "gazete/training.hpp"

namespace gazete::inference {

struct Prediction {
  std::string article_id;
  corpus::OriginLabel predicted = corpus::OriginLabel::HumanWritten;
  std::array<double, 2> probabilities{0.0, 0.0};  // [human, ai]
  double confidence = 0.0;                        // max probability
  std::string source;
  int year = 0;
};

struct PredictOptions {
  int batch_size = 32;
  // Articles must have been cleaned with the checkpoint's CleaningConfig;
  // a fingerprint mismatch warns by default and throws in strict mode.
  bool strict_cleaning_check = false;
  std::string cleaning_fingerprint;
};

std::vector<Prediction> predict_batch(const std::vector<corpus::Article>& articles,
                                      const training::Checkpoint& checkpoint,
                                      const PredictOptions& options = {},
                                      std::string* warning = nullptr);

void write_predictions_jsonl(const std::string& path, const std::vector<Prediction>& predictions);
std::vector<Prediction> read_predictions_jsonl(const std::string& path);

struct PrevalenceRow {
  std::string source;
  int year = 0;
  long long n = 0;
  double pct_human = 0.0;
  double pct_ai = 0.0;
  double mean_confidence = 0.0;  // percent
};

// Groups by (source, year), sorted ascending. Percentages are stored at
// full precision; rendering rounds to one decimal.
std::vector<PrevalenceRow> aggregate_prevalence(const std::vector<Prediction>& predictions);

// Example-weighted mean AI percentage. Throws on an empty row list.
double overall_rate(const std::vector<PrevalenceRow>& rows);

struct PrevalenceReport {
  std::vector<PrevalenceRow> rows;
  double overall_ai_rate = 0.0;
  std::string generated_at;  // ISO-8601 UTC
  std::string checkpoint_fingerprint;
  std::string cleaning_fingerprint;
  // Recorded definition of the confidence column: mean of per-article max
  // softmax probabilities, times 100.
  std::string confidence_definition = "mean of per-article max softmax probability x 100";
};

PrevalenceReport make_report(const std::vector<PrevalenceRow>& rows,
                             const std::string& checkpoint_fingerprint,
                             const std::string& cleaning_fingerprint);

enum class ReportFormat { Csv, Markdown, Json };

ReportFormat report_format_from_string(const std::string& name);
std::string report_extension(ReportFormat format);

std::string render_report(const PrevalenceReport& report, ReportFormat format);
PrevalenceReport report_from_json(const std::string& text);

}  // namespace gazete::inference
