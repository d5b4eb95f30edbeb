// Copyright (c) 2026, the gazete authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gazete/corpus.hpp"
#include "gazete/dataset.hpp"

namespace gazete::training {
struct Checkpoint;
}

namespace gazete::evaluation {

struct ConfusionMatrix {
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;
  long long tn = 0;
  corpus::OriginLabel positive_class = corpus::OriginLabel::AiRewritten;

  long long total() const { return tp + fp + fn + tn; }
};

// (predicted, true) pairs tallied against the stated positive class.
// Throws on an empty list.
ConfusionMatrix confusion(
    const std::vector<std::pair<corpus::OriginLabel, corpus::OriginLabel>>& predicted_true,
    corpus::OriginLabel positive_class);

// Same counts viewed with the other class as positive.
ConfusionMatrix flipped(const ConfusionMatrix& cm);

struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long long support_positive = 0;
  long long support_negative = 0;
};

// Standard formulas with fixed zero-denominator conventions: precision = 0
// when tp+fp = 0 and recall = 0 when tp+fn = 0. Throws when total = 0.
Metrics compute_metrics(const ConfusionMatrix& cm);

// Per-class view plus macro averages; the headline metrics treat AiRewritten
// as positive (detection framing), but both readings are always emitted.
struct MetricsReport {
  Metrics ai_positive;
  Metrics human_positive;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
};

MetricsReport full_report(const ConfusionMatrix& cm);

std::string metrics_to_json(const MetricsReport& report, const ConfusionMatrix& cm);

// Plain-text grid, one header and one value row:
// Accuracy | Precision | Recall | F1 (four decimals).
std::string metrics_table(const Metrics& metrics);

struct ExamplePrediction {
  std::string id;
  corpus::OriginLabel predicted = corpus::OriginLabel::HumanWritten;
  corpus::OriginLabel truth = corpus::OriginLabel::HumanWritten;
  std::array<double, 2> probabilities{0.0, 0.0};
  double confidence = 0.0;
};

struct EvalOutcome {
  MetricsReport report;
  ConfusionMatrix cm;
  std::vector<ExamplePrediction> predictions;
};

// Runs the checkpoint over labeled examples in inference mode (dropout off)
// and tallies the result. Order of the input does not affect the metrics.
EvalOutcome evaluate_split(const training::Checkpoint& checkpoint,
                           const std::vector<dataset::LabeledExample>& examples);

}  // namespace gazete::evaluation
