// Copyright (c) 2026, the gazete authors
// SPDX-License-Identifier: Apache-2.0

#include "gazete/evaluation.hpp"

#include <cstdio>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "gazete/training.hpp"

namespace gazete::evaluation {

using json = nlohmann::json;

ConfusionMatrix confusion(
    const std::vector<std::pair<corpus::OriginLabel, corpus::OriginLabel>>& predicted_true,
    corpus::OriginLabel positive_class) {
  if (predicted_true.empty()) {
    throw std::invalid_argument("confusion matrix needs at least one prediction");
  }
  ConfusionMatrix cm;
  cm.positive_class = positive_class;
  for (const auto& [predicted, truth] : predicted_true) {
    const bool pred_pos = predicted == positive_class;
    const bool true_pos = truth == positive_class;
    if (pred_pos && true_pos) ++cm.tp;
    else if (pred_pos && !true_pos) ++cm.fp;
    else if (!pred_pos && true_pos) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

ConfusionMatrix flipped(const ConfusionMatrix& cm) {
  ConfusionMatrix out;
  out.tp = cm.tn;
  out.tn = cm.tp;
  out.fp = cm.fn;
  out.fn = cm.fp;
  out.positive_class = cm.positive_class == corpus::OriginLabel::AiRewritten
                           ? corpus::OriginLabel::HumanWritten
                           : corpus::OriginLabel::AiRewritten;
  return out;
}

Metrics compute_metrics(const ConfusionMatrix& cm) {
  const long long total = cm.total();
  if (total <= 0) throw std::invalid_argument("confusion matrix is empty");
  Metrics m;
  m.support_positive = cm.tp + cm.fn;
  m.support_negative = cm.fp + cm.tn;
  m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(total);
  m.precision =
      cm.tp + cm.fp > 0 ? static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp) : 0.0;
  m.recall =
      cm.tp + cm.fn > 0 ? static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn) : 0.0;
  m.f1 = m.precision + m.recall > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

MetricsReport full_report(const ConfusionMatrix& cm) {
  const ConfusionMatrix ai_view =
      cm.positive_class == corpus::OriginLabel::AiRewritten ? cm : flipped(cm);
  MetricsReport report;
  report.ai_positive = compute_metrics(ai_view);
  report.human_positive = compute_metrics(flipped(ai_view));
  report.macro_precision = 0.5 * (report.ai_positive.precision + report.human_positive.precision);
  report.macro_recall = 0.5 * (report.ai_positive.recall + report.human_positive.recall);
  report.macro_f1 = 0.5 * (report.ai_positive.f1 + report.human_positive.f1);
  return report;
}

std::string metrics_to_json(const MetricsReport& report, const ConfusionMatrix& cm) {
  const auto metrics_obj = [](const Metrics& m) {
    return json{{"accuracy", m.accuracy},   {"precision", m.precision},
                {"recall", m.recall},       {"f1", m.f1},
                {"support_positive", m.support_positive},
                {"support_negative", m.support_negative}};
  };
  const ConfusionMatrix ai_view =
      cm.positive_class == corpus::OriginLabel::AiRewritten ? cm : flipped(cm);
  json out;
  out["positive_class"] = corpus::to_string(corpus::OriginLabel::AiRewritten);
  out["confusion"] = {{"tp", ai_view.tp}, {"fp", ai_view.fp}, {"fn", ai_view.fn},
                      {"tn", ai_view.tn}};
  out["ai_positive"] = metrics_obj(report.ai_positive);
  out["human_positive"] = metrics_obj(report.human_positive);
  out["macro"] = {{"precision", report.macro_precision},
                  {"recall", report.macro_recall},
                  {"f1", report.macro_f1}};
  return out.dump(2) + "\n";
}

std::string metrics_table(const Metrics& metrics) {
  char row[128];
  std::snprintf(row, sizeof(row), "| %8.4f | %9.4f | %6.4f | %6.4f |", metrics.accuracy,
                metrics.precision, metrics.recall, metrics.f1);
  std::string out;
  out += "| Accuracy | Precision | Recall | F1     |\n";
  out += "|----------|-----------|--------|--------|\n";
  out += row;
  out += "\n";
  return out;
}

EvalOutcome evaluate_split(const training::Checkpoint& checkpoint,
                           const std::vector<dataset::LabeledExample>& examples) {
  if (!checkpoint.model) throw std::invalid_argument("checkpoint has no model");
  const auto tokenizer = model::make_tokenizer(checkpoint.model->spec());
  dataset::TokenizationSpec tok_spec;
  tok_spec.encoder_id = checkpoint.model->spec().id;
  tok_spec.max_length = checkpoint.config.max_length;

  EvalOutcome outcome;
  outcome.predictions.reserve(examples.size());
  std::vector<std::pair<corpus::OriginLabel, corpus::OriginLabel>> pairs;
  pairs.reserve(examples.size());
  for (const auto& example : examples) {
    const auto encoded = dataset::encode(example, tok_spec, *tokenizer);
    const auto ids = model::trim_to_mask(encoded);
    const auto probs = checkpoint.model->predict(ids);

    ExamplePrediction p;
    p.id = example.id;
    p.truth = example.label;
    p.probabilities = probs;
    // Argmax with the tie at 0.5 resolved toward HumanWritten.
    p.predicted = probs[dataset::kAiIndex] > probs[dataset::kHumanIndex]
                      ? corpus::OriginLabel::AiRewritten
                      : corpus::OriginLabel::HumanWritten;
    p.confidence = std::max(probs[0], probs[1]);
    pairs.emplace_back(p.predicted, p.truth);
    outcome.predictions.push_back(std::move(p));
  }

  outcome.cm = confusion(pairs, corpus::OriginLabel::AiRewritten);
  outcome.report = full_report(outcome.cm);
  return outcome;
}

}  // namespace gazete::evaluation
