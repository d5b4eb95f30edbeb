// Copyright (c) 2026, the gazete authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gazete/evaluation.hpp"
#include "gazete/rng.hpp"
#include "gazete/training.hpp"
#include "test_util.hpp"

using namespace gazete;
using namespace gazete::evaluation;
using corpus::OriginLabel;
using testutil::TempDir;

namespace {

constexpr OriginLabel kHuman = OriginLabel::HumanWritten;
constexpr OriginLabel kAi = OriginLabel::AiRewritten;

}  // namespace

TEST_CASE("confusion tallies against the stated positive class") {
  const std::vector<std::pair<OriginLabel, OriginLabel>> pairs = {
      {kAi, kAi}, {kAi, kAi},       // tp tp
      {kAi, kHuman},                // fp
      {kHuman, kAi}, {kHuman, kAi}, // fn fn
      {kHuman, kHuman},             // tn
  };
  const auto cm = confusion(pairs, kAi);
  CHECK(cm.tp == 2);
  CHECK(cm.fp == 1);
  CHECK(cm.fn == 2);
  CHECK(cm.tn == 1);
  CHECK(cm.total() == 6);
  CHECK(cm.positive_class == kAi);

  const auto flip = flipped(cm);
  CHECK(flip.tp == 1);
  CHECK(flip.fp == 2);
  CHECK(flip.fn == 1);
  CHECK(flip.tn == 2);
  CHECK(flip.positive_class == kHuman);

  CHECK_THROWS(confusion({}, kAi));
}

TEST_CASE("metric formulas and zero-denominator conventions") {
  ConfusionMatrix cm;
  cm.tp = 40;
  cm.fp = 10;
  cm.fn = 20;
  cm.tn = 30;
  const auto m = compute_metrics(cm);
  CHECK(m.accuracy == doctest::Approx(70.0 / 100.0).epsilon(1e-15));
  CHECK(m.precision == doctest::Approx(40.0 / 50.0).epsilon(1e-15));
  CHECK(m.recall == doctest::Approx(40.0 / 60.0).epsilon(1e-15));
  const double p = 0.8, r = 40.0 / 60.0;
  CHECK(m.f1 == doctest::Approx(2 * p * r / (p + r)).epsilon(1e-12));
  CHECK(m.support_positive == 60);
  CHECK(m.support_negative == 40);

  // Degenerate denominators collapse to zero instead of NaN.
  ConfusionMatrix none;
  none.tn = 5;
  const auto z = compute_metrics(none);
  CHECK(z.precision == 0.0);
  CHECK(z.recall == 0.0);
  CHECK(z.f1 == 0.0);
  CHECK(z.accuracy == 1.0);

  ConfusionMatrix empty;
  CHECK_THROWS(compute_metrics(empty));
}

TEST_CASE("metrics match per-sample brute force on random matrices") {
  DeterministicRng rng(31337);
  for (int iter = 0; iter < 300; ++iter) {
    std::vector<std::pair<OriginLabel, OriginLabel>> pairs;
    const int n = 1 + static_cast<int>(rng.below(200));
    for (int i = 0; i < n; ++i) {
      const auto pred = rng.next_double() < 0.5 ? kAi : kHuman;
      const auto truth = rng.next_double() < 0.5 ? kAi : kHuman;
      pairs.emplace_back(pred, truth);
    }
    const auto cm = confusion(pairs, kAi);
    const auto m = compute_metrics(cm);

    long long correct = 0, pred_pos = 0, true_pos = 0, both = 0;
    for (const auto& [pred, truth] : pairs) {
      correct += pred == truth ? 1 : 0;
      pred_pos += pred == kAi ? 1 : 0;
      true_pos += truth == kAi ? 1 : 0;
      both += (pred == kAi && truth == kAi) ? 1 : 0;
    }
    const double acc = static_cast<double>(correct) / n;
    const double prec = pred_pos ? static_cast<double>(both) / pred_pos : 0.0;
    const double rec = true_pos ? static_cast<double>(both) / true_pos : 0.0;
    const double f1 = (prec + rec) > 0.0 ? 2 * prec * rec / (prec + rec) : 0.0;

    CHECK(m.accuracy == doctest::Approx(acc).epsilon(1e-12));
    CHECK(m.precision == doctest::Approx(prec).epsilon(1e-12));
    CHECK(m.recall == doctest::Approx(rec).epsilon(1e-12));
    CHECK(m.f1 == doctest::Approx(f1).epsilon(1e-12));
  }
}

TEST_CASE("full report emits both views plus macro averages") {
  ConfusionMatrix cm;
  cm.tp = 170;
  cm.fp = 7;
  cm.fn = 12;
  cm.tn = 171;
  const auto report = full_report(cm);

  const auto ai = compute_metrics(cm);
  const auto human = compute_metrics(flipped(cm));
  CHECK(report.ai_positive.f1 == doctest::Approx(ai.f1));
  CHECK(report.human_positive.f1 == doctest::Approx(human.f1));
  CHECK(report.macro_precision ==
        doctest::Approx((ai.precision + human.precision) / 2.0).epsilon(1e-12));
  CHECK(report.macro_recall == doctest::Approx((ai.recall + human.recall) / 2.0).epsilon(1e-12));
  CHECK(report.macro_f1 == doctest::Approx((ai.f1 + human.f1) / 2.0).epsilon(1e-12));

  // Accuracy is view independent.
  CHECK(report.ai_positive.accuracy == doctest::Approx(report.human_positive.accuracy));

  // A human-positive input matrix is normalized to the same report.
  const auto report2 = full_report(flipped(cm));
  CHECK(report2.ai_positive.f1 == doctest::Approx(report.ai_positive.f1));
  CHECK(report2.human_positive.precision == doctest::Approx(report.human_positive.precision));
}

TEST_CASE("metrics render to json and a fixed-width table") {
  ConfusionMatrix cm;
  cm.tp = 9;
  cm.fp = 1;
  cm.fn = 2;
  cm.tn = 8;
  const auto report = full_report(cm);

  const auto text = metrics_to_json(report, cm);
  CHECK(text.find("\"positive_class\": \"ai_rewritten\"") != std::string::npos);
  CHECK(text.find("\"tp\": 9") != std::string::npos);
  CHECK(text.find("\"macro\"") != std::string::npos);

  const auto table = metrics_table(report.ai_positive);
  CHECK(table.find("| Accuracy | Precision | Recall | F1     |") != std::string::npos);
  CHECK(table.find("0.8500") != std::string::npos);  // accuracy 17/20
  CHECK(table.find("0.9000") != std::string::npos);  // precision 9/10
}

namespace {

training::TrainResult train_micro(const TempDir& tmp) {
  testutil::write_text(tmp.file("encoder.json"),
                       R"({"id":"micro-eval","vocab_buckets":64,"dim":8,"layers":1,)"
                       R"("heads":2,"ffn_dim":16,"max_positions":16})");
  training::TrainConfig config;
  config.pretrained_id = "micro-eval";
  config.encoder_dir = tmp.path().string();
  config.max_length = 12;
  config.learning_rate = 2e-2;
  config.max_epochs = 3;
  config.per_device_batch = 4;
  config.hidden_dropout = 0.0;
  config.attention_dropout = 0.0;

  dataset::SplitBundle bundle;
  char id[32];
  for (int i = 0; i < 32; ++i) {
    dataset::LabeledExample e;
    std::snprintf(id, sizeof(id), "e-%03d", i);
    e.id = id;
    const bool ai = i % 2 == 1;
    e.label = ai ? OriginLabel::AiRewritten : OriginLabel::HumanWritten;
    e.source = "central";
    e.year = 2021;
    e.text = ai ? "makine metni uydurma haber" : "insan yazısı gerçek haber";
    (i < 24 ? bundle.train : bundle.validation).push_back(e);
  }
  return training::train(config, bundle);
}

}  // namespace

TEST_CASE("evaluate_split scores a checkpoint and ignores input order") {
  TempDir tmp("eval");
  const auto result = train_micro(tmp);

  std::vector<dataset::LabeledExample> test;
  char id[32];
  for (int i = 0; i < 10; ++i) {
    dataset::LabeledExample e;
    std::snprintf(id, sizeof(id), "t-%03d", i);
    e.id = id;
    const bool ai = i % 2 == 1;
    e.label = ai ? OriginLabel::AiRewritten : OriginLabel::HumanWritten;
    e.source = "central";
    e.year = 2022;
    e.text = ai ? "makine metni uydurma haber" : "insan yazısı gerçek haber";
    test.push_back(e);
  }

  const auto outcome = evaluate_split(result.checkpoint, test);
  CHECK(outcome.cm.total() == 10);
  CHECK(outcome.predictions.size() == 10);
  CHECK(outcome.predictions[0].id == "t-000");
  for (const auto& p : outcome.predictions) {
    CHECK(p.probabilities[0] + p.probabilities[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(p.confidence == doctest::Approx(std::max(p.probabilities[0], p.probabilities[1])));
    // Tie-break favors the human class; AI requires a strict majority.
    const bool ai_pred = p.probabilities[1] > p.probabilities[0];
    CHECK((p.predicted == OriginLabel::AiRewritten) == ai_pred);
  }
  // The toy vocabulary separates the classes perfectly within three epochs.
  CHECK(outcome.report.ai_positive.f1 == doctest::Approx(1.0));

  auto shuffled = test;
  std::reverse(shuffled.begin(), shuffled.end());
  const auto outcome2 = evaluate_split(result.checkpoint, shuffled);
  CHECK(outcome2.report.ai_positive.f1 == doctest::Approx(outcome.report.ai_positive.f1));
  CHECK(outcome2.cm.tp == outcome.cm.tp);

  training::Checkpoint hollow;
  CHECK_THROWS(evaluate_split(hollow, test));
}
