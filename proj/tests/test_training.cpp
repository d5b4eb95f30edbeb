// Copyright (c) 2026, the gazete authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "gazete/rng.hpp"
#include "gazete/training.hpp"
#include "test_util.hpp"

using namespace gazete;
using namespace gazete::training;
using corpus::OriginLabel;
using testutil::TempDir;

TEST_CASE("train config defaults and validation") {
  TrainConfig config;
  CHECK(config.effective_batch() == 16);
  CHECK_NOTHROW(validate(config));

  auto bad = config;
  bad.learning_rate = 0.0;
  CHECK_THROWS_WITH_AS(validate(bad), doctest::Contains("learning_rate"),
                       std::invalid_argument);
  bad = config;
  bad.warmup_ratio = 1.5;
  CHECK_THROWS_WITH_AS(validate(bad), doctest::Contains("warmup_ratio"), std::invalid_argument);
  bad = config;
  bad.label_smoothing = 1.0;
  CHECK_THROWS_WITH_AS(validate(bad), doctest::Contains("label_smoothing"),
                       std::invalid_argument);
  bad = config;
  bad.scheduler = "cosine";
  CHECK_THROWS_WITH_AS(validate(bad), doctest::Contains("scheduler"), std::invalid_argument);
  bad = config;
  bad.max_epochs = 0;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = config;
  bad.per_device_batch = 0;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = config;
  bad.early_stop_patience = -1;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = config;
  bad.hidden_dropout = 1.0;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
}

TEST_CASE("canonical config json is stable and complete") {
  TrainConfig config;
  const std::string a = to_canonical_json(config);
  const std::string b = to_canonical_json(config);
  CHECK(a == b);
  CHECK(a.find("\"learning_rate\"") != std::string::npos);
  CHECK(a.find("\"seed\"") != std::string::npos);

  auto other = config;
  other.max_epochs = 7;
  CHECK(a != to_canonical_json(other));
}

TEST_CASE("smooth_targets mixes one-hot with uniform mass") {
  const auto t0 = smooth_targets(0, 0.1);
  CHECK(t0[0] == doctest::Approx(0.95).epsilon(1e-15));
  CHECK(t0[1] == doctest::Approx(0.05).epsilon(1e-15));
  const auto t1 = smooth_targets(1, 0.1);
  CHECK(t1[0] == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(t1[1] == doctest::Approx(0.95).epsilon(1e-15));

  const auto hard = smooth_targets(1, 0.0);
  CHECK(hard[0] == 0.0);
  CHECK(hard[1] == 1.0);

  CHECK_THROWS_AS(smooth_targets(2, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(smooth_targets(0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(smooth_targets(0, -0.1), std::invalid_argument);
}

TEST_CASE("smoothed cross entropy floor and hand values") {
  // The loss cannot drop below the entropy of the smoothed target itself.
  const std::array<double, 2> target{0.05, 0.95};
  const double floor = smoothed_cross_entropy(target, target);
  CHECK(floor == doctest::Approx(-(0.05 * std::log(0.05) + 0.95 * std::log(0.95)))
                     .epsilon(1e-12));
  CHECK(floor == doctest::Approx(0.1985152433458726).epsilon(1e-12));

  const std::array<double, 2> probs{0.2, 0.8};
  const double loss = smoothed_cross_entropy(probs, target);
  CHECK(loss ==
        doctest::Approx(-(0.05 * std::log(0.2) + 0.95 * std::log(0.8))).epsilon(1e-12));
  CHECK(loss > floor);

  CHECK_THROWS_AS(smoothed_cross_entropy({0.5, 0.4}, target), std::invalid_argument);
  CHECK_THROWS_AS(smoothed_cross_entropy(probs, {0.4, 0.5}), std::invalid_argument);
}

TEST_CASE("head_forward is a softmax over the affine map") {
  ClassifierHead head;
  head.w = Eigen::MatrixXd::Zero(2, 3);
  head.w << 1.0, 0.0, -1.0, 0.5, 0.5, 0.5;
  head.b = Eigen::Vector2d(0.1, -0.1);
  Eigen::VectorXd h(3);
  h << 0.2, -0.4, 0.6;

  const double z0 = 1.0 * 0.2 + 0.0 * -0.4 + -1.0 * 0.6 + 0.1;
  const double z1 = 0.5 * 0.2 + 0.5 * -0.4 + 0.5 * 0.6 - 0.1;
  const double m = std::max(z0, z1);
  const double e0 = std::exp(z0 - m), e1 = std::exp(z1 - m);
  const auto probs = head_forward(h, head);
  CHECK(probs[0] == doctest::Approx(e0 / (e0 + e1)).epsilon(1e-12));
  CHECK(probs[1] == doctest::Approx(e1 / (e0 + e1)).epsilon(1e-12));

  Eigen::VectorXd wrong(2);
  wrong << 1.0, 2.0;
  CHECK_THROWS_AS(head_forward(wrong, head), std::invalid_argument);
}

TEST_CASE("lr schedule endpoints and the reference configuration") {
  const double base = 2e-5;

  // 2,880 examples, batch 8, accumulation 2, 6 epochs: 1,080 optimizer steps.
  const long long total = 1080;
  CHECK(lr_at(0, total, 0.1, base) == 0.0);
  CHECK(lr_at(108, total, 0.1, base) == doctest::Approx(base).epsilon(1e-15));
  CHECK(lr_at(total, total, 0.1, base) == 0.0);
  CHECK(lr_at(54, total, 0.1, base) == doctest::Approx(base * 0.5).epsilon(1e-12));
  // Midpoint of the decay segment: (1080 - 594) / (1080 - 108) = 0.5.
  CHECK(lr_at(594, total, 0.1, base) == doctest::Approx(base * 0.5).epsilon(1e-12));

  // Zero warmup starts at full rate and decays linearly.
  CHECK(lr_at(0, 100, 0.0, base) == doctest::Approx(base));
  CHECK(lr_at(50, 100, 0.0, base) == doctest::Approx(base * 0.5));

  CHECK_THROWS_AS(lr_at(0, 0, 0.1, base), std::invalid_argument);
  CHECK_THROWS_AS(lr_at(-1, 10, 0.1, base), std::invalid_argument);
  CHECK_THROWS_AS(lr_at(11, 10, 0.1, base), std::invalid_argument);
}

namespace {

// Straight-line reimplementation of the patience rule: track the best value
// and a streak of non-improving epochs; stop once the streak hits patience.
bool brute_force_stop(const std::vector<double>& history, int patience) {
  double best = history[0];
  int streak = 0;
  for (std::size_t i = 1; i < history.size(); ++i) {
    if (history[i] > best) {
      best = history[i];
      streak = 0;
    } else {
      ++streak;
    }
  }
  return streak >= patience;
}

}  // namespace

TEST_CASE("early stop decision agrees with a brute-force simulation") {
  DeterministicRng rng(555);
  const std::vector<double> levels = {0.1, 0.2, 0.2, 0.3, 0.5, 0.5, 0.9};
  for (int iter = 0; iter < 5000; ++iter) {
    std::vector<double> history(1 + rng.below(10));
    for (auto& v : history) v = levels[static_cast<std::size_t>(rng.below(levels.size()))];
    const int patience = 1 + static_cast<int>(rng.below(4));
    CHECK(early_stop_decision(history, patience) == brute_force_stop(history, patience));
  }

  // Hand cases: ties do not count as improvement.
  CHECK(early_stop_decision({0.9, 0.9, 0.9}, 2));
  CHECK_FALSE(early_stop_decision({0.9, 0.9, 0.95}, 2));
  CHECK_FALSE(early_stop_decision({0.9, 0.8}, 2));
  CHECK(early_stop_decision({0.9, 0.8, 0.85}, 2));
  CHECK_THROWS_AS(early_stop_decision({}, 2), std::invalid_argument);
  CHECK_THROWS_AS(early_stop_decision({0.5}, 0), std::invalid_argument);
}

TEST_CASE("epoch records round trip through json lines") {
  EpochRecord record;
  record.epoch = 3;
  record.train_loss = 0.41;
  record.val_loss = 0.39;
  record.val_accuracy = 0.9;
  record.val_precision = 0.91;
  record.val_recall = 0.89;
  record.val_f1 = 0.90;
  record.is_best = true;

  const auto back = epoch_record_from_json(epoch_record_to_json(record));
  CHECK(back.epoch == 3);
  CHECK(back.train_loss == doctest::Approx(0.41));
  CHECK(back.val_f1 == doctest::Approx(0.90));
  CHECK(back.is_best);
}

TEST_CASE("epoch loop records, selects the best epoch, and stops on patience") {
  // Validation F1 by epoch: improvement, improvement, then two flat epochs.
  const std::vector<double> f1 = {0.90, 0.95, 0.95, 0.95, 0.99};
  std::vector<int> best_calls;
  const auto result = run_epoch_loop(
      /*max_epochs=*/5, /*patience=*/2,
      [&](int epoch) {
        EpochOutcome out;
        out.val_f1 = f1[static_cast<std::size_t>(epoch - 1)];
        return out;
      },
      [&](int epoch) { best_calls.push_back(epoch); });

  // Patience 2 exhausts after the two non-improving epochs 3 and 4; epoch 5
  // never runs even though it would have improved.
  REQUIRE(result.records.size() == 4);
  CHECK(result.best_epoch == 2);
  CHECK(best_calls == std::vector<int>{1, 2});
  int best_count = 0;
  for (const auto& r : result.records) best_count += r.is_best ? 1 : 0;
  CHECK(best_count == 1);
  CHECK(result.records[1].is_best);
  CHECK(result.records[0].epoch == 1);
  CHECK(result.records[3].epoch == 4);
}

TEST_CASE("epoch loop keeps the earlier epoch on ties and can run out the clock") {
  const auto flat = run_epoch_loop(3, 10, [](int) {
    EpochOutcome out;
    out.val_f1 = 0.5;
    return out;
  });
  CHECK(flat.records.size() == 3);
  CHECK(flat.best_epoch == 1);

  const auto rising = run_epoch_loop(3, 2, [](int epoch) {
    EpochOutcome out;
    out.val_f1 = 0.1 * epoch;
    return out;
  });
  CHECK(rising.records.size() == 3);
  CHECK(rising.best_epoch == 3);
}

TEST_CASE("resolve_encoder maps ids to specs") {
  TrainConfig config;
  config.pretrained_id = "tiny:v1";
  CHECK(resolve_encoder(config).dim == 64);

  config.pretrained_id = "dbmdz/bert-base-turkish-cased";
  config.encoder_dir.clear();
  CHECK_THROWS_WITH_AS(resolve_encoder(config), doctest::Contains("tiny:v1"),
                       std::runtime_error);

  TempDir tmp("encoder");
  testutil::write_text(tmp.file("encoder.json"),
                       R"({"id":"local-test","vocab_buckets":128,"dim":16,"layers":1,)"
                       R"("heads":2,"ffn_dim":32,"max_positions":64})");
  config.encoder_dir = tmp.path().string();
  const auto spec = resolve_encoder(config);
  CHECK(spec.id == "local-test");
  CHECK(spec.vocab_buckets == 128);
  CHECK(spec.dim == 16);
  CHECK(spec.init_seed == fnv1a64("local-test"));

  // Relative vocabulary files resolve against the bundle directory.
  testutil::write_text(tmp.file("vocab.txt"), "[PAD]\n[UNK]\n[CLS]\n[SEP]\nkelime\n");
  testutil::write_text(tmp.file("encoder.json"),
                       R"({"id":"wp-test","vocab_file":"vocab.txt","dim":16})");
  const auto wp = resolve_encoder(config);
  CHECK(wp.vocab_file == (tmp.path() / "vocab.txt").string());
}

namespace {

dataset::SplitBundle micro_bundle() {
  dataset::SplitBundle bundle;
  // Linearly separable toy task: "insan" marks human text, "makine" the
  // rewritten counterpart, with shared filler words.
  const std::vector<std::string> filler = {"haber", "bugün", "açıklama", "yetkili"};
  char id[32];
  for (int i = 0; i < 24; ++i) {
    dataset::LabeledExample e;
    std::snprintf(id, sizeof(id), "e-%03d", i);
    e.id = id;
    const bool ai = i % 2 == 1;
    e.label = ai ? OriginLabel::AiRewritten : OriginLabel::HumanWritten;
    e.source = "central";
    e.year = 2021;
    e.text = filler[static_cast<std::size_t>(i) % filler.size()] + " " +
             (ai ? "makine metni uydurma" : "insan yazısı gerçek") + " " +
             filler[static_cast<std::size_t>(i + 1) % filler.size()];
    auto& out = i < 16 ? bundle.train : (i < 20 ? bundle.validation : bundle.test);
    out.push_back(e);
  }
  return bundle;
}

TrainConfig micro_config(const std::string& encoder_dir) {
  TrainConfig config;
  config.pretrained_id = "micro-train";
  config.encoder_dir = encoder_dir;
  config.max_length = 12;
  config.learning_rate = 5e-3;
  config.max_epochs = 2;
  config.per_device_batch = 4;
  config.grad_accum_steps = 2;
  config.hidden_dropout = 0.1;
  config.attention_dropout = 0.1;
  config.early_stop_patience = 2;
  config.seed = 42;
  return config;
}

void write_micro_encoder(const TempDir& tmp) {
  testutil::write_text(tmp.file("encoder.json"),
                       R"({"id":"micro-train","vocab_buckets":64,"dim":8,"layers":1,)"
                       R"("heads":2,"ffn_dim":16,"max_positions":16})");
}

}  // namespace

TEST_CASE("train runs, records epochs, and round trips its checkpoint") {
  TempDir tmp("train");
  write_micro_encoder(tmp);
  const auto config = micro_config(tmp.path().string());
  const auto bundle = micro_bundle();

  const auto result = train(config, bundle, "clean-fp");
  CHECK(result.records.size() >= 1);
  CHECK(result.records.size() <= 2);
  int best_count = 0;
  for (const auto& r : result.records) {
    CHECK(std::isfinite(r.train_loss));
    CHECK(std::isfinite(r.val_loss));
    CHECK(r.val_f1 >= 0.0);
    CHECK(r.val_f1 <= 1.0);
    best_count += r.is_best ? 1 : 0;
  }
  CHECK(best_count == 1);
  CHECK(result.checkpoint.best_epoch >= 1);
  CHECK(result.checkpoint.cleaning_fingerprint == "clean-fp");
  CHECK_FALSE(result.checkpoint.fingerprint.empty());

  // Determinism: the same config and data give the same weights digest.
  const auto again = train(config, bundle, "clean-fp");
  CHECK(again.checkpoint.fingerprint == result.checkpoint.fingerprint);

  const std::string dir = tmp.file("checkpoint");
  save_checkpoint(result.checkpoint, dir, result.records);
  const auto loaded = load_checkpoint(dir);
  CHECK(loaded.fingerprint == result.checkpoint.fingerprint);
  CHECK(loaded.best_epoch == result.checkpoint.best_epoch);
  CHECK(loaded.cleaning_fingerprint == "clean-fp");
  CHECK(loaded.config.max_length == 12);

  const std::vector<std::int32_t> probe = {2, 10, 20, 3};
  const auto p_orig = result.checkpoint.model->predict(probe);
  const auto p_load = loaded.model->predict(probe);
  CHECK(p_orig[0] == p_load[0]);
  CHECK(p_orig[1] == p_load[1]);
}

TEST_CASE("load_checkpoint rejects a foreign label map") {
  TempDir tmp("labelmap");
  write_micro_encoder(tmp);
  const auto result = train(micro_config(tmp.path().string()), micro_bundle());
  const std::string dir = tmp.file("checkpoint");
  save_checkpoint(result.checkpoint, dir, result.records);

  testutil::write_text(dir + "/label_map.json", R"({"human":1,"ai_rewritten":0})");
  CHECK_THROWS_WITH_AS(load_checkpoint(dir), doctest::Contains("label map"),
                       std::runtime_error);
}

TEST_CASE("train rejects empty splits") {
  TempDir tmp("empty");
  write_micro_encoder(tmp);
  auto bundle = micro_bundle();
  bundle.train.clear();
  CHECK_THROWS(train(micro_config(tmp.path().string()), bundle));

  auto bundle2 = micro_bundle();
  bundle2.validation.clear();
  CHECK_THROWS(train(micro_config(tmp.path().string()), bundle2));
}
