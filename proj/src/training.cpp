// Copyright (c) 2026, the gazete authors
// SPDX-License-Identifier: Apache-2.0

#include "gazete/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "gazete/evaluation.hpp"
#include "gazete/fsutil.hpp"
#include "gazete/hash.hpp"

namespace gazete::training {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
constexpr double kProbFloor = 1e-12;

json train_config_to_json(const TrainConfig& c) {
  return json{{"pretrained_id", c.pretrained_id},
              {"encoder_dir", c.encoder_dir},
              {"max_length", c.max_length},
              {"learning_rate", c.learning_rate},
              {"weight_decay", c.weight_decay},
              {"scheduler", c.scheduler},
              {"warmup_ratio", c.warmup_ratio},
              {"max_grad_norm", c.max_grad_norm},
              {"max_epochs", c.max_epochs},
              {"per_device_batch", c.per_device_batch},
              {"grad_accum_steps", c.grad_accum_steps},
              {"hidden_dropout", c.hidden_dropout},
              {"attention_dropout", c.attention_dropout},
              {"label_smoothing", c.label_smoothing},
              {"early_stop_patience", c.early_stop_patience},
              {"early_stop_metric", c.early_stop_metric},
              {"mixed_precision", c.mixed_precision},
              {"seed", c.seed}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  c.pretrained_id = j.at("pretrained_id").get<std::string>();
  c.encoder_dir = j.value("encoder_dir", std::string());
  c.max_length = j.at("max_length").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.weight_decay = j.at("weight_decay").get<double>();
  c.scheduler = j.at("scheduler").get<std::string>();
  c.warmup_ratio = j.at("warmup_ratio").get<double>();
  c.max_grad_norm = j.at("max_grad_norm").get<double>();
  c.max_epochs = j.at("max_epochs").get<int>();
  c.per_device_batch = j.at("per_device_batch").get<int>();
  c.grad_accum_steps = j.at("grad_accum_steps").get<int>();
  c.hidden_dropout = j.at("hidden_dropout").get<double>();
  c.attention_dropout = j.at("attention_dropout").get<double>();
  c.label_smoothing = j.at("label_smoothing").get<double>();
  c.early_stop_patience = j.at("early_stop_patience").get<int>();
  c.early_stop_metric = j.at("early_stop_metric").get<std::string>();
  c.mixed_precision = j.at("mixed_precision").get<bool>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

// Stable digest over tensor bytes in registration order; identical for a
// saved-then-reloaded model.
std::string weights_fingerprint(const model::TransformerClassifier& net) {
  std::uint64_t h = kFnvOffset;
  h = fnv1a64(net.spec().id, h);
  for (const auto& t : net.tensors()) {
    h = fnv1a64(t.name, h);
    for (Eigen::Index i = 0; i < t.value.rows(); ++i) {
      for (Eigen::Index j = 0; j < t.value.cols(); ++j) {
        const double v = t.value(i, j);
        char bytes[sizeof(double)];
        std::memcpy(bytes, &v, sizeof(double));
        h = fnv1a64(std::string_view(bytes, sizeof(double)), h);
      }
    }
  }
  return hex64(h);
}

struct AdamState {
  std::vector<model::Matrix> m;
  std::vector<model::Matrix> v;
  long long t = 0;
};

// One decoupled-weight-decay Adam step over grads averaged across
// `examples` and clipped to max_grad_norm by global norm.
void adamw_step(std::vector<model::Tensor>& tensors, AdamState& state, double lr,
                const TrainConfig& config, int examples) {
  const double inv_examples = 1.0 / static_cast<double>(examples);
  double sq_norm = 0.0;
  for (const auto& t : tensors) sq_norm += (t.grad * inv_examples).squaredNorm();
  const double norm = std::sqrt(sq_norm);
  double clip_scale = inv_examples;
  if (norm > config.max_grad_norm) clip_scale *= config.max_grad_norm / norm;

  ++state.t;
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    auto& t = tensors[i];
    const model::Matrix g = t.grad * clip_scale;
    state.m[i] = kBeta1 * state.m[i] + (1.0 - kBeta1) * g;
    state.v[i] = kBeta2 * state.v[i] + (1.0 - kBeta2) * g.cwiseProduct(g);
    const model::Matrix mhat = state.m[i] / bc1;
    const model::Matrix denom = (state.v[i].array() / bc2).sqrt() + kAdamEps;
    t.value -= lr * mhat.cwiseQuotient(denom);
    if (!t.no_decay && config.weight_decay > 0.0) {
      t.value -= lr * config.weight_decay * t.value;
    }
  }
}

struct EncodedSplit {
  std::vector<std::vector<std::int32_t>> ids;
  std::vector<int> labels;
};

EncodedSplit encode_split(const std::vector<dataset::LabeledExample>& examples,
                          const dataset::TokenizationSpec& spec,
                          const dataset::Tokenizer& tokenizer) {
  EncodedSplit out;
  out.ids.reserve(examples.size());
  out.labels.reserve(examples.size());
  for (const auto& example : examples) {
    const auto encoded = dataset::encode(example, spec, tokenizer);
    out.ids.push_back(model::trim_to_mask(encoded));
    out.labels.push_back(encoded.label);
  }
  return out;
}

}  // namespace

std::string to_canonical_json(const TrainConfig& config) {
  return train_config_to_json(config).dump();
}

void validate(const TrainConfig& config) {
  const auto fail = [](const std::string& field, const std::string& why) {
    throw std::invalid_argument("training." + field + ": " + why);
  };
  if (!(config.warmup_ratio > 0.0 && config.warmup_ratio < 1.0)) {
    fail("warmup_ratio", "must be in (0, 1)");
  }
  if (!(config.label_smoothing >= 0.0 && config.label_smoothing < 1.0)) {
    fail("label_smoothing", "must be in [0, 1)");
  }
  if (config.learning_rate <= 0.0) fail("learning_rate", "must be positive");
  if (config.weight_decay < 0.0) fail("weight_decay", "must be nonnegative");
  if (config.max_grad_norm <= 0.0) fail("max_grad_norm", "must be positive");
  if (config.max_epochs < 1) fail("max_epochs", "must be at least 1");
  if (config.per_device_batch < 1) fail("per_device_batch", "must be at least 1");
  if (config.grad_accum_steps < 1) fail("grad_accum_steps", "must be at least 1");
  if (config.early_stop_patience < 1) fail("early_stop_patience", "must be at least 1");
  if (config.max_length < 8) fail("max_length", "must be at least 8");
  if (!(config.hidden_dropout >= 0.0 && config.hidden_dropout < 1.0)) {
    fail("hidden_dropout", "must be in [0, 1)");
  }
  if (!(config.attention_dropout >= 0.0 && config.attention_dropout < 1.0)) {
    fail("attention_dropout", "must be in [0, 1)");
  }
  if (config.scheduler != "linear-with-warmup") {
    fail("scheduler", "only 'linear-with-warmup' is supported");
  }
  if (config.early_stop_metric != "val_f1") {
    fail("early_stop_metric", "only 'val_f1' is supported");
  }
}

std::array<double, 2> head_forward(const Eigen::VectorXd& pooled, const ClassifierHead& head) {
  if (head.w.rows() != 2 || head.w.cols() != pooled.size()) {
    throw std::invalid_argument("classifier head does not match the pooled vector dimension");
  }
  const Eigen::Vector2d z = head.w * pooled + head.b;
  const double mx = z.maxCoeff();
  const double e0 = std::exp(z(0) - mx);
  const double e1 = std::exp(z(1) - mx);
  return {e0 / (e0 + e1), e1 / (e0 + e1)};
}

std::array<double, 2> smooth_targets(int label_index, double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("label smoothing alpha must be in [0, 1)");
  }
  if (label_index != 0 && label_index != 1) {
    throw std::invalid_argument("label index must be 0 or 1");
  }
  std::array<double, 2> target{alpha / 2.0, alpha / 2.0};
  target[static_cast<std::size_t>(label_index)] += 1.0 - alpha;
  return target;
}

double smoothed_cross_entropy(const std::array<double, 2>& probs,
                              const std::array<double, 2>& target) {
  if (std::abs(probs[0] + probs[1] - 1.0) > 1e-6) {
    throw std::invalid_argument("probabilities are not normalized");
  }
  if (std::abs(target[0] + target[1] - 1.0) > 1e-6) {
    throw std::invalid_argument("target distribution is not normalized");
  }
  const double p0 = std::max(probs[0], kProbFloor);
  const double p1 = std::max(probs[1], kProbFloor);
  return -(target[0] * std::log(p0) + target[1] * std::log(p1));
}

double lr_at(long long step, long long total_steps, double warmup_ratio, double base_lr) {
  if (total_steps <= 0) throw std::invalid_argument("total_steps must be positive");
  if (step < 0 || step > total_steps) {
    throw std::invalid_argument("step must lie in [0, total_steps]");
  }
  const long long warmup = std::llround(warmup_ratio * static_cast<double>(total_steps));
  if (step <= warmup) {
    if (warmup == 0) return base_lr;
    return base_lr * static_cast<double>(step) / static_cast<double>(warmup);
  }
  return base_lr * static_cast<double>(total_steps - step) /
         static_cast<double>(total_steps - warmup);
}

bool early_stop_decision(const std::vector<double>& history, int patience) {
  if (history.empty()) throw std::invalid_argument("metric history is empty");
  if (patience < 1) throw std::invalid_argument("patience must be at least 1");
  double best = -std::numeric_limits<double>::infinity();
  int streak = 0;
  for (const double value : history) {
    if (value > best) {
      best = value;
      streak = 0;
    } else {
      ++streak;
    }
  }
  return streak >= patience;
}

std::string epoch_record_to_json(const EpochRecord& r) {
  return json{{"epoch", r.epoch},
              {"train_loss", r.train_loss},
              {"val_loss", r.val_loss},
              {"val_accuracy", r.val_accuracy},
              {"val_precision", r.val_precision},
              {"val_recall", r.val_recall},
              {"val_f1", r.val_f1},
              {"is_best", r.is_best}}
      .dump();
}

EpochRecord epoch_record_from_json(const std::string& line) {
  const json j = json::parse(line);
  EpochRecord r;
  r.epoch = j.at("epoch").get<int>();
  r.train_loss = j.at("train_loss").get<double>();
  r.val_loss = j.at("val_loss").get<double>();
  r.val_accuracy = j.at("val_accuracy").get<double>();
  r.val_precision = j.at("val_precision").get<double>();
  r.val_recall = j.at("val_recall").get<double>();
  r.val_f1 = j.at("val_f1").get<double>();
  r.is_best = j.at("is_best").get<bool>();
  return r;
}

LoopResult run_epoch_loop(int max_epochs, int patience,
                          const std::function<EpochOutcome(int)>& run_epoch,
                          const std::function<void(int)>& on_new_best) {
  if (max_epochs < 1) throw std::invalid_argument("max_epochs must be at least 1");
  if (patience < 1) throw std::invalid_argument("patience must be at least 1");

  LoopResult result;
  std::vector<double> history;
  double best = -std::numeric_limits<double>::infinity();
  for (int epoch = 1; epoch <= max_epochs; ++epoch) {
    const EpochOutcome out = run_epoch(epoch);
    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = out.train_loss;
    record.val_loss = out.val_loss;
    record.val_accuracy = out.val_accuracy;
    record.val_precision = out.val_precision;
    record.val_recall = out.val_recall;
    record.val_f1 = out.val_f1;
    result.records.push_back(record);

    history.push_back(out.val_f1);
    if (out.val_f1 > best) {  // ties keep the earlier epoch
      best = out.val_f1;
      result.best_epoch = epoch;
      if (on_new_best) on_new_best(epoch);
    }
    if (early_stop_decision(history, patience)) break;
  }
  result.records[static_cast<std::size_t>(result.best_epoch - 1)].is_best = true;
  return result;
}

model::EncoderSpec resolve_encoder(const TrainConfig& config) {
  if (model::is_builtin_encoder(config.pretrained_id)) {
    return model::builtin_encoder_spec(config.pretrained_id);
  }
  if (!config.encoder_dir.empty()) {
    const std::string meta_path = config.encoder_dir + "/encoder.json";
    json meta;
    try {
      meta = json::parse(read_file(meta_path), nullptr, true, /*ignore_comments=*/true);
    } catch (const json::exception& e) {
      throw std::runtime_error("cannot parse " + meta_path + ": " + e.what());
    }
    model::EncoderSpec spec;
    spec.id = meta.value("id", config.pretrained_id);
    spec.vocab_buckets = meta.value("vocab_buckets", 0);
    spec.vocab_file = meta.value("vocab_file", std::string());
    if (!spec.vocab_file.empty() && fs::path(spec.vocab_file).is_relative()) {
      spec.vocab_file = (fs::path(config.encoder_dir) / spec.vocab_file).string();
    }
    spec.dim = meta.value("dim", 64);
    spec.layers = meta.value("layers", 1);
    spec.heads = meta.value("heads", 2);
    spec.ffn_dim = meta.value("ffn_dim", 128);
    spec.max_positions = meta.value("max_positions", 512);
    spec.pooling = meta.value("pooling", std::string("mean"));
    spec.init_seed = meta.value("init_seed", fnv1a64(spec.id));
    return spec;
  }
  throw std::runtime_error(
      "encoder '" + config.pretrained_id +
      "' is not bundled; set training.encoder_dir to a local bundle directory "
      "(encoder.json plus optional vocab.txt/weights.bin), or pick a builtin "
      "preset such as 'tiny:v1'");
}

void save_checkpoint(const Checkpoint& checkpoint, const std::string& dir,
                     const std::vector<EpochRecord>& records) {
  if (!checkpoint.model) throw std::invalid_argument("checkpoint has no model");
  fs::create_directories(dir);

  const std::string weights_path = (fs::path(dir) / "weights.bin").string();
  const std::string weights_tmp = weights_path + ".tmp";
  checkpoint.model->save(weights_tmp);
  fs::rename(weights_tmp, weights_path);

  const auto& spec = checkpoint.model->spec();
  json config_json;
  config_json["train_config"] = train_config_to_json(checkpoint.config);
  config_json["encoder"] = {{"id", spec.id},
                            {"vocab_buckets", spec.vocab_buckets},
                            {"vocab_file", spec.vocab_file},
                            {"dim", spec.dim},
                            {"layers", spec.layers},
                            {"heads", spec.heads},
                            {"ffn_dim", spec.ffn_dim},
                            {"max_positions", spec.max_positions},
                            {"pooling", spec.pooling},
                            {"init_seed", spec.init_seed}};
  config_json["best_metric"] = checkpoint.best_metric;
  config_json["best_epoch"] = checkpoint.best_epoch;
  config_json["cleaning_fingerprint"] = checkpoint.cleaning_fingerprint;
  config_json["weights_fingerprint"] = weights_fingerprint(*checkpoint.model);
  write_file_atomic((fs::path(dir) / "config.json").string(), config_json.dump(2) + "\n");

  const json label_map = {{"human", dataset::kHumanIndex}, {"ai_rewritten", dataset::kAiIndex}};
  write_file_atomic((fs::path(dir) / "label_map.json").string(), label_map.dump(2) + "\n");

  std::string metrics;
  for (const auto& record : records) metrics += epoch_record_to_json(record) + "\n";
  write_file_atomic((fs::path(dir) / "metrics.jsonl").string(), metrics);
}

Checkpoint load_checkpoint(const std::string& dir) {
  const std::string config_path = (fs::path(dir) / "config.json").string();
  json config_json;
  try {
    config_json = json::parse(read_file(config_path));
  } catch (const json::exception& e) {
    throw std::runtime_error("cannot parse " + config_path + ": " + e.what());
  }

  const json label_map = json::parse(read_file((fs::path(dir) / "label_map.json").string()));
  if (label_map.value("human", -1) != dataset::kHumanIndex ||
      label_map.value("ai_rewritten", -1) != dataset::kAiIndex) {
    throw std::runtime_error("checkpoint label map does not match the fixed human=0/ai=1 mapping");
  }

  Checkpoint checkpoint;
  checkpoint.config = train_config_from_json(config_json.at("train_config"));
  checkpoint.best_metric = config_json.at("best_metric").get<double>();
  checkpoint.best_epoch = config_json.at("best_epoch").get<int>();
  checkpoint.cleaning_fingerprint = config_json.value("cleaning_fingerprint", std::string());
  checkpoint.model = std::make_shared<model::TransformerClassifier>(
      model::TransformerClassifier::load((fs::path(dir) / "weights.bin").string()));
  checkpoint.fingerprint = weights_fingerprint(*checkpoint.model);
  const std::string recorded = config_json.value("weights_fingerprint", std::string());
  if (!recorded.empty() && recorded != checkpoint.fingerprint) {
    throw std::runtime_error("checkpoint weights do not match the recorded fingerprint");
  }
  return checkpoint;
}

TrainResult train(const TrainConfig& config, const dataset::SplitBundle& splits,
                  const std::string& cleaning_fingerprint) {
  validate(config);
  if (splits.train.empty()) throw std::invalid_argument("training split is empty");
  if (splits.validation.empty()) throw std::invalid_argument("validation split is empty");

  const model::EncoderSpec spec = resolve_encoder(config);

  std::shared_ptr<model::TransformerClassifier> net;
  const std::string pretrained_weights =
      config.encoder_dir.empty() ? std::string()
                                 : (fs::path(config.encoder_dir) / "weights.bin").string();
  if (!pretrained_weights.empty() && fs::exists(pretrained_weights)) {
    net = std::make_shared<model::TransformerClassifier>(model::TransformerClassifier::load(
        pretrained_weights, config.hidden_dropout, config.attention_dropout));
  } else {
    net = std::make_shared<model::TransformerClassifier>(spec, config.hidden_dropout,
                                                         config.attention_dropout);
    net->init_weights();
  }

  const auto tokenizer = model::make_tokenizer(net->spec());
  dataset::TokenizationSpec tok_spec;
  tok_spec.encoder_id = net->spec().id;
  tok_spec.max_length = config.max_length;
  const EncodedSplit train_enc = encode_split(splits.train, tok_spec, *tokenizer);
  const EncodedSplit val_enc = encode_split(splits.validation, tok_spec, *tokenizer);

  const long long n_train = static_cast<long long>(train_enc.ids.size());
  const long long micro_per_epoch =
      (n_train + config.per_device_batch - 1) / config.per_device_batch;
  const long long steps_per_epoch =
      (micro_per_epoch + config.grad_accum_steps - 1) / config.grad_accum_steps;
  const long long total_steps = steps_per_epoch * config.max_epochs;

  AdamState opt;
  opt.m.reserve(net->tensors().size());
  opt.v.reserve(net->tensors().size());
  for (const auto& t : net->tensors()) {
    opt.m.push_back(model::Matrix::Zero(t.value.rows(), t.value.cols()));
    opt.v.push_back(model::Matrix::Zero(t.value.rows(), t.value.cols()));
  }

  long long global_step = 0;
  std::vector<model::Matrix> best_weights;

  const auto run_one = [&](int epoch) -> EpochOutcome {
    auto order_rng =
        DeterministicRng::for_stream(config.seed, "train/order/epoch/" + std::to_string(epoch));
    auto dropout_rng =
        DeterministicRng::for_stream(config.seed, "train/dropout/epoch/" + std::to_string(epoch));
    std::vector<std::size_t> order(static_cast<std::size_t>(n_train));
    std::iota(order.begin(), order.end(), std::size_t{0});
    order_rng.shuffle(order);

    net->zero_grad();
    double loss_sum = 0.0;
    int in_micro = 0;
    int micro_done = 0;
    int examples_pending = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
      const std::size_t idx = order[i];
      const auto target = smooth_targets(train_enc.labels[idx], config.label_smoothing);
      loss_sum += net->train_step_example(train_enc.ids[idx], target, dropout_rng);
      ++in_micro;
      ++examples_pending;
      const bool last = i + 1 == order.size();
      if (in_micro == config.per_device_batch || last) {
        in_micro = 0;
        ++micro_done;
      }
      if (micro_done == config.grad_accum_steps || (last && examples_pending > 0)) {
        ++global_step;
        // The schedule is evaluated after the step counter advances, so the
        // first update already has a nonzero rate and the last lands on zero.
        const double lr =
            lr_at(std::min(global_step, total_steps), total_steps, config.warmup_ratio,
                  config.learning_rate);
        adamw_step(net->tensors(), opt, lr, config, examples_pending);
        net->zero_grad();
        micro_done = 0;
        examples_pending = 0;
      }
    }
    const double train_loss = loss_sum / static_cast<double>(n_train);
    if (!std::isfinite(train_loss)) {
      throw std::runtime_error("training diverged: non-finite loss at epoch " +
                               std::to_string(epoch) + "; lower the learning rate");
    }

    double val_loss_sum = 0.0;
    std::vector<std::pair<corpus::OriginLabel, corpus::OriginLabel>> pairs;
    pairs.reserve(val_enc.ids.size());
    for (std::size_t i = 0; i < val_enc.ids.size(); ++i) {
      const auto probs = net->predict(val_enc.ids[i]);
      val_loss_sum += smoothed_cross_entropy(
          probs, smooth_targets(val_enc.labels[i], config.label_smoothing));
      const auto predicted = probs[dataset::kAiIndex] > probs[dataset::kHumanIndex]
                                 ? corpus::OriginLabel::AiRewritten
                                 : corpus::OriginLabel::HumanWritten;
      pairs.emplace_back(predicted, dataset::label_from_index(val_enc.labels[i]));
    }

    EpochOutcome out;
    out.train_loss = train_loss;
    out.val_loss = val_loss_sum / static_cast<double>(val_enc.ids.size());
    if (!std::isfinite(out.val_loss)) {
      throw std::runtime_error("training diverged: non-finite validation loss at epoch " +
                               std::to_string(epoch));
    }
    const auto cm = evaluation::confusion(pairs, corpus::OriginLabel::AiRewritten);
    const auto metrics = evaluation::compute_metrics(cm);
    out.val_accuracy = metrics.accuracy;
    out.val_precision = metrics.precision;
    out.val_recall = metrics.recall;
    out.val_f1 = metrics.f1;
    return out;
  };

  LoopResult loop;
  try {
    loop = run_epoch_loop(config.max_epochs, config.early_stop_patience, run_one,
                          [&](int) { best_weights = net->snapshot_values(); });
  } catch (const std::bad_alloc&) {
    throw std::runtime_error(
        "out of memory during training; reduce per_device_batch or max_length");
  }
  net->restore_values(best_weights);

  TrainResult result;
  result.records = loop.records;
  result.checkpoint.model = net;
  result.checkpoint.config = config;
  result.checkpoint.best_epoch = loop.best_epoch;
  result.checkpoint.best_metric =
      loop.records[static_cast<std::size_t>(loop.best_epoch - 1)].val_f1;
  result.checkpoint.cleaning_fingerprint = cleaning_fingerprint;
  result.checkpoint.fingerprint = weights_fingerprint(*net);
  return result;
}

}  // namespace gazete::training
