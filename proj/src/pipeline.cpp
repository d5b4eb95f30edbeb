// Copyright (c) 2026, the gazete authors
// SPDX-License-Identifier: Apache-2.0

#include "gazete/pipeline.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <stdexcept>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "gazete/dataset.hpp"
#include "gazete/evaluation.hpp"
#include "gazete/fsutil.hpp"
#include "gazete/hash.hpp"
#include "gazete/http_client.hpp"
#include "gazete/inference.hpp"

namespace gazete::pipeline {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (const char* name : allowed) {
      if (key == name) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw std::invalid_argument("unknown config key: " + (path.empty() ? key : path + "." + key));
    }
  }
}

std::string resolve_path(const std::string& base_dir, const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute() || base_dir.empty()) return path;
  return (fs::path(base_dir) / path).lexically_normal().string();
}

corpus::CleaningConfig parse_cleaning(const json& j, const std::string& config_dir,
                                      std::string& stopword_file) {
  check_keys(j, "corpus.cleaning",
             {"lowercase", "strip_punctuation", "remove_stopwords", "stopword_file",
              "headline_patterns", "agency_suffixes"});
  corpus::CleaningConfig cleaning;
  cleaning.lowercase = j.value("lowercase", true);
  cleaning.strip_punctuation = j.value("strip_punctuation", true);
  cleaning.remove_stopwords = j.value("remove_stopwords", true);
  stopword_file = resolve_path(config_dir, j.value("stopword_file", std::string()));
  cleaning.headline_patterns = j.value("headline_patterns", std::vector<std::string>{});
  cleaning.agency_suffix_patterns = j.value("agency_suffixes", std::vector<std::string>{});
  if (cleaning.remove_stopwords) {
    if (stopword_file.empty()) {
      throw std::invalid_argument(
          "corpus.cleaning.stopword_file is required when remove_stopwords is true");
    }
    cleaning.stopword_list = corpus::load_stopwords(stopword_file);
  }
  return cleaning;
}

}  // namespace

PipelineConfig parse_config(const std::string& text, const std::string& config_dir) {
  json root;
  try {
    root = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }

  check_keys(root, "", {"seed", "out_dir", "corpus", "synthesis", "dataset", "training",
                        "inference"});
  PipelineConfig config;
  config.seed = root.value("seed", std::uint64_t{42});
  config.out_dir = root.value("out_dir", std::string("out"));

  if (root.contains("corpus")) {
    const json& c = root.at("corpus");
    check_keys(c, "corpus", {"inputs", "cleaning", "dedupe"});
    for (const auto& input : c.value("inputs", std::vector<std::string>{})) {
      config.corpus.inputs.push_back(resolve_path(config_dir, input));
    }
    if (c.contains("cleaning")) {
      config.corpus.cleaning =
          parse_cleaning(c.at("cleaning"), config_dir, config.corpus.stopword_file);
    }
    if (c.contains("dedupe")) {
      check_keys(c.at("dedupe"), "corpus.dedupe", {"equalize_sources"});
      config.corpus.dedupe.equalize_sources = c.at("dedupe").value("equalize_sources", true);
    }
  }

  if (root.contains("synthesis")) {
    const json& s = root.at("synthesis");
    check_keys(s, "synthesis",
               {"mock", "seed", "endpoint", "model", "timeout_seconds", "prompt_file",
                "source_names", "gates", "retry"});
    config.synthesis.mock = s.value("mock", true);
    if (s.contains("seed")) {
      config.synthesis.seed = s.at("seed").get<std::uint64_t>();
      config.synthesis.seed_set = true;
    }
    config.synthesis.endpoint = s.value("endpoint", std::string());
    config.synthesis.model = s.value("model", config.synthesis.model);
    config.synthesis.timeout_seconds = s.value("timeout_seconds", 60);
    config.synthesis.prompt_file = resolve_path(config_dir, s.value("prompt_file", std::string()));
    if (s.contains("source_names")) {
      for (const auto& [key, value] : s.at("source_names").items()) {
        config.synthesis.source_names[key] = value.get<std::string>();
      }
    }
    if (s.contains("gates")) {
      const json& g = s.at("gates");
      check_keys(g, "synthesis.gates", {"min_length_ratio", "max_length_ratio", "min_cosine"});
      config.synthesis.gates.min_length_ratio =
          g.value("min_length_ratio", config.synthesis.gates.min_length_ratio);
      config.synthesis.gates.max_length_ratio =
          g.value("max_length_ratio", config.synthesis.gates.max_length_ratio);
      config.synthesis.gates.min_cosine = g.value("min_cosine", config.synthesis.gates.min_cosine);
    }
    if (s.contains("retry")) {
      const json& r = s.at("retry");
      check_keys(r, "synthesis.retry", {"max_attempts", "base_delay_ms", "backoff_multiplier"});
      config.synthesis.retry.max_attempts =
          r.value("max_attempts", config.synthesis.retry.max_attempts);
      config.synthesis.retry.base_delay_ms =
          r.value("base_delay_ms", config.synthesis.retry.base_delay_ms);
      config.synthesis.retry.backoff_multiplier =
          r.value("backoff_multiplier", config.synthesis.retry.backoff_multiplier);
    }
  }

  if (root.contains("dataset")) {
    const json& d = root.at("dataset");
    check_keys(d, "dataset", {"ratios", "seed"});
    if (d.contains("ratios")) {
      const auto ratios = d.at("ratios").get<std::vector<double>>();
      if (ratios.size() != 3) {
        throw std::invalid_argument("dataset.ratios must have exactly three entries");
      }
      config.dataset.ratios = {ratios[0], ratios[1], ratios[2]};
    }
    if (d.contains("seed")) {
      config.dataset.seed = d.at("seed").get<std::uint64_t>();
      config.dataset.seed_set = true;
    }
  }

  if (root.contains("training")) {
    const json& t = root.at("training");
    check_keys(t, "training",
               {"pretrained_id", "encoder_dir", "max_length", "learning_rate", "weight_decay",
                "scheduler", "warmup_ratio", "max_grad_norm", "max_epochs", "per_device_batch",
                "grad_accum_steps", "hidden_dropout", "attention_dropout", "label_smoothing",
                "early_stop_patience", "early_stop_metric", "mixed_precision", "seed"});
    auto& tc = config.training;
    tc.pretrained_id = t.value("pretrained_id", tc.pretrained_id);
    tc.encoder_dir = resolve_path(config_dir, t.value("encoder_dir", std::string()));
    tc.max_length = t.value("max_length", tc.max_length);
    tc.learning_rate = t.value("learning_rate", tc.learning_rate);
    tc.weight_decay = t.value("weight_decay", tc.weight_decay);
    tc.scheduler = t.value("scheduler", tc.scheduler);
    tc.warmup_ratio = t.value("warmup_ratio", tc.warmup_ratio);
    tc.max_grad_norm = t.value("max_grad_norm", tc.max_grad_norm);
    tc.max_epochs = t.value("max_epochs", tc.max_epochs);
    tc.per_device_batch = t.value("per_device_batch", tc.per_device_batch);
    tc.grad_accum_steps = t.value("grad_accum_steps", tc.grad_accum_steps);
    tc.hidden_dropout = t.value("hidden_dropout", tc.hidden_dropout);
    tc.attention_dropout = t.value("attention_dropout", tc.attention_dropout);
    tc.label_smoothing = t.value("label_smoothing", tc.label_smoothing);
    tc.early_stop_patience = t.value("early_stop_patience", tc.early_stop_patience);
    tc.early_stop_metric = t.value("early_stop_metric", tc.early_stop_metric);
    tc.mixed_precision = t.value("mixed_precision", tc.mixed_precision);
    if (t.contains("seed")) {
      tc.seed = t.at("seed").get<std::uint64_t>();
      config.training_seed_set = true;
    }
  }

  if (root.contains("inference")) {
    const json& i = root.at("inference");
    check_keys(i, "inference",
               {"external_inputs", "report_formats", "batch_size", "strict_cleaning_check"});
    for (const auto& input : i.value("external_inputs", std::vector<std::string>{})) {
      config.inference.external_inputs.push_back(resolve_path(config_dir, input));
    }
    config.inference.report_formats =
        i.value("report_formats", config.inference.report_formats);
    config.inference.batch_size = i.value("batch_size", config.inference.batch_size);
    config.inference.strict_cleaning_check =
        i.value("strict_cleaning_check", config.inference.strict_cleaning_check);
  }

  return config;
}

PipelineConfig load_config(const std::string& path) {
  return parse_config(read_file(path), fs::path(path).parent_path().string());
}

namespace {

// ---------------------------------------------------------------------------
// Stage bookkeeping: every stage writes stage_meta.json carrying a chain
// digest over its own config plus its upstreams' chains. A downstream stage
// recomputes the expected chain from the current config, so editing an
// upstream section invalidates stale outputs.
// ---------------------------------------------------------------------------

std::vector<std::string> upstreams_of(const std::string& stage) {
  if (stage == "clean") return {"ingest"};
  if (stage == "synthesize") return {"clean"};
  if (stage == "split") return {"clean", "synthesize"};
  if (stage == "train") return {"split"};
  if (stage == "evaluate") return {"train", "split"};
  if (stage == "predict") return {"train"};
  if (stage == "report") return {"predict"};
  return {};
}

std::string stage_config_digest(const PipelineConfig& c, const std::string& stage) {
  json j;
  if (stage == "ingest") {
    j = {{"inputs", c.corpus.inputs}};
  } else if (stage == "clean") {
    j = {{"cleaning", c.corpus.cleaning.fingerprint()},
         {"equalize_sources", c.corpus.dedupe.equalize_sources}};
  } else if (stage == "synthesize") {
    j = {{"mock", c.synthesis.mock},
         {"seed", c.synthesis_seed()},
         {"gates",
          {{"min_length_ratio", c.synthesis.gates.min_length_ratio},
           {"max_length_ratio", c.synthesis.gates.max_length_ratio},
           {"min_cosine", c.synthesis.gates.min_cosine}}},
         {"source_names", c.synthesis.source_names}};
    if (!c.synthesis.mock) {
      j["endpoint"] = c.synthesis.endpoint;
      j["model"] = c.synthesis.model;
    }
    // The prompt is an input in its own right; hash its content so edits
    // propagate downstream.
    if (!c.synthesis.prompt_file.empty() && fs::exists(c.synthesis.prompt_file)) {
      j["prompt_digest"] = content_digest(read_file(c.synthesis.prompt_file));
    }
  } else if (stage == "split") {
    j = {{"ratios", c.dataset.ratios}, {"seed", c.dataset_seed()}};
  } else if (stage == "train") {
    auto tc = c.training;
    tc.seed = c.training_seed();
    j = json::parse(training::to_canonical_json(tc));
    j["cleaning"] = c.corpus.cleaning.fingerprint();
  } else if (stage == "predict") {
    j = {{"external_inputs", c.inference.external_inputs},
         {"batch_size", c.inference.batch_size},
         {"strict_cleaning_check", c.inference.strict_cleaning_check},
         {"cleaning", c.corpus.cleaning.fingerprint()}};
  } else if (stage == "report") {
    j = {{"report_formats", c.inference.report_formats}};
  } else {
    j = json::object();
  }
  return content_digest(j.dump());
}

std::string expected_chain(const PipelineConfig& c, const std::string& stage) {
  std::string acc = stage + "|" + stage_config_digest(c, stage);
  for (const auto& up : upstreams_of(stage)) acc += "|" + expected_chain(c, up);
  return content_digest(acc);
}

fs::path stage_dir(const PipelineConfig& c, const std::string& stage) {
  return fs::path(c.out_dir) / stage;
}

void require_upstream(const PipelineConfig& c, const std::string& stage) {
  for (const auto& up : upstreams_of(stage)) {
    const fs::path meta_path = stage_dir(c, up) / "stage_meta.json";
    if (!fs::exists(meta_path)) {
      throw std::runtime_error("stage '" + stage + "' needs the outputs of stage '" + up +
                               "'; run stage '" + up + "' first (missing " + meta_path.string() +
                               ")");
    }
    const json meta = json::parse(read_file(meta_path.string()));
    if (meta.value("chain", std::string()) != expected_chain(c, up)) {
      throw std::runtime_error("outputs of stage '" + up +
                               "' were produced with a different configuration; rerun stage '" +
                               up + "'");
    }
  }
}

void write_stage_meta(const PipelineConfig& c, const std::string& stage) {
  json meta;
  meta["stage"] = stage;
  meta["config_digest"] = stage_config_digest(c, stage);
  meta["chain"] = expected_chain(c, stage);
  json ups = json::object();
  for (const auto& up : upstreams_of(stage)) ups[up] = expected_chain(c, up);
  meta["upstreams"] = ups;
  write_file_atomic((stage_dir(c, stage) / "stage_meta.json").string(), meta.dump(2) + "\n");
}

fs::path fresh_stage_dir(const PipelineConfig& c, const std::string& stage) {
  const fs::path dir = stage_dir(c, stage);
  fs::create_directories(dir);
  // Drop a stale meta so a failed rerun cannot masquerade as current.
  fs::remove(dir / "stage_meta.json");
  return dir;
}

// ---------------------------------------------------------------------------
// Stages
// ---------------------------------------------------------------------------

void stage_ingest(const PipelineConfig& c) {
  if (c.corpus.inputs.empty()) {
    throw std::runtime_error("corpus.inputs is empty; nothing to ingest");
  }
  const fs::path dir = fresh_stage_dir(c, "ingest");

  std::vector<corpus::Article> all;
  std::unordered_set<std::string> seen_ids;
  json file_reports = json::array();
  std::size_t duplicate_ids = 0;
  for (const auto& input : c.corpus.inputs) {
    corpus::IngestReport report;
    const auto articles = corpus::ingest_articles(input, report);
    for (const auto& article : articles) {
      if (!seen_ids.insert(article.id).second) {
        ++duplicate_ids;  // keep the first occurrence across files
        continue;
      }
      all.push_back(article);
    }
    json errors = json::array();
    for (const auto& e : report.errors) {
      errors.push_back({{"record", e.record_index}, {"message", e.message}});
    }
    file_reports.push_back({{"file", input},
                            {"total_records", report.total_records},
                            {"accepted", report.accepted},
                            {"errors", errors}});
  }
  if (all.empty()) throw std::runtime_error("ingest accepted no articles");

  corpus::write_articles_jsonl((dir / "articles.jsonl").string(), all);
  const json report = {{"files", file_reports},
                       {"articles", all.size()},
                       {"cross_file_duplicate_ids", duplicate_ids}};
  write_file_atomic((dir / "report.json").string(), report.dump(2) + "\n");
  write_stage_meta(c, "ingest");
}

void stage_clean(const PipelineConfig& c) {
  require_upstream(c, "clean");
  const fs::path dir = fresh_stage_dir(c, "clean");

  auto articles =
      corpus::read_articles_jsonl((stage_dir(c, "ingest") / "articles.jsonl").string());
  std::size_t emptied = 0;
  std::vector<corpus::Article> cleaned;
  cleaned.reserve(articles.size());
  for (auto& article : articles) {
    article.body = corpus::clean_text(article.body, c.corpus.cleaning);
    if (article.body.empty()) {
      ++emptied;
      continue;
    }
    cleaned.push_back(std::move(article));
  }
  if (cleaned.empty()) throw std::runtime_error("cleaning removed every article");

  const auto deduped = corpus::deduplicate(cleaned, c.corpus.dedupe);
  corpus::write_articles_jsonl((dir / "articles.jsonl").string(), deduped);
  write_file_atomic((dir / "stats.json").string(),
                    corpus::stats_to_json(corpus::word_count_stats(deduped)));
  const json report = {{"input", articles.size()},
                       {"emptied_by_cleaning", emptied},
                       {"after_dedupe", deduped.size()},
                       {"cleaning_fingerprint", c.corpus.cleaning.fingerprint()}};
  write_file_atomic((dir / "report.json").string(), report.dump(2) + "\n");
  write_stage_meta(c, "clean");
}

void stage_synthesize(const PipelineConfig& c) {
  require_upstream(c, "synthesize");
  const fs::path dir = fresh_stage_dir(c, "synthesize");

  const auto articles =
      corpus::read_articles_jsonl((stage_dir(c, "clean") / "articles.jsonl").string());

  std::unique_ptr<synthesis::RewriteClient> client;
  if (c.synthesis.mock) {
    synthesis::MockRewriteClient::Options options;
    options.seed = c.synthesis_seed();
    client = std::make_unique<synthesis::MockRewriteClient>(options);
  } else {
    synthesis::HttpRewriteClient::Options options;
    options.endpoint = c.synthesis.endpoint;
    options.model = c.synthesis.model;
    options.timeout_seconds = c.synthesis.timeout_seconds;
    if (const char* key = std::getenv("GAZETE_API_KEY")) options.api_key = key;
    client = std::make_unique<synthesis::HttpRewriteClient>(options);
  }

  std::string template_text;
  if (!c.synthesis.prompt_file.empty()) {
    template_text = synthesis::load_prompt_template(c.synthesis.prompt_file);
  } else if (!c.synthesis.mock) {
    throw std::runtime_error("synthesis.prompt_file is required for a live provider");
  }

  std::map<std::string, synthesis::RewritePrompt> prompts;
  const auto prompt_for = [&](const std::string& source) -> const synthesis::RewritePrompt& {
    auto it = prompts.find(source);
    if (it == prompts.end()) {
      const auto name_it = c.synthesis.source_names.find(source);
      const std::string display =
          name_it == c.synthesis.source_names.end() ? source : name_it->second;
      synthesis::RewritePrompt prompt;
      if (!template_text.empty()) {
        prompt = synthesis::build_prompt(display, template_text);
      }
      it = prompts.emplace(source, std::move(prompt)).first;
    }
    return it->second;
  };

  std::vector<synthesis::RewriteResult> results;
  std::vector<corpus::Article> rewritten;
  results.reserve(articles.size());
  for (const auto& article : articles) {
    auto result = synthesis::rewrite_article(article, *client, prompt_for(article.source),
                                             c.synthesis.gates, c.synthesis.retry);
    if (result.accepted) {
      auto counterpart = synthesis::materialize_rewritten(article, result);
      // Keep the model's text domain closed under the cleaning pass.
      counterpart.body = corpus::clean_text(counterpart.body, c.corpus.cleaning);
      if (counterpart.body.empty()) {
        result.accepted = false;
        result.rejection_reasons.push_back("empty_after_cleaning");
      } else {
        rewritten.push_back(std::move(counterpart));
      }
    }
    results.push_back(std::move(result));
  }
  if (rewritten.empty()) {
    throw std::runtime_error("no rewrites passed the verification gates");
  }

  synthesis::write_results_jsonl((dir / "results.jsonl").string(), results);
  corpus::write_articles_jsonl((dir / "rewritten.jsonl").string(), rewritten);
  write_file_atomic((dir / "summary.json").string(),
                    synthesis::summary_to_json(synthesis::synthesis_report(results)));
  write_stage_meta(c, "synthesize");
}

void stage_split(const PipelineConfig& c) {
  require_upstream(c, "split");
  const fs::path dir = fresh_stage_dir(c, "split");

  const auto human =
      corpus::read_articles_jsonl((stage_dir(c, "clean") / "articles.jsonl").string());
  const auto rewritten =
      corpus::read_articles_jsonl((stage_dir(c, "synthesize") / "rewritten.jsonl").string());
  const auto examples = dataset::make_examples(human, rewritten);
  const auto bundle = dataset::stratified_split(examples, c.dataset.ratios, c.dataset_seed());

  dataset::write_manifest((dir / "train.jsonl").string(), bundle.train);
  dataset::write_manifest((dir / "validation.jsonl").string(), bundle.validation);
  dataset::write_manifest((dir / "test.jsonl").string(), bundle.test);
  dataset::write_examples_jsonl((dir / "train_examples.jsonl").string(), bundle.train);
  dataset::write_examples_jsonl((dir / "validation_examples.jsonl").string(), bundle.validation);
  dataset::write_examples_jsonl((dir / "test_examples.jsonl").string(), bundle.test);
  write_stage_meta(c, "split");
}

void stage_train(const PipelineConfig& c) {
  require_upstream(c, "train");
  const fs::path dir = fresh_stage_dir(c, "train");
  const fs::path split_dir = stage_dir(c, "split");

  dataset::SplitBundle bundle;
  bundle.train = dataset::read_examples_jsonl((split_dir / "train_examples.jsonl").string());
  bundle.validation =
      dataset::read_examples_jsonl((split_dir / "validation_examples.jsonl").string());
  bundle.test = dataset::read_examples_jsonl((split_dir / "test_examples.jsonl").string());
  bundle.ratios = c.dataset.ratios;
  bundle.seed = c.dataset_seed();

  auto train_config = c.training;
  train_config.seed = c.training_seed();
  const auto result =
      training::train(train_config, bundle, c.corpus.cleaning.fingerprint());
  training::save_checkpoint(result.checkpoint, (dir / "checkpoint").string(), result.records);

  const json summary = {{"epochs_run", result.records.size()},
                        {"best_epoch", result.checkpoint.best_epoch},
                        {"best_val_f1", result.checkpoint.best_metric},
                        {"weights_fingerprint", result.checkpoint.fingerprint}};
  write_file_atomic((dir / "summary.json").string(), summary.dump(2) + "\n");
  write_stage_meta(c, "train");
}

void stage_evaluate(const PipelineConfig& c) {
  require_upstream(c, "evaluate");
  const fs::path dir = fresh_stage_dir(c, "evaluate");

  const auto checkpoint =
      training::load_checkpoint((stage_dir(c, "train") / "checkpoint").string());
  const auto test = dataset::read_examples_jsonl(
      (stage_dir(c, "split") / "test_examples.jsonl").string());
  if (test.empty()) throw std::runtime_error("test split is empty");

  const auto outcome = evaluation::evaluate_split(checkpoint, test);
  write_file_atomic((dir / "metrics.json").string(),
                    evaluation::metrics_to_json(outcome.report, outcome.cm));
  write_file_atomic((dir / "metrics.txt").string(),
                    evaluation::metrics_table(outcome.report.ai_positive));

  std::string lines;
  for (const auto& p : outcome.predictions) {
    lines += json{{"id", p.id},
                  {"predicted", corpus::to_string(p.predicted)},
                  {"truth", corpus::to_string(p.truth)},
                  {"p_human", p.probabilities[0]},
                  {"p_ai", p.probabilities[1]},
                  {"confidence", p.confidence}}
                 .dump() +
             "\n";
  }
  write_file_atomic((dir / "predictions.jsonl").string(), lines);
  write_stage_meta(c, "evaluate");
}

void stage_predict(const PipelineConfig& c) {
  require_upstream(c, "predict");
  if (c.inference.external_inputs.empty()) {
    throw std::runtime_error("inference.external_inputs is empty; nothing to predict");
  }
  const fs::path dir = fresh_stage_dir(c, "predict");

  const auto checkpoint =
      training::load_checkpoint((stage_dir(c, "train") / "checkpoint").string());

  std::vector<corpus::Article> articles;
  json file_reports = json::array();
  std::size_t emptied = 0;
  for (const auto& input : c.inference.external_inputs) {
    corpus::IngestReport report;
    auto batch = corpus::ingest_articles(input, report);
    for (auto& article : batch) {
      article.body = corpus::clean_text(article.body, c.corpus.cleaning);
      if (article.body.empty()) {
        ++emptied;
        continue;
      }
      articles.push_back(std::move(article));
    }
    file_reports.push_back({{"file", input},
                            {"total_records", report.total_records},
                            {"accepted", report.accepted},
                            {"parse_errors", report.errors.size()}});
  }
  if (articles.empty()) throw std::runtime_error("no external articles to predict");

  inference::PredictOptions options;
  options.batch_size = c.inference.batch_size;
  options.strict_cleaning_check = c.inference.strict_cleaning_check;
  options.cleaning_fingerprint = c.corpus.cleaning.fingerprint();
  std::string warning;
  const auto predictions = inference::predict_batch(articles, checkpoint, options, &warning);
  if (!warning.empty()) std::cerr << "warning: " << warning << "\n";

  inference::write_predictions_jsonl((dir / "predictions.jsonl").string(), predictions);
  const json report = {{"files", file_reports},
                       {"predicted", predictions.size()},
                       {"emptied_by_cleaning", emptied},
                       {"warning", warning}};
  write_file_atomic((dir / "report.json").string(), report.dump(2) + "\n");
  write_stage_meta(c, "predict");
}

void stage_report(const PipelineConfig& c) {
  require_upstream(c, "report");
  const fs::path dir = fresh_stage_dir(c, "report");

  const auto predictions = inference::read_predictions_jsonl(
      (stage_dir(c, "predict") / "predictions.jsonl").string());
  if (predictions.empty()) throw std::runtime_error("predictions file is empty");

  const json checkpoint_config = json::parse(
      read_file((stage_dir(c, "train") / "checkpoint" / "config.json").string()));
  const auto rows = inference::aggregate_prevalence(predictions);
  const auto report = inference::make_report(
      rows, checkpoint_config.value("weights_fingerprint", std::string()),
      checkpoint_config.value("cleaning_fingerprint", std::string()));

  for (const auto& format_name : c.inference.report_formats) {
    const auto format = inference::report_format_from_string(format_name);
    write_file_atomic((dir / ("report." + inference::report_extension(format))).string(),
                      inference::render_report(report, format));
  }
  write_stage_meta(c, "report");
}

void run_single(const std::string& stage, const PipelineConfig& config) {
  if (stage == "ingest") return stage_ingest(config);
  if (stage == "clean") return stage_clean(config);
  if (stage == "synthesize") return stage_synthesize(config);
  if (stage == "split") return stage_split(config);
  if (stage == "train") return stage_train(config);
  if (stage == "evaluate") return stage_evaluate(config);
  if (stage == "predict") return stage_predict(config);
  if (stage == "report") return stage_report(config);
  std::string names;
  for (const char* name : kStageOrder) names += std::string(name) + " ";
  throw std::invalid_argument("unknown stage '" + stage + "'; valid stages: " + names +
                              "pipeline");
}

}  // namespace

void run_stage(const std::string& stage, PipelineConfig config, const StageOverrides& overrides) {
  if (overrides.seed) config.seed = *overrides.seed;
  if (overrides.out_dir) config.out_dir = *overrides.out_dir;
  if (overrides.force_mock) config.synthesis.mock = true;

  if (stage == "pipeline") {
    for (const char* name : kStageOrder) run_single(name, config);
    return;
  }
  run_single(stage, config);
}

}  // namespace gazete::pipeline
