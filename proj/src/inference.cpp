// Copyright (c) 2026, the gazete authors
// SPDX-License-Identifier: Apache-2.0

#include "gazete/inference.hpp"

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "gazete/dataset.hpp"
#include "gazete/encoder.hpp"
#include "gazete/fsutil.hpp"

namespace gazete::inference {

using json = nlohmann::json;

std::vector<Prediction> predict_batch(const std::vector<corpus::Article>& articles,
                                      const training::Checkpoint& checkpoint,
                                      const PredictOptions& options, std::string* warning) {
  if (!checkpoint.model) throw std::invalid_argument("checkpoint has no model");
  if (options.batch_size < 1) throw std::invalid_argument("batch_size must be at least 1");

  if (!options.cleaning_fingerprint.empty() && !checkpoint.cleaning_fingerprint.empty() &&
      options.cleaning_fingerprint != checkpoint.cleaning_fingerprint) {
    const std::string message =
        "cleaning config fingerprint " + options.cleaning_fingerprint +
        " does not match the checkpoint's " + checkpoint.cleaning_fingerprint;
    if (options.strict_cleaning_check) throw std::runtime_error(message);
    if (warning) *warning = message;
  }

  const auto tokenizer = model::make_tokenizer(checkpoint.model->spec());
  dataset::TokenizationSpec tok_spec;
  tok_spec.encoder_id = checkpoint.model->spec().id;
  tok_spec.max_length = checkpoint.config.max_length;

  std::vector<Prediction> out;
  out.reserve(articles.size());
  // Batching is an execution grouping only; each sequence is independent, so
  // the batch size cannot change any probability.
  for (std::size_t start = 0; start < articles.size();
       start += static_cast<std::size_t>(options.batch_size)) {
    const std::size_t end =
        std::min(articles.size(), start + static_cast<std::size_t>(options.batch_size));
    for (std::size_t i = start; i < end; ++i) {
      const auto& article = articles[i];
      dataset::LabeledExample example;
      example.id = article.id;
      example.text = article.body;
      const auto encoded = dataset::encode(example, tok_spec, *tokenizer);
      const auto probs = checkpoint.model->predict(model::trim_to_mask(encoded));

      Prediction p;
      p.article_id = article.id;
      p.probabilities = probs;
      p.predicted = probs[dataset::kAiIndex] > probs[dataset::kHumanIndex]
                        ? corpus::OriginLabel::AiRewritten
                        : corpus::OriginLabel::HumanWritten;  // tie goes to human
      p.confidence = std::max(probs[0], probs[1]);
      p.source = article.source;
      p.year = article.year();
      out.push_back(std::move(p));
    }
  }
  return out;
}

void write_predictions_jsonl(const std::string& path,
                             const std::vector<Prediction>& predictions) {
  std::string body;
  for (const auto& p : predictions) {
    body += json{{"article_id", p.article_id},
                 {"predicted", corpus::to_string(p.predicted)},
                 {"p_human", p.probabilities[0]},
                 {"p_ai", p.probabilities[1]},
                 {"confidence", p.confidence},
                 {"source", p.source},
                 {"year", p.year}}
                .dump() +
            "\n";
  }
  write_file_atomic(path, body);
}

std::vector<Prediction> read_predictions_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open predictions file: " + path);
  std::vector<Prediction> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    Prediction p;
    p.article_id = j.at("article_id").get<std::string>();
    p.predicted = corpus::origin_from_string(j.at("predicted").get<std::string>());
    p.probabilities = {j.at("p_human").get<double>(), j.at("p_ai").get<double>()};
    p.confidence = j.at("confidence").get<double>();
    p.source = j.at("source").get<std::string>();
    p.year = j.at("year").get<int>();
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<PrevalenceRow> aggregate_prevalence(const std::vector<Prediction>& predictions) {
  struct Tally {
    long long n = 0;
    long long ai = 0;
    double confidence_sum = 0.0;
  };
  std::map<std::pair<std::string, int>, Tally> groups;
  for (const auto& p : predictions) {
    auto& tally = groups[{p.source, p.year}];
    ++tally.n;
    if (p.predicted == corpus::OriginLabel::AiRewritten) ++tally.ai;
    tally.confidence_sum += p.confidence;
  }

  std::vector<PrevalenceRow> rows;
  rows.reserve(groups.size());
  for (const auto& [key, tally] : groups) {
    PrevalenceRow row;
    row.source = key.first;
    row.year = key.second;
    row.n = tally.n;
    row.pct_ai = 100.0 * static_cast<double>(tally.ai) / static_cast<double>(tally.n);
    row.pct_human = 100.0 * static_cast<double>(tally.n - tally.ai) / static_cast<double>(tally.n);
    row.mean_confidence = 100.0 * tally.confidence_sum / static_cast<double>(tally.n);
    rows.push_back(std::move(row));
  }
  return rows;  // std::map iteration already sorts by (source, year)
}

double overall_rate(const std::vector<PrevalenceRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("no prevalence rows");
  long long total = 0;
  double weighted = 0.0;
  for (const auto& row : rows) {
    total += row.n;
    weighted += row.pct_ai * static_cast<double>(row.n);
  }
  return weighted / static_cast<double>(total);
}

namespace {

std::string iso_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

std::string one_decimal(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

}  // namespace

PrevalenceReport make_report(const std::vector<PrevalenceRow>& rows,
                             const std::string& checkpoint_fingerprint,
                             const std::string& cleaning_fingerprint) {
  PrevalenceReport report;
  report.rows = rows;
  report.overall_ai_rate = overall_rate(rows);
  report.generated_at = iso_utc_now();
  report.checkpoint_fingerprint = checkpoint_fingerprint;
  report.cleaning_fingerprint = cleaning_fingerprint;
  return report;
}

ReportFormat report_format_from_string(const std::string& name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "markdown" || name == "md") return ReportFormat::Markdown;
  if (name == "json") return ReportFormat::Json;
  throw std::invalid_argument("unknown report format: " + name);
}

std::string report_extension(ReportFormat format) {
  switch (format) {
    case ReportFormat::Csv: return "csv";
    case ReportFormat::Markdown: return "md";
    case ReportFormat::Json: return "json";
  }
  return "txt";
}

std::string render_report(const PrevalenceReport& report, ReportFormat format) {
  if (format == ReportFormat::Csv) {
    std::string out = "Source,Year,Human %,AI %,Mean Conf. %\n";
    for (const auto& row : report.rows) {
      out += row.source + "," + std::to_string(row.year) + "," + one_decimal(row.pct_human) +
             "," + one_decimal(row.pct_ai) + "," + one_decimal(row.mean_confidence) + "\n";
    }
    return out;
  }
  if (format == ReportFormat::Markdown) {
    std::string out = "| Source | Year | Human % | AI % | Mean Conf. % |\n";
    out += "|--------|------|---------|------|--------------|\n";
    for (const auto& row : report.rows) {
      out += "| " + row.source + " | " + std::to_string(row.year) + " | " +
             one_decimal(row.pct_human) + " | " + one_decimal(row.pct_ai) + " | " +
             one_decimal(row.mean_confidence) + " |\n";
    }
    out += "\nOverall AI rate: " + one_decimal(report.overall_ai_rate) + "% (generated " +
           report.generated_at + ")\n";
    return out;
  }

  json rows = json::array();
  for (const auto& row : report.rows) {
    rows.push_back({{"source", row.source},
                    {"year", row.year},
                    {"n", row.n},
                    {"pct_human", row.pct_human},
                    {"pct_ai", row.pct_ai},
                    {"mean_confidence", row.mean_confidence}});
  }
  const json out = {{"rows", rows},
                    {"overall_ai_rate", report.overall_ai_rate},
                    {"generated_at", report.generated_at},
                    {"checkpoint_fingerprint", report.checkpoint_fingerprint},
                    {"cleaning_fingerprint", report.cleaning_fingerprint},
                    {"confidence_definition", report.confidence_definition}};
  return out.dump(2) + "\n";
}

PrevalenceReport report_from_json(const std::string& text) {
  const json j = json::parse(text);
  PrevalenceReport report;
  for (const auto& row_json : j.at("rows")) {
    PrevalenceRow row;
    row.source = row_json.at("source").get<std::string>();
    row.year = row_json.at("year").get<int>();
    row.n = row_json.at("n").get<long long>();
    row.pct_human = row_json.at("pct_human").get<double>();
    row.pct_ai = row_json.at("pct_ai").get<double>();
    row.mean_confidence = row_json.at("mean_confidence").get<double>();
    report.rows.push_back(std::move(row));
  }
  report.overall_ai_rate = j.at("overall_ai_rate").get<double>();
  report.generated_at = j.at("generated_at").get<std::string>();
  report.checkpoint_fingerprint = j.at("checkpoint_fingerprint").get<std::string>();
  report.cleaning_fingerprint = j.at("cleaning_fingerprint").get<std::string>();
  report.confidence_definition = j.at("confidence_definition").get<std::string>();
  return report;
}

}  // namespace gazete::inference
