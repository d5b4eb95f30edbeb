// Copyright (c) 2026, the gazete authors
// SPDX-License-Identifier: Apache-2.0

#include "gazete/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "gazete/hash.hpp"
#include "gazete/text.hpp"

namespace gazete::corpus {

using json = nlohmann::json;

std::string to_string(OriginLabel label) {
  return label == OriginLabel::HumanWritten ? "human" : "ai_rewritten";
}

OriginLabel origin_from_string(const std::string& s) {
  if (s == "human" || s == "human_written") return OriginLabel::HumanWritten;
  if (s == "ai_rewritten" || s == "ai" || s == "ai_revised") return OriginLabel::AiRewritten;
  throw std::invalid_argument("unknown origin label: " + s);
}

std::string Date::to_iso() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
  return buf;
}

std::optional<Date> parse_date(const std::string& s) {
  if (s.size() < 10) return std::nullopt;
  if (s[4] != '-' || s[7] != '-') return std::nullopt;
  for (const std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
    if (s[i] < '0' || s[i] > '9') return std::nullopt;
  }
  Date d;
  d.year = std::stoi(s.substr(0, 4));
  d.month = std::stoi(s.substr(5, 2));
  d.day = std::stoi(s.substr(8, 2));
  if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31) return std::nullopt;
  return d;
}

std::string CleaningConfig::fingerprint() const {
  json j;
  j["lowercase"] = lowercase;
  j["strip_punctuation"] = strip_punctuation;
  j["remove_stopwords"] = remove_stopwords;
  j["stopword_list"] = stopword_list;
  j["headline_patterns"] = headline_patterns;
  j["agency_suffix_patterns"] = agency_suffix_patterns;
  return content_digest(j.dump());
}

std::vector<std::string> load_stopwords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open stopword file: " + path);
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string word = text::normalize_whitespace(line);
    if (word.empty() || word[0] == '#') continue;
    words.push_back(word);
  }
  return words;
}

namespace {

std::optional<Article> parse_record(const json& j, std::string& error) {
  if (!j.is_object()) {
    error = "record is not a JSON object";
    return std::nullopt;
  }
  Article a;
  if (!j.contains("source") || !j["source"].is_string() || j["source"].get<std::string>().empty()) {
    error = "missing or invalid 'source'";
    return std::nullopt;
  }
  a.source = j["source"].get<std::string>();
  if (!j.contains("date") || !j["date"].is_string()) {
    error = "missing or invalid 'date'";
    return std::nullopt;
  }
  const auto date = parse_date(j["date"].get<std::string>());
  if (!date) {
    error = "unparseable date: " + j["date"].get<std::string>();
    return std::nullopt;
  }
  a.published_at = *date;
  if (!j.contains("body") || !j["body"].is_string() || j["body"].get<std::string>().empty()) {
    error = "missing or empty 'body'";
    return std::nullopt;
  }
  a.body = j["body"].get<std::string>();
  if (j.contains("title")) {
    if (!j["title"].is_string()) {
      error = "invalid 'title'";
      return std::nullopt;
    }
    a.title = j["title"].get<std::string>();
  }
  if (j.contains("origin")) {
    if (!j["origin"].is_string()) {
      error = "invalid 'origin'";
      return std::nullopt;
    }
    try {
      a.origin = origin_from_string(j["origin"].get<std::string>());
    } catch (const std::invalid_argument& e) {
      error = e.what();
      return std::nullopt;
    }
  }
  if (j.contains("id")) {
    if (!j["id"].is_string() || j["id"].get<std::string>().empty()) {
      error = "invalid 'id'";
      return std::nullopt;
    }
    a.id = j["id"].get<std::string>();
  } else {
    a.id = content_digest(a.source + "|" + a.published_at.to_iso() + "|" + a.body);
  }
  return a;
}

}  // namespace

std::vector<Article> ingest_articles(const std::string& path, IngestReport& report) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);

  std::vector<Article> articles;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t index = 0;
  while (std::getline(in, line)) {
    const std::size_t record_index = index++;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++report.total_records;

    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) {
      report.errors.push_back({record_index, "invalid JSON"});
      continue;
    }
    std::string error;
    auto article = parse_record(j, error);
    if (!article) {
      report.errors.push_back({record_index, error});
      continue;
    }
    if (!seen_ids.insert(article->id).second) {
      report.errors.push_back({record_index, "duplicate id: " + article->id});
      continue;
    }
    articles.push_back(std::move(*article));
    ++report.accepted;
  }
  return articles;
}

namespace {

json article_to_json(const Article& a) {
  json j;
  j["id"] = a.id;
  j["source"] = a.source;
  j["date"] = a.published_at.to_iso();
  if (!a.title.empty()) j["title"] = a.title;
  j["body"] = a.body;
  if (a.origin) j["origin"] = to_string(*a.origin);
  return j;
}

}  // namespace

void write_articles_jsonl(const std::string& path, const std::vector<Article>& articles) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write: " + path);
  for (const auto& a : articles) out << article_to_json(a).dump() << "\n";
}

std::vector<Article> read_articles_jsonl(const std::string& path) {
  IngestReport report;
  auto articles = ingest_articles(path, report);
  if (!report.errors.empty()) {
    throw std::runtime_error("malformed article file " + path + ": " +
                             report.errors.front().message);
  }
  return articles;
}

namespace {

// Removes every regex match, re-running until the text stops changing so the
// whole cleaning pass stays idempotent.
std::string remove_to_fixpoint(std::string s, const std::regex& re) {
  for (;;) {
    std::string next = std::regex_replace(s, re, "");
    if (next == s) return next;
    s = std::move(next);
  }
}

std::string strip_agency_suffixes(std::string s, const std::vector<std::string>& patterns) {
  bool changed = true;
  while (changed) {
    changed = false;
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\n' || s.back() == '\r')) {
      s.pop_back();
    }
    for (const auto& suffix : patterns) {
      if (suffix.empty() || suffix.size() > s.size()) continue;
      if (s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0) {
        s.erase(s.size() - suffix.size());
        changed = true;
        break;
      }
    }
  }
  return s;
}

}  // namespace

std::string clean_text(const std::string& raw, const CleaningConfig& config) {
  std::string s = raw;

  for (const auto& pattern : config.headline_patterns) {
    if (pattern.empty()) continue;
    const std::regex re(pattern, std::regex::ECMAScript);
    s = remove_to_fixpoint(std::move(s), re);
  }

  s = strip_agency_suffixes(std::move(s), config.agency_suffix_patterns);

  if (config.lowercase) s = text::turkish_lowercase(s);
  if (config.strip_punctuation) s = text::strip_punctuation(s);

  s = text::normalize_whitespace(s);

  if (config.remove_stopwords) {
    if (config.stopword_list.empty()) {
      throw std::invalid_argument("remove_stopwords is set but stopword_list is empty");
    }
    const std::unordered_set<std::string> stop(config.stopword_list.begin(),
                                               config.stopword_list.end());
    std::string kept;
    kept.reserve(s.size());
    for (const auto& word : text::split_words(s)) {
      if (stop.count(word)) continue;
      if (!kept.empty()) kept.push_back(' ');
      kept += word;
    }
    s = std::move(kept);
  }

  return s;
}

std::vector<Article> deduplicate(const std::vector<Article>& articles, const DedupConfig& config) {
  std::vector<Article> sorted = articles;
  std::sort(sorted.begin(), sorted.end(), [](const Article& a, const Article& b) {
    return std::tie(a.source, a.published_at, a.id) < std::tie(b.source, b.published_at, b.id);
  });

  std::vector<Article> unique;
  unique.reserve(sorted.size());
  std::unordered_set<std::uint64_t> seen;
  std::unordered_map<std::string, std::size_t> per_source;
  for (auto& a : sorted) {
    const std::uint64_t key = fnv1a64(text::normalize_whitespace(a.body));
    if (!seen.insert(key).second) continue;
    ++per_source[a.source];
    unique.push_back(std::move(a));
  }

  if (!config.equalize_sources || per_source.empty()) return unique;

  std::size_t floor = unique.size();
  for (const auto& [source, count] : per_source) floor = std::min(floor, count);

  std::vector<Article> trimmed;
  trimmed.reserve(unique.size());
  std::unordered_map<std::string, std::size_t> kept;
  for (auto& a : unique) {
    if (kept[a.source] >= floor) continue;
    ++kept[a.source];
    trimmed.push_back(std::move(a));
  }
  return trimmed;
}

namespace {

// Quartiles by linear interpolation between order statistics (the common
// numpy default), so that {10, 20} has median 15.
double quantile_sorted(const std::vector<std::size_t>& sorted, double p) {
  if (sorted.empty()) return 0.0;
  if (sorted.size() == 1) return static_cast<double>(sorted[0]);
  const double h = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  const double frac = h - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return static_cast<double>(sorted.back());
  return static_cast<double>(sorted[lo]) +
         frac * (static_cast<double>(sorted[lo + 1]) - static_cast<double>(sorted[lo]));
}

LabelSummary summarize(std::vector<std::size_t> counts) {
  LabelSummary s;
  s.n = counts.size();
  if (counts.empty()) return s;
  std::sort(counts.begin(), counts.end());
  double sum = 0.0;
  for (const std::size_t c : counts) sum += static_cast<double>(c);
  s.mean = sum / static_cast<double>(counts.size());
  s.q1 = quantile_sorted(counts, 0.25);
  s.median = quantile_sorted(counts, 0.50);
  s.q3 = quantile_sorted(counts, 0.75);
  return s;
}

}  // namespace

CorpusStats word_count_stats(const std::vector<Article>& articles, std::size_t bucket_width) {
  if (articles.empty()) throw std::invalid_argument("word_count_stats: no articles");
  if (bucket_width == 0) throw std::invalid_argument("word_count_stats: bucket_width == 0");

  CorpusStats stats;
  stats.total = articles.size();
  stats.bucket_width = bucket_width;
  std::vector<std::size_t> human_counts;
  std::vector<std::size_t> rewritten_counts;
  for (const auto& a : articles) {
    const std::size_t words = text::count_words(a.body);
    ++stats.per_source[a.source];
    ++stats.histogram[(words / bucket_width) * bucket_width];
    if (a.origin == OriginLabel::HumanWritten) human_counts.push_back(words);
    if (a.origin == OriginLabel::AiRewritten) rewritten_counts.push_back(words);
  }
  stats.human = summarize(std::move(human_counts));
  stats.rewritten = summarize(std::move(rewritten_counts));
  return stats;
}

std::string stats_to_json(const CorpusStats& stats) {
  json j;
  j["total"] = stats.total;
  j["per_source"] = stats.per_source;
  j["bucket_width"] = stats.bucket_width;
  json hist = json::object();
  for (const auto& [floor, count] : stats.histogram) hist[std::to_string(floor)] = count;
  j["histogram"] = hist;
  const auto label_json = [](const LabelSummary& s) {
    return json{{"n", s.n}, {"mean", s.mean}, {"q1", s.q1}, {"median", s.median}, {"q3", s.q3}};
  };
  j["human"] = label_json(stats.human);
  j["ai_rewritten"] = label_json(stats.rewritten);
  return j.dump(2);
}

}  // namespace gazete::corpus
