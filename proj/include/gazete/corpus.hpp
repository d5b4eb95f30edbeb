// Copyright (c) 2026, the gazete authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gazete::corpus {

enum class OriginLabel { HumanWritten, AiRewritten };

std::string to_string(OriginLabel label);
OriginLabel origin_from_string(const std::string& s);

struct Date {
  int year = 0;
  int month = 0;
  int day = 0;

  auto operator<=>(const Date&) const = default;
  std::string to_iso() const;
};

// Parses "YYYY-MM-DD" (a longer ISO-8601 timestamp is accepted; only the date
// part is kept). Returns nullopt for malformed or out-of-range dates.
std::optional<Date> parse_date(const std::string& s);

struct Article {
  std::string id;
  std::string source;
  Date published_at;
  std::string title;
  std::string body;
  std::optional<OriginLabel> origin;

  int year() const { return published_at.year; }
};

struct CleaningConfig {
  bool lowercase = true;
  bool strip_punctuation = true;
  bool remove_stopwords = true;
  std::vector<std::string> stopword_list;
  std::vector<std::string> headline_patterns;       // ECMAScript regexes, removed to fixpoint
  std::vector<std::string> agency_suffix_patterns;  // literal suffixes, stripped from the end

  // Canonical digest used to tie checkpoints to the preprocessing that
  // produced their training text.
  std::string fingerprint() const;
};

// Loads one token per line; '#' lines and blanks are skipped.
std::vector<std::string> load_stopwords(const std::string& path);

struct IngestError {
  std::size_t record_index = 0;  // 0-based line number
  std::string message;
};

struct IngestReport {
  std::size_t total_records = 0;
  std::size_t accepted = 0;
  std::vector<IngestError> errors;
};

// Reads JSON-lines records {id?, source, date, title?, body, origin?}.
// Malformed records become IngestReport entries; an unreadable file throws.
// Missing ids are assigned from a digest of source+date+body.
std::vector<Article> ingest_articles(const std::string& path, IngestReport& report);

void write_articles_jsonl(const std::string& path, const std::vector<Article>& articles);
std::vector<Article> read_articles_jsonl(const std::string& path);

// Applies, in order: headline-pattern removal, agency-suffix stripping,
// Turkish-aware lowercasing, punctuation removal, stopword removal, and
// whitespace normalization. May return an empty string; callers reject the
// article in that case.
std::string clean_text(const std::string& raw, const CleaningConfig& config);

struct DedupConfig {
  bool equalize_sources = true;
};

// Drops articles whose normalized body collides with an earlier one (order:
// source, date, id), then optionally trims every source to the smallest
// per-source count. Idempotent.
std::vector<Article> deduplicate(const std::vector<Article>& articles,
                                 const DedupConfig& config = {});

struct LabelSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};

struct CorpusStats {
  std::size_t total = 0;
  std::map<std::string, std::size_t> per_source;
  std::map<std::size_t, std::size_t> histogram;  // bucket floor -> count
  std::size_t bucket_width = 50;
  LabelSummary human;
  LabelSummary rewritten;
};

// Word counts are whitespace-token counts of the body. Per-label summaries
// cover labeled articles only. Throws on empty input.
CorpusStats word_count_stats(const std::vector<Article>& articles,
                             std::size_t bucket_width = 50);

std::string stats_to_json(const CorpusStats& stats);

}  // namespace gazete::corpus
