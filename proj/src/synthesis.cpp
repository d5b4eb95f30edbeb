// Copyright (c) 2026, the gazete authors
// SPDX-License-Identifier: Apache-2.0

#include "gazete/synthesis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "gazete/hash.hpp"
#include "gazete/rng.hpp"
#include "gazete/text.hpp"

namespace gazete::synthesis {

using json = nlohmann::json;

std::string load_prompt_template(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open prompt template: " + path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (content.find(kNamePlaceholder) == std::string::npos) {
    throw std::runtime_error("prompt template has no " + std::string(kNamePlaceholder) +
                             " placeholder: " + path);
  }
  return content;
}

RewritePrompt build_prompt(const std::string& newspaper_name, const std::string& template_text) {
  if (newspaper_name.empty()) throw std::invalid_argument("build_prompt: empty newspaper name");
  RewritePrompt prompt;
  prompt.newspaper_name = newspaper_name;
  prompt.template_text = template_text;
  std::string rendered;
  rendered.reserve(template_text.size() + newspaper_name.size() * 3);
  std::size_t pos = 0;
  const std::string placeholder = kNamePlaceholder;
  for (;;) {
    const std::size_t hit = template_text.find(placeholder, pos);
    if (hit == std::string::npos) {
      rendered.append(template_text, pos, std::string::npos);
      break;
    }
    rendered.append(template_text, pos, hit - pos);
    rendered += newspaper_name;
    pos = hit + placeholder.size();
  }
  prompt.rendered = std::move(rendered);
  return prompt;
}

double cosine_similarity(const std::string& a, const std::string& b) {
  const auto words_a = text::split_words(text::normalize_whitespace(a));
  const auto words_b = text::split_words(text::normalize_whitespace(b));
  if (words_a.empty() || words_b.empty()) {
    throw std::invalid_argument("cosine_similarity: empty text");
  }
  std::unordered_map<std::string, std::pair<double, double>> tf;
  for (const auto& w : words_a) tf[w].first += 1.0;
  for (const auto& w : words_b) tf[w].second += 1.0;
  double dot = 0.0, norm_a = 0.0, norm_b = 0.0;
  for (const auto& [word, counts] : tf) {
    dot += counts.first * counts.second;
    norm_a += counts.first * counts.first;
    norm_b += counts.second * counts.second;
  }
  return dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
}

RewriteResult verify_pair(const corpus::Article& original, RewriteResult result,
                          const GateConfig& gates) {
  (void)original;
  auto& reasons = result.rejection_reasons;
  const auto drop = [&reasons](const char* tag) {
    reasons.erase(std::remove(reasons.begin(), reasons.end(), tag), reasons.end());
  };
  drop("length_out_of_band");
  drop("low_similarity");

  if (!result.rewritten_text.empty()) {
    if (result.length_ratio < gates.min_length_ratio ||
        result.length_ratio > gates.max_length_ratio) {
      reasons.emplace_back("length_out_of_band");
    }
    if (result.cosine_similarity < gates.min_cosine) {
      reasons.emplace_back("low_similarity");
    }
  }
  result.accepted = reasons.empty();
  return result;
}

RewriteResult rewrite_article(const corpus::Article& original, RewriteClient& client,
                              const RewritePrompt& prompt, const GateConfig& gates,
                              const RetryPolicy& retry) {
  RewriteResult result;
  result.original_id = original.id;
  result.provider_metadata = client.metadata();

  std::string rewritten;
  bool got_response = false;
  double delay_ms = static_cast<double>(retry.base_delay_ms);
  for (int attempt = 1; attempt <= std::max(1, retry.max_attempts); ++attempt) {
    try {
      rewritten = client.rewrite(prompt.rendered, original.body);
      got_response = true;
      break;
    } catch (const ProviderError&) {
      if (attempt < retry.max_attempts && delay_ms > 0.0) {
        std::this_thread::sleep_for(
            std::chrono::milliseconds(static_cast<long long>(delay_ms)));
      }
      delay_ms *= retry.backoff_multiplier;
    }
  }
  if (!got_response) {
    result.rejection_reasons.emplace_back("provider_error");
    result.accepted = false;
    return result;
  }

  result.rewritten_text = text::normalize_whitespace(rewritten);
  if (result.rewritten_text.empty()) {
    result.rewritten_text.clear();
    result.rejection_reasons.emplace_back("empty_output");
    result.accepted = false;
    return result;
  }

  const double original_words = static_cast<double>(text::count_words(original.body));
  const double rewritten_words = static_cast<double>(text::count_words(result.rewritten_text));
  result.length_ratio = original_words > 0.0 ? rewritten_words / original_words : 0.0;
  result.cosine_similarity = cosine_similarity(original.body, result.rewritten_text);
  return verify_pair(original, std::move(result), gates);
}

corpus::Article materialize_rewritten(const corpus::Article& original,
                                      const RewriteResult& result) {
  if (!result.accepted) {
    throw std::invalid_argument("materialize_rewritten: result for " + result.original_id +
                                " was not accepted");
  }
  corpus::Article article;
  article.id = original.id + "-ai";
  article.source = original.source;
  article.published_at = original.published_at;
  article.title = original.title;
  article.body = result.rewritten_text;
  article.origin = corpus::OriginLabel::AiRewritten;
  return article;
}

// ---------------------------------------------------------------------------
// Mock client
// ---------------------------------------------------------------------------

const std::vector<std::pair<std::string, std::string>>& MockRewriteClient::builtin_synonyms() {
  // Editorial-flavoured Turkish substitutions. Replacement tokens stay out of
  // the demo-corpus word bank so synthetic rewrites carry a learnable trace.
  static const std::vector<std::pair<std::string, std::string>> table = {
      {"önemli", "mühim"},
      {"yeni", "yepyeni"},
      {"büyük", "devasa"},
      {"küçük", "ufak"},
      {"açıkladı", "bildirdi"},
      {"söyledi", "aktardı"},
      {"belirtti", "ifade_etti"},
      {"karar", "hüküm"},
      {"toplantı", "oturum"},
      {"şehir", "kent"},
      {"çalışma", "faaliyet"},
      {"destek", "katkı"},
      {"proje", "girişim"},
      {"artış", "yükseliş"},
      {"azalma", "düşüş"},
      {"konu", "mesele"},
      {"sorun", "problem"},
      {"hızlı", "süratli"},
      {"başlayacak", "start_alacak"},
      {"tamamlandı", "bitirildi"},
      {"hedef", "amaç"},
      {"bölge", "yöre"},
      {"vatandaş", "yurttaş"},
      {"etkinlik", "organizasyon"},
      {"sağlık", "tababet"},
      {"eğitim", "öğretim"},
      {"ekonomi", "iktisat"},
      {"güvenlik", "asayiş"},
      {"ulaşım", "nakliye"},
      {"yatırım", "plasman"},
      {"görüşme", "müzakere"},
      {"sonuç", "netice"},
      {"öneri", "teklif"},
      {"dönem", "devre"},
      {"gelişme", "ilerleme"},
      {"firma", "kuruluş"},
      {"denetim", "kontrol"},
      {"üretim", "imalat"},
      {"ihtiyaç", "gereksinim"},
      {"imkan", "olanak"},
  };
  return table;
}

MockRewriteClient::MockRewriteClient(Options options) : options_(std::move(options)) {
  if (options_.synonyms.empty()) options_.synonyms = builtin_synonyms();
}

std::map<std::string, std::string> MockRewriteClient::metadata() const {
  return {{"provider", "mock"}, {"model", "mock-synonym-v1"}};
}

namespace {

// Light punctuation normalization for raw (uncleaned) inputs: straight
// quotes, collapsed repeats of .!?
std::string normalize_mock_punctuation(const std::string& s) {
  const auto cps = text::utf8_decode(s);
  std::string out;
  out.reserve(s.size());
  char32_t prev = 0;
  for (char32_t cp : cps) {
    switch (cp) {
      case 0x2018: case 0x2019: cp = U'\''; break;
      case 0x201C: case 0x201D: case 0x201E: cp = U'"'; break;
      default: break;
    }
    if ((cp == U'.' || cp == U'!' || cp == U'?') && cp == prev) continue;
    text::utf8_append(out, cp);
    prev = cp;
  }
  return out;
}

}  // namespace

std::string MockRewriteClient::rewrite(const std::string& prompt, const std::string& article_body) {
  (void)prompt;
  // Seeded per body content, so outputs do not depend on call order.
  DeterministicRng rng(options_.seed ^ fnv1a64(article_body));

  const std::string normalized =
      text::normalize_whitespace(normalize_mock_punctuation(article_body));
  std::unordered_map<std::string, std::string> table(options_.synonyms.begin(),
                                                     options_.synonyms.end());
  std::string out;
  out.reserve(normalized.size());
  for (const auto& word : text::split_words(normalized)) {
    const auto hit = table.find(word);
    std::string replacement = word;
    if (hit != table.end() && rng.next_double() < options_.replace_probability) {
      replacement = hit->second;
    }
    if (!out.empty()) out.push_back(' ');
    out += replacement;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reporting and persistence
// ---------------------------------------------------------------------------

SynthesisSummary synthesis_report(const std::vector<RewriteResult>& results) {
  SynthesisSummary summary;
  summary.total = results.size();
  if (results.empty()) {
    summary.no_data = true;
    return summary;
  }
  double cosine_sum = 0.0;
  double ratio_sum = 0.0;
  std::size_t measured = 0;
  double min_cosine = 1.0;
  for (const auto& r : results) {
    if (r.accepted) ++summary.accepted;
    for (const auto& reason : r.rejection_reasons) ++summary.rejection_counts[reason];
    if (!r.rewritten_text.empty()) {
      ++measured;
      cosine_sum += r.cosine_similarity;
      ratio_sum += r.length_ratio;
      min_cosine = std::min(min_cosine, r.cosine_similarity);
      const double bucket = std::floor(r.length_ratio / 0.05) * 0.05;
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%.2f", bucket);
      ++summary.length_ratio_histogram[buf];
    }
  }
  summary.acceptance_rate =
      static_cast<double>(summary.accepted) / static_cast<double>(summary.total);
  if (measured > 0) {
    summary.mean_cosine = cosine_sum / static_cast<double>(measured);
    summary.mean_length_ratio = ratio_sum / static_cast<double>(measured);
    summary.min_cosine = min_cosine;
  }
  return summary;
}

std::string summary_to_json(const SynthesisSummary& summary) {
  json j;
  j["total"] = summary.total;
  j["accepted"] = summary.accepted;
  j["acceptance_rate"] = summary.acceptance_rate;
  j["mean_cosine"] = summary.mean_cosine;
  j["min_cosine"] = summary.min_cosine;
  j["mean_length_ratio"] = summary.mean_length_ratio;
  j["rejection_counts"] = summary.rejection_counts;
  j["length_ratio_histogram"] = summary.length_ratio_histogram;
  j["no_data"] = summary.no_data;
  return j.dump(2);
}

void write_results_jsonl(const std::string& path, const std::vector<RewriteResult>& results) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write: " + path);
  for (const auto& r : results) {
    json j;
    j["original_id"] = r.original_id;
    j["rewritten_text"] = r.rewritten_text;
    j["length_ratio"] = r.length_ratio;
    j["cosine_similarity"] = r.cosine_similarity;
    j["accepted"] = r.accepted;
    j["rejection_reasons"] = r.rejection_reasons;
    j["provider_metadata"] = r.provider_metadata;
    out << j.dump() << "\n";
  }
}

std::vector<RewriteResult> read_results_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::vector<RewriteResult> results;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    RewriteResult r;
    r.original_id = j.at("original_id").get<std::string>();
    r.rewritten_text = j.at("rewritten_text").get<std::string>();
    r.length_ratio = j.at("length_ratio").get<double>();
    r.cosine_similarity = j.at("cosine_similarity").get<double>();
    r.accepted = j.at("accepted").get<bool>();
    r.rejection_reasons = j.at("rejection_reasons").get<std::vector<std::string>>();
    r.provider_metadata = j.at("provider_metadata").get<std::map<std::string, std::string>>();
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace gazete::synthesis
