// Copyright (c) 2026, the gazete authors
// SPDX-License-Identifier: Apache-2.0

#include "gazete/datagen.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "gazete/rng.hpp"
#include "gazete/synthesis.hpp"

namespace gazete::datagen {

namespace {

// Fillers plus every source-side token of the mock rewriter's synonym table.
// Replacement tokens (muhim, kent, ...) are intentionally absent.
const std::vector<std::string>& word_bank() {
  static const std::vector<std::string> bank = {
      // function words, removed by the stopword pass
      "ve", "bir", "bu", "için", "ile", "da", "de", "olarak", "daha", "çok",
      "en", "gibi", "kadar", "sonra", "önce", "ama", "ancak", "her", "ya",
      // rewriter source vocabulary
      "önemli", "yeni", "büyük", "küçük", "açıkladı", "söyledi", "belirtti",
      "karar", "toplantı", "şehir", "çalışma", "destek", "proje", "artış",
      "azalma", "konu", "sorun", "hızlı", "başlayacak", "tamamlandı", "hedef",
      "bölge", "vatandaş", "etkinlik", "sağlık", "eğitim", "ekonomi",
      "güvenlik", "ulaşım", "yatırım", "görüşme", "sonuç", "öneri", "dönem",
      "gelişme", "firma", "denetim", "üretim", "ihtiyaç", "imkan",
      // neutral fillers
      "belediye", "bakanlık", "hükümet", "meclis", "komisyon", "rapor",
      "bütçe", "yasa", "madde", "oylama", "seçim", "aday", "parti", "grup",
      "başkan", "üye", "kurul", "müdürlük", "okul", "öğrenci", "öğretmen",
      "hastane", "doktor", "hasta", "ilaç", "aşı", "tedavi", "yol", "köprü",
      "otoyol", "tren", "havalimanı", "liman", "fabrika", "işçi", "sendika",
      "ücret", "fiyat", "enflasyon", "döviz", "altın", "borsa", "banka",
      "kredi", "konut", "kira", "tarım", "çiftçi", "hasat", "buğday",
      "fındık", "zeytin", "turizm", "otel", "müze", "festival", "konser",
      "sergi", "takım", "maç", "lig", "antrenör", "oyuncu", "sezon",
      "hakem", "stadyum", "deprem", "yangın", "sel", "kar", "yağış",
      "sıcaklık", "hava", "orman", "deniz", "göl", "nehir", "enerji",
      "elektrik", "doğalgaz", "petrol", "rüzgar", "güneş", "teknoloji",
      "yazılım", "internet", "veri", "araştırma", "üniversite", "bilim",
      "uzman", "akademisyen", "açılış", "tören", "ziyaret", "heyet",
      "anlaşma", "protokol", "imza", "ihale", "sözleşme", "personel",
      "atama", "soruşturma", "dava", "mahkeme", "savcılık", "karayolu",
      "kavşak", "metro", "otobüs", "bilet", "zam", "indirim", "kampanya",
  };
  return bank;
}

const std::vector<std::string>& title_bank() {
  static const std::vector<std::string> bank = {
      "açıklama", "karar", "toplantı", "ziyaret", "proje", "yatırım",
      "destek", "denetim", "açılış", "anlaşma", "rapor", "uyarı",
  };
  return bank;
}

std::string pick(const std::vector<std::string>& from, DeterministicRng& rng) {
  return from[static_cast<std::size_t>(rng.below(from.size()))];
}

std::string make_sentence(DeterministicRng& rng) {
  const int words = rng.uniform_int(8, 14);
  std::string sentence;
  for (int w = 0; w < words; ++w) {
    if (w > 0) sentence += ' ';
    sentence += pick(word_bank(), rng);
  }
  sentence += '.';
  return sentence;
}

std::string make_body(DeterministicRng& rng) {
  const int sentences = rng.uniform_int(6, 11);
  std::string body;
  for (int s = 0; s < sentences; ++s) {
    if (s > 0) body += ' ';
    body += make_sentence(rng);
  }
  return body;
}

std::string make_title(DeterministicRng& rng) {
  const int words = rng.uniform_int(4, 7);
  std::string title;
  for (int w = 0; w < words; ++w) {
    if (w > 0) title += ' ';
    title += w == 0 ? pick(title_bank(), rng) : pick(word_bank(), rng);
  }
  return title;
}

corpus::Date make_date(int year, DeterministicRng& rng) {
  corpus::Date d;
  d.year = year;
  d.month = rng.uniform_int(1, 12);
  d.day = rng.uniform_int(1, 28);
  return d;
}

// A slice of real-feed noise for the cleaning stage to chew on.
void decorate(corpus::Article& article, DeterministicRng& rng) {
  if (rng.next_double() < 0.20) article.body = "SON DAKİKA - " + article.body;
  if (rng.next_double() < 0.15) {
    article.body += rng.next_double() < 0.5 ? " (DHA)" : " (AA)";
  }
}

std::string zero_padded(int value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%0*d", width, value);
  return buf;
}

}  // namespace

std::vector<corpus::Article> generate_human_corpus(const HumanCorpusConfig& config) {
  if (config.articles < 1) throw std::invalid_argument("articles must be at least 1");
  if (config.sources.empty()) throw std::invalid_argument("at least one source is required");
  if (config.end_year < config.start_year) {
    throw std::invalid_argument("end_year must not precede start_year");
  }

  std::vector<corpus::Article> out;
  out.reserve(static_cast<std::size_t>(config.articles));
  for (int i = 0; i < config.articles; ++i) {
    auto rng = DeterministicRng::for_stream(config.seed, "human/" + std::to_string(i));
    corpus::Article article;
    article.id = "h-" + zero_padded(i, 5);
    article.source = config.sources[static_cast<std::size_t>(i) % config.sources.size()];
    article.published_at =
        make_date(rng.uniform_int(config.start_year, config.end_year), rng);
    article.title = make_title(rng);
    article.body = make_body(rng);
    decorate(article, rng);
    article.origin = corpus::OriginLabel::HumanWritten;
    out.push_back(std::move(article));
  }
  return out;
}

std::vector<corpus::Article> generate_external_corpus(const ExternalCorpusConfig& config) {
  if (config.per_source_per_year < 1) {
    throw std::invalid_argument("per_source_per_year must be at least 1");
  }
  if (!(config.ai_fraction >= 0.0 && config.ai_fraction <= 1.0)) {
    throw std::invalid_argument("ai_fraction must be in [0, 1]");
  }

  synthesis::MockRewriteClient::Options mock_options;
  mock_options.seed = config.rewriter_seed;
  synthesis::MockRewriteClient rewriter(mock_options);

  std::vector<corpus::Article> out;
  for (const int year : config.years) {
    for (const auto& source : config.sources) {
      const std::string cell = "external/" + std::to_string(year) + "/" + source;
      const int n = config.per_source_per_year;
      const int ai_count =
          static_cast<int>(std::llround(config.ai_fraction * static_cast<double>(n)));

      // Which positions in the cell get a rewritten body.
      std::vector<int> positions(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) positions[static_cast<std::size_t>(i)] = i;
      auto choose_rng = DeterministicRng::for_stream(config.seed, cell + "/choose");
      choose_rng.shuffle(positions);
      std::vector<bool> is_ai(static_cast<std::size_t>(n), false);
      for (int i = 0; i < ai_count; ++i) is_ai[static_cast<std::size_t>(positions[i])] = true;

      for (int i = 0; i < n; ++i) {
        auto rng = DeterministicRng::for_stream(config.seed, cell + "/" + std::to_string(i));
        corpus::Article article;
        article.id = "x-" + std::to_string(year) + "-" + source + "-" + zero_padded(i, 4);
        article.source = source;
        article.published_at = make_date(year, rng);
        article.title = make_title(rng);
        article.body = make_body(rng);
        if (is_ai[static_cast<std::size_t>(i)]) {
          article.body = rewriter.rewrite("", article.body);
        }
        decorate(article, rng);
        out.push_back(std::move(article));
      }
    }
  }
  return out;
}

}  // namespace gazete::datagen
