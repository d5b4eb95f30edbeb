// Copyright (c) 2026, the gazete authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gazete/corpus.hpp"
#include "gazete/datagen.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"gazete-datagen: deterministic demo corpora for the gazete pipeline"};

  std::string out_dir = "data";
  std::uint64_t seed = 7;
  int human_articles = 400;
  int per_source_per_year = 100;
  double ai_fraction = 0.03;

  app.add_option("--out", out_dir, "output directory (created if missing)");
  app.add_option("--seed", seed, "generator seed");
  app.add_option("--human", human_articles, "number of labeled human articles");
  app.add_option("--per-cell", per_source_per_year,
                 "external articles per source per year (2023-2026)");
  app.add_option("--ai-fraction", ai_fraction,
                 "fraction of each external cell rewritten by the mock provider");

  CLI11_PARSE(app, argc, argv);

  try {
    fs::create_directories(out_dir);

    gazete::datagen::HumanCorpusConfig human_config;
    human_config.seed = seed;
    human_config.articles = human_articles;
    const auto human = gazete::datagen::generate_human_corpus(human_config);
    gazete::corpus::write_articles_jsonl((fs::path(out_dir) / "raw_human.jsonl").string(), human);
    std::cout << "wrote " << human.size() << " human articles\n";

    gazete::datagen::ExternalCorpusConfig external_config;
    external_config.seed = seed + 1;
    external_config.per_source_per_year = per_source_per_year;
    external_config.ai_fraction = ai_fraction;
    const auto external = gazete::datagen::generate_external_corpus(external_config);
    for (const int year : external_config.years) {
      std::vector<gazete::corpus::Article> slice;
      for (const auto& article : external) {
        if (article.year() == year) slice.push_back(article);
      }
      const auto path = fs::path(out_dir) / ("external_" + std::to_string(year) + ".jsonl");
      gazete::corpus::write_articles_jsonl(path.string(), slice);
      std::cout << "wrote " << slice.size() << " articles to " << path.string() << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
