// Copyright (c) 2026, the gazete authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gazete/corpus.hpp"

namespace gazete::datagen {

// Deterministic demo corpus: synthetic Turkish-flavoured news bodies built
// from a fixed word bank. The bank deliberately contains the mock rewriter's
// source-side vocabulary and none of its replacement tokens, so rewritten
// counterparts stay detectable at desk scale.

struct HumanCorpusConfig {
  std::uint64_t seed = 7;
  int articles = 400;
  std::vector<std::string> sources = {"central", "pro_government", "pro_opposition"};
  int start_year = 2021;
  int end_year = 2022;
};

// Labeled human pool; every article carries origin=human.
std::vector<corpus::Article> generate_human_corpus(const HumanCorpusConfig& config);

struct ExternalCorpusConfig {
  std::uint64_t seed = 11;
  std::vector<std::string> sources = {"central", "pro_government", "pro_opposition"};
  std::vector<int> years = {2023, 2024, 2025, 2026};
  int per_source_per_year = 100;
  // Fraction of each (source, year) cell regenerated through the mock
  // rewriter; these are the "in the wild" machine-revised items.
  double ai_fraction = 0.03;
  std::uint64_t rewriter_seed = 42;
};

// Unlabeled multi-year corpus (origin left unset); returns one list, grouped
// by year in ascending order.
std::vector<corpus::Article> generate_external_corpus(const ExternalCorpusConfig& config);

}  // namespace gazete::datagen
