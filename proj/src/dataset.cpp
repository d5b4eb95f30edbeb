// Copyright (c) 2026, the gazete authors
// SPDX-License-Identifier: Apache-2.0

#include "gazete/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "gazete/hash.hpp"
#include "gazete/rng.hpp"
#include "gazete/text.hpp"

namespace gazete::dataset {

using json = nlohmann::json;

int label_index(corpus::OriginLabel label) {
  return label == corpus::OriginLabel::HumanWritten ? kHumanIndex : kAiIndex;
}

corpus::OriginLabel label_from_index(int index) {
  if (index == kHumanIndex) return corpus::OriginLabel::HumanWritten;
  if (index == kAiIndex) return corpus::OriginLabel::AiRewritten;
  throw std::invalid_argument("label index out of range: " + std::to_string(index));
}

std::vector<LabeledExample> make_examples(const std::vector<corpus::Article>& human,
                                          const std::vector<corpus::Article>& rewritten) {
  std::vector<LabeledExample> examples;
  examples.reserve(human.size() + rewritten.size());
  std::unordered_set<std::string> seen;

  const auto add = [&](const corpus::Article& a, corpus::OriginLabel expected) {
    if (!a.origin) throw std::invalid_argument("article without origin label: " + a.id);
    if (*a.origin != expected) {
      throw std::invalid_argument("article " + a.id + " has origin " + to_string(*a.origin) +
                                  ", expected " + to_string(expected));
    }
    if (!seen.insert(a.id).second) {
      throw std::invalid_argument("duplicate example id: " + a.id);
    }
    examples.push_back({a.id, a.body, *a.origin, a.source, a.year()});
  };

  for (const auto& a : human) add(a, corpus::OriginLabel::HumanWritten);
  for (const auto& a : rewritten) add(a, corpus::OriginLabel::AiRewritten);

  std::sort(examples.begin(), examples.end(),
            [](const LabeledExample& a, const LabeledExample& b) { return a.id < b.id; });
  return examples;
}

namespace {

// Largest-remainder apportionment of total into parts proportional to
// weights; ties go to the lower index.
std::vector<std::size_t> largest_remainder(std::size_t total, const std::vector<double>& weights) {
  const std::size_t k = weights.size();
  std::vector<std::size_t> out(k, 0);
  std::vector<double> fraction(k, 0.0);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double quota = static_cast<double>(total) * weights[i];
    out[i] = static_cast<std::size_t>(std::floor(quota + 1e-9));
    fraction[i] = quota - static_cast<double>(out[i]);
    assigned += out[i];
  }
  std::vector<std::size_t> order(k);
  for (std::size_t i = 0; i < k; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return fraction[a] > fraction[b]; });
  for (std::size_t i = 0; assigned < total; ++i) {
    ++out[order[i % k]];
    ++assigned;
  }
  return out;
}

}  // namespace

SplitBundle stratified_split(const std::vector<LabeledExample>& examples,
                             const std::array<double, 3>& ratios, std::uint64_t seed) {
  double ratio_sum = 0.0;
  for (const double r : ratios) {
    if (r < 0.0) throw std::invalid_argument("stratified_split: negative ratio");
    ratio_sum += r;
  }
  if (std::abs(ratio_sum - 1.0) > 1e-9) {
    throw std::invalid_argument("stratified_split: ratios must sum to 1");
  }
  if (examples.empty()) throw std::invalid_argument("stratified_split: no examples");

  // Group per class, preserving a deterministic base order by id.
  std::vector<LabeledExample> sorted = examples;
  std::sort(sorted.begin(), sorted.end(),
            [](const LabeledExample& a, const LabeledExample& b) { return a.id < b.id; });
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    by_class[static_cast<std::size_t>(label_index(sorted[i].label))].push_back(i);
  }
  constexpr std::size_t kSplits = 3;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    if (!by_class[c].empty() && by_class[c].size() < kSplits) {
      throw std::invalid_argument("stratified_split: class " +
                                  to_string(label_from_index(static_cast<int>(c))) + " has " +
                                  std::to_string(by_class[c].size()) + " examples, need at least " +
                                  std::to_string(kSplits));
    }
  }
  if (by_class[0].empty() && by_class[1].empty()) {
    throw std::invalid_argument("stratified_split: no examples");
  }

  const std::size_t n = sorted.size();
  const auto targets = largest_remainder(n, {ratios[0], ratios[1], ratios[2]});

  // Per-class quotas in exact integer arithmetic: q = n_c * T_s / n.
  struct Cell {
    std::size_t base;
    std::size_t frac_num;  // numerator of the fractional part, over n
  };
  std::array<std::array<Cell, kSplits>, 2> cells{};
  std::array<std::size_t, 2> row_left{};
  std::array<std::size_t, kSplits> col_left{};
  for (std::size_t s = 0; s < kSplits; ++s) col_left[s] = targets[s];
  for (std::size_t c = 0; c < 2; ++c) {
    const std::size_t nc = by_class[c].size();
    std::size_t base_sum = 0;
    for (std::size_t s = 0; s < kSplits; ++s) {
      const std::size_t num = nc * targets[s];
      cells[c][s] = {num / n, num % n};
      base_sum += cells[c][s].base;
      col_left[s] -= std::min(col_left[s], cells[c][s].base);
    }
    row_left[c] = nc - base_sum;
  }

  // Distribute leftovers by descending fractional part subject to the column
  // targets; a final pass fills any remaining capacity (allocation still
  // stays within floor/ceil of the quota).
  struct Candidate {
    std::size_t frac_num, c, s;
  };
  std::vector<Candidate> candidates;
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t s = 0; s < kSplits; ++s) {
      candidates.push_back({cells[c][s].frac_num, c, s});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.frac_num > b.frac_num; });
  std::array<std::array<std::size_t, kSplits>, 2> alloc{};
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t s = 0; s < kSplits; ++s) alloc[c][s] = cells[c][s].base;
  }
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& cand : candidates) {
      if (row_left[cand.c] == 0 || col_left[cand.s] == 0) continue;
      if (pass == 0 && cand.frac_num == 0) continue;
      ++alloc[cand.c][cand.s];
      --row_left[cand.c];
      --col_left[cand.s];
    }
  }

  // Shuffle within each class, then deal out the allocated counts.
  SplitBundle bundle;
  bundle.ratios = ratios;
  bundle.seed = seed;
  for (std::size_t c = 0; c < 2; ++c) {
    auto rng = DeterministicRng::for_stream(seed, "split/class/" + std::to_string(c));
    auto& indices = by_class[c];
    rng.shuffle(indices);
    std::size_t cursor = 0;
    std::vector<LabeledExample>* outs[kSplits] = {&bundle.train, &bundle.validation, &bundle.test};
    for (std::size_t s = 0; s < kSplits; ++s) {
      for (std::size_t i = 0; i < alloc[c][s]; ++i) {
        outs[s]->push_back(sorted[indices[cursor++]]);
      }
    }
  }
  const auto by_id = [](const LabeledExample& a, const LabeledExample& b) { return a.id < b.id; };
  std::sort(bundle.train.begin(), bundle.train.end(), by_id);
  std::sort(bundle.validation.begin(), bundle.validation.end(), by_id);
  std::sort(bundle.test.begin(), bundle.test.end(), by_id);
  return bundle;
}

void write_manifest(const std::string& path, const std::vector<LabeledExample>& split) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest: " + path);
  std::vector<const LabeledExample*> rows;
  rows.reserve(split.size());
  for (const auto& e : split) rows.push_back(&e);
  std::sort(rows.begin(), rows.end(),
            [](const LabeledExample* a, const LabeledExample* b) { return a->id < b->id; });
  for (const auto* e : rows) {
    json j;
    j["id"] = e->id;
    j["label"] = to_string(e->label);
    j["source"] = e->source;
    j["year"] = e->year;
    out << j.dump() << "\n";
  }
}

std::vector<ManifestRow> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path);
  std::vector<ManifestRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    rows.push_back({j.at("id").get<std::string>(),
                    corpus::origin_from_string(j.at("label").get<std::string>()),
                    j.at("source").get<std::string>(), j.at("year").get<int>()});
  }
  return rows;
}

void write_examples_jsonl(const std::string& path, const std::vector<LabeledExample>& examples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write examples file: " + path);
  for (const auto& e : examples) {
    json j;
    j["id"] = e.id;
    j["text"] = e.text;
    j["label"] = to_string(e.label);
    j["source"] = e.source;
    j["year"] = e.year;
    out << j.dump() << "\n";
  }
}

std::vector<LabeledExample> read_examples_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open examples file: " + path);
  std::vector<LabeledExample> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    LabeledExample e;
    e.id = j.at("id").get<std::string>();
    e.text = j.at("text").get<std::string>();
    e.label = corpus::origin_from_string(j.at("label").get<std::string>());
    e.source = j.at("source").get<std::string>();
    e.year = j.at("year").get<int>();
    out.push_back(std::move(e));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tokenizers
// ---------------------------------------------------------------------------

HashedWordTokenizer::HashedWordTokenizer(std::int32_t buckets) : buckets_(buckets) {
  if (buckets <= 0) throw std::invalid_argument("HashedWordTokenizer: buckets must be positive");
}

std::vector<std::int32_t> HashedWordTokenizer::tokenize(const std::string& text_in) const {
  std::vector<std::int32_t> ids;
  for (const auto& word : text::split_words(text::normalize_whitespace(text_in))) {
    ids.push_back(kSpecialTokens +
                  static_cast<std::int32_t>(fnv1a64(word) % static_cast<std::uint64_t>(buckets_)));
  }
  return ids;
}

struct WordPieceTokenizer::Impl {
  std::unordered_map<std::string, std::int32_t> vocab;
  std::int32_t size = 0;
};

WordPieceTokenizer::WordPieceTokenizer(const std::string& vocab_path) {
  std::ifstream in(vocab_path);
  if (!in) throw std::runtime_error("cannot open vocabulary: " + vocab_path);
  auto impl = std::make_shared<Impl>();
  std::string line;
  std::int32_t index = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    impl->vocab.emplace(line, index++);
  }
  impl->size = index;
  for (const char* required : {"[PAD]", "[UNK]", "[CLS]", "[SEP]"}) {
    if (!impl->vocab.count(required)) {
      throw std::runtime_error("vocabulary " + vocab_path + " is missing " + required);
    }
  }
  impl_ = std::move(impl);
}

std::int32_t WordPieceTokenizer::vocab_size() const { return impl_->size; }

std::int32_t WordPieceTokenizer::pad_id() const { return impl_->vocab.at("[PAD]"); }
std::int32_t WordPieceTokenizer::cls_id() const { return impl_->vocab.at("[CLS]"); }
std::int32_t WordPieceTokenizer::sep_id() const { return impl_->vocab.at("[SEP]"); }

std::int32_t WordPieceTokenizer::id_of(const std::string& token) const {
  const auto it = impl_->vocab.find(token);
  return it == impl_->vocab.end() ? -1 : it->second;
}

std::vector<std::int32_t> WordPieceTokenizer::tokenize(const std::string& text_in) const {
  constexpr std::size_t kMaxWordChars = 100;
  const std::int32_t unk = impl_->vocab.at("[UNK]");
  std::vector<std::int32_t> ids;
  for (const auto& word : text::split_words(text::normalize_whitespace(text_in))) {
    if (word.size() > kMaxWordChars) {
      ids.push_back(unk);
      continue;
    }
    // Greedy longest-prefix match; continuations carry the "##" marker.
    std::vector<std::int32_t> pieces;
    std::size_t start = 0;
    bool ok = true;
    while (start < word.size()) {
      std::size_t end = word.size();
      std::int32_t match = -1;
      while (end > start) {
        std::string piece = word.substr(start, end - start);
        if (start > 0) piece = "##" + piece;
        const auto it = impl_->vocab.find(piece);
        if (it != impl_->vocab.end()) {
          match = it->second;
          break;
        }
        --end;
      }
      if (match < 0) {
        ok = false;
        break;
      }
      pieces.push_back(match);
      start = end;
    }
    if (ok) {
      ids.insert(ids.end(), pieces.begin(), pieces.end());
    } else {
      ids.push_back(unk);
    }
  }
  return ids;
}

EncodedExample encode(const LabeledExample& example, const TokenizationSpec& spec,
                      const Tokenizer& tokenizer) {
  if (spec.max_length < 3) throw std::invalid_argument("encode: max_length too small");
  EncodedExample out;
  out.label = label_index(example.label);
  out.ids.assign(static_cast<std::size_t>(spec.max_length), tokenizer.pad_id());
  out.mask.assign(static_cast<std::size_t>(spec.max_length), 0);

  auto content = tokenizer.tokenize(example.text);
  const std::size_t budget = static_cast<std::size_t>(spec.max_length) - 2;
  if (content.size() > budget) content.resize(budget);

  std::size_t pos = 0;
  out.ids[pos] = tokenizer.cls_id();
  out.mask[pos++] = 1;
  for (const std::int32_t id : content) {
    out.ids[pos] = id;
    out.mask[pos++] = 1;
  }
  out.ids[pos] = tokenizer.sep_id();
  out.mask[pos++] = 1;
  return out;
}

}  // namespace gazete::dataset
