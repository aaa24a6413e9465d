/*
 * Copyright 2026 gmsg authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "gmsg/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "gmsg/errors.hpp"

namespace gmsg {

namespace {

void lowercase_ascii(std::string& s) {
  for (char& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> tokens, std::vector<std::uint64_t> counts)
    : tokens_(std::move(tokens)), counts_(std::move(counts)) {
  if (tokens_.size() != counts_.size()) {
    throw std::invalid_argument("vocabulary tokens/counts size mismatch");
  }
  ids_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    ids_.emplace(tokens_[i], static_cast<WordId>(i));
    total_count_ += counts_[i];
  }
  if (ids_.size() != tokens_.size()) {
    throw std::invalid_argument("vocabulary holds duplicate tokens");
  }
}

void Vocabulary::dump_tsv(std::ostream& out) const {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    out << tokens_[i] << '\t' << counts_[i] << '\n';
  }
}

void VocabularyBuilder::add(std::string_view token) {
  auto [it, inserted] = entries_.try_emplace(std::string(token));
  if (inserted) it->second.first_seen = next_index_++;
  it->second.count++;
}

Vocabulary VocabularyBuilder::finish(std::uint64_t min_count) const {
  if (min_count < 1) throw UsageError("min_count must be >= 1");

  struct Retained {
    const std::string* token;
    std::uint64_t count;
    std::uint64_t first_seen;
  };
  std::vector<Retained> retained;
  retained.reserve(entries_.size());
  for (const auto& [token, entry] : entries_) {
    if (entry.count >= min_count) retained.push_back({&token, entry.count, entry.first_seen});
  }
  if (retained.empty()) {
    throw FormatError("empty vocabulary: no token reached min_count=" +
                      std::to_string(min_count));
  }
  std::sort(retained.begin(), retained.end(), [](const Retained& a, const Retained& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.first_seen < b.first_seen;
  });

  std::vector<std::string> tokens;
  std::vector<std::uint64_t> counts;
  tokens.reserve(retained.size());
  counts.reserve(retained.size());
  for (const Retained& r : retained) {
    tokens.push_back(*r.token);
    counts.push_back(r.count);
  }
  return Vocabulary(std::move(tokens), std::move(counts));
}

std::vector<std::string> tokenize(std::string_view text, bool lowercase) {
  std::vector<std::string> out;
  std::size_t i = 0;
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
  };
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) {
      std::string token(text.substr(start, i - start));
      if (lowercase) lowercase_ascii(token);
      out.push_back(std::move(token));
    }
  }
  return out;
}

Vocabulary build_vocabulary(std::span<const std::string> tokens, std::uint64_t min_count) {
  VocabularyBuilder builder;
  for (const std::string& t : tokens) builder.add(t);
  return builder.finish(min_count);
}

Vocabulary build_vocabulary_from_file(const std::string& path, std::uint64_t min_count,
                                      bool lowercase) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file: " + path);
  VocabularyBuilder builder;
  std::string token;
  while (in >> token) {
    if (lowercase) lowercase_ascii(token);
    builder.add(token);
  }
  return builder.finish(min_count);
}

std::vector<WordId> load_corpus_ids(const std::string& path, const Vocabulary& vocab,
                                    bool lowercase) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file: " + path);
  std::vector<WordId> ids;
  ids.reserve(vocab.total_count());
  std::string token;
  while (in >> token) {
    if (lowercase) lowercase_ascii(token);
    const WordId id = vocab.id_of(token);
    if (id != kOovId) ids.push_back(id);
  }
  return ids;
}

NegativeSampler::NegativeSampler(const Vocabulary& vocab, double sr) : sr_(sr) {
  if (!(sr > 0.0)) throw UsageError("negative-sampling exponent sr must be > 0");
  if (vocab.size() == 0) throw UsageError("cannot build a sampler over an empty vocabulary");

  cumulative_.resize(vocab.size());
  double total = 0.0;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    total += std::pow(static_cast<double>(vocab.counts()[i]), sr);
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    acc += std::pow(static_cast<double>(vocab.counts()[i]), sr);
    cumulative_[i] = acc / total;
  }
  cumulative_.back() = 1.0;
}

WordId NegativeSampler::sample(Rng& rng) const {
  const double u = rng.uniform();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const std::size_t idx = std::min<std::size_t>(
      static_cast<std::size_t>(it - cumulative_.begin()), cumulative_.size() - 1);
  return static_cast<WordId>(idx);
}

double NegativeSampler::probability(WordId id) const {
  const auto i = static_cast<std::size_t>(id);
  return i == 0 ? cumulative_[0] : cumulative_[i] - cumulative_[i - 1];
}

NegativeSampler::Draw NegativeSampler::sample_excluding(std::size_t count, WordId exclude,
                                                        Rng& rng) const {
  Draw out;
  sample_excluding(count, exclude, rng, out);
  return out;
}

void NegativeSampler::sample_excluding(std::size_t count, WordId exclude, Rng& rng,
                                       Draw& out) const {
  out.ids.clear();
  out.exclusion_failed = false;
  if (cumulative_.size() == 1 && exclude == 0) {
    // Nothing else to draw; hand back the sole id and flag it.
    out.ids.assign(count, 0);
    out.exclusion_failed = true;
    return;
  }
  for (std::size_t i = 0; i < count; ++i) {
    WordId id = sample(rng);
    for (int attempt = 0; id == exclude && attempt < 100; ++attempt) {
      id = sample(rng);
    }
    if (id == exclude) out.exclusion_failed = true;
    out.ids.push_back(id);
  }
}

ExampleStream::ExampleStream(std::span<const WordId> ids, int window, Rng rng)
    : ids_(ids), window_(window), rng_(rng) {
  if (window < 1) throw UsageError("window must be >= 1");
  if (std::find(ids.begin(), ids.end(), kOovId) != ids.end()) {
    filtered_.reserve(ids.size());
    for (const WordId id : ids) {
      if (id != kOovId) filtered_.push_back(id);
    }
    ids_ = filtered_;
  }
}

bool ExampleStream::next(TrainingExample& out) {
  const std::size_t n = ids_.size();
  while (pos_ < n) {
    const std::size_t t = pos_++;
    const auto n_w = static_cast<std::size_t>(rng_.uniform_int(1, window_));
    const std::size_t lo = t >= n_w ? t - n_w : 0;
    const std::size_t hi = std::min(n, t + n_w + 1);
    if (hi - lo <= 1) continue;  // no context at all
    out.center = ids_[t];
    out.context.clear();
    for (std::size_t i = lo; i < hi; ++i) {
      if (i != t) out.context.push_back(ids_[i]);
    }
    return true;
  }
  return false;
}

std::optional<TrainingExample> ExampleStream::next() {
  TrainingExample ex;
  if (next(ex)) return ex;
  return std::nullopt;
}

}  // namespace gmsg
