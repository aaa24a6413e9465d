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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gmsg/rng.hpp"

namespace gmsg {

using WordId = std::int32_t;
inline constexpr WordId kOovId = -1;

// Token <-> dense id map with corpus counts. Ids run 0..|V|-1 in order of
// descending count, ties broken by first occurrence in the stream, so a
// given token sequence always yields the same vocabulary.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> tokens, std::vector<std::uint64_t> counts);

  // kOovId when the token is not in the vocabulary.
  WordId id_of(std::string_view token) const {
    auto it = ids_.find(token);
    return it == ids_.end() ? kOovId : it->second;
  }

  const std::string& token(WordId id) const { return tokens_[static_cast<std::size_t>(id)]; }
  std::uint64_t count(WordId id) const { return counts_[static_cast<std::size_t>(id)]; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  std::size_t size() const { return tokens_.size(); }
  std::uint64_t total_count() const { return total_count_; }

  // Debug dump: one `token \t count` line per id, in id order.
  void dump_tsv(std::ostream& out) const;

 private:
  struct TokenHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::vector<std::string> tokens_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, WordId, TokenHash, std::equal_to<>> ids_;
  std::uint64_t total_count_ = 0;
};

// Incremental token counter; finish() assigns ids and applies min_count.
class VocabularyBuilder {
 public:
  void add(std::string_view token);

  // Throws FormatError when nothing survives min_count (or the stream was
  // empty). min_count >= 1.
  Vocabulary finish(std::uint64_t min_count) const;

 private:
  struct Entry {
    std::uint64_t count = 0;
    std::uint64_t first_seen = 0;
  };
  std::unordered_map<std::string, Entry> entries_;
  std::uint64_t next_index_ = 0;
};

// Splits on ASCII whitespace. ASCII letters are lowercased when requested;
// multi-byte UTF-8 sequences pass through untouched.
std::vector<std::string> tokenize(std::string_view text, bool lowercase = true);

Vocabulary build_vocabulary(std::span<const std::string> tokens, std::uint64_t min_count);
Vocabulary build_vocabulary_from_file(const std::string& path, std::uint64_t min_count,
                                      bool lowercase);

// Maps a corpus file to in-vocabulary ids; out-of-vocabulary tokens are
// dropped so they never occupy window slots.
std::vector<WordId> load_corpus_ids(const std::string& path, const Vocabulary& vocab,
                                    bool lowercase);

// Draws word ids with mass proportional to count^sr (cumulative-mass binary
// search). Immutable after construction; safe to share across workers.
class NegativeSampler {
 public:
  NegativeSampler(const Vocabulary& vocab, double sr);

  WordId sample(Rng& rng) const;

  // Probability mass assigned to one id.
  double probability(WordId id) const;

  struct Draw {
    std::vector<WordId> ids;
    bool exclusion_failed = false;  // some returned id equals `exclude`
  };

  // `count` i.i.d. draws; draws equal to `exclude` are redrawn, giving up
  // after 100 attempts. Pass kOovId to disable exclusion.
  Draw sample_excluding(std::size_t count, WordId exclude, Rng& rng) const;
  void sample_excluding(std::size_t count, WordId exclude, Rng& rng, Draw& out) const;

  const std::vector<double>& cumulative() const { return cumulative_; }
  double sr() const { return sr_; }

 private:
  std::vector<double> cumulative_;
  double sr_ = 0.0;
};

struct TrainingExample {
  WordId center = kOovId;
  std::vector<WordId> context;  // never includes the center position; non-empty
};

// Emits (center, window) examples over an id sequence. The half-width n_w is
// re-drawn uniformly from {1..N} at every position; examples whose window
// comes out empty are dropped. kOovId entries in the input are skipped up
// front and do not occupy window slots.
class ExampleStream {
 public:
  ExampleStream(std::span<const WordId> ids, int window, Rng rng);

  std::optional<TrainingExample> next();
  bool next(TrainingExample& out);  // reuses out.context storage

 private:
  std::vector<WordId> filtered_;  // only populated when the input held OOV ids
  std::span<const WordId> ids_;
  int window_ = 1;
  Rng rng_;
  std::size_t pos_ = 0;
};

}  // namespace gmsg
