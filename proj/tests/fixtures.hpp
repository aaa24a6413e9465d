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

// Synthetic corpora with known structure, shared by trainer tests and the
// acceptance suite.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gmsg/rng.hpp"

namespace fixtures {

// Two disjoint topics plus shared filler words. Topic blocks keep their
// tokens contiguous so intra-topic co-occurrence dominates.
struct TwoTopicCorpus {
  std::vector<std::string> tokens;
  std::vector<std::string> topic_a = {"red", "green", "blue", "yellow"};
  std::vector<std::string> topic_b = {"cat", "dog", "bird", "fish"};
};

inline TwoTopicCorpus two_topic_corpus(std::size_t n_tokens, std::uint64_t seed) {
  TwoTopicCorpus corpus;
  corpus.tokens.reserve(n_tokens);
  gmsg::Rng rng(seed);
  while (corpus.tokens.size() < n_tokens) {
    const auto& topic = rng.uniform() < 0.5 ? corpus.topic_a : corpus.topic_b;
    for (int i = 0; i < 12 && corpus.tokens.size() < n_tokens; ++i) {
      corpus.tokens.push_back(topic[rng.uniform_index(topic.size())]);
    }
  }
  return corpus;
}

// An ambiguous token appears in two disjoint context vocabularies. Filler
// words are grouped into small single-topic clusters, so every filler is
// monosemous while the negative-sample geometry stays diverse. Every
// occurrence of the ambiguous token is flanked by enough topic tokens to
// fill a window of 5.
struct PolysemyCorpus {
  std::vector<std::string> tokens;
  std::string ambiguous = "bank";
  std::vector<std::string> topic_river = {"river", "water", "shore"};
  std::vector<std::string> topic_money = {"money", "loan", "credit"};
  std::vector<std::string> fillers;                    // monosemous controls
  std::vector<std::vector<std::string>> filler_topics;  // 4 fillers per topic
};

inline PolysemyCorpus polysemy_corpus(std::size_t n_tokens, std::uint64_t seed,
                                      std::size_t n_fillers = 40) {
  PolysemyCorpus corpus;
  corpus.fillers.reserve(n_fillers);
  for (std::size_t i = 0; i < n_fillers; ++i) {
    corpus.fillers.push_back("filler" + std::to_string(i));
    if (i % 4 == 0) corpus.filler_topics.emplace_back();
    corpus.filler_topics.back().push_back(corpus.fillers.back());
  }

  gmsg::Rng rng(seed);
  corpus.tokens.reserve(n_tokens);
  bool river_turn = true;  // alternate so both senses get equal halves
  while (corpus.tokens.size() < n_tokens) {
    const double pick = rng.uniform();
    if (pick < 0.6) {
      // Filler block: 12 tokens drawn from one filler cluster.
      const auto& cluster =
          corpus.filler_topics[rng.uniform_index(corpus.filler_topics.size())];
      for (int i = 0; i < 12 && corpus.tokens.size() < n_tokens; ++i) {
        corpus.tokens.push_back(cluster[rng.uniform_index(cluster.size())]);
      }
    } else {
      const auto& topic = river_turn ? corpus.topic_river : corpus.topic_money;
      river_turn = !river_turn;
      // 6 topic tokens, the ambiguous token, 6 more topic tokens.
      for (int i = 0; i < 6 && corpus.tokens.size() < n_tokens; ++i) {
        corpus.tokens.push_back(topic[rng.uniform_index(topic.size())]);
      }
      if (corpus.tokens.size() < n_tokens) corpus.tokens.push_back(corpus.ambiguous);
      for (int i = 0; i < 6 && corpus.tokens.size() < n_tokens; ++i) {
        corpus.tokens.push_back(topic[rng.uniform_index(topic.size())]);
      }
    }
  }
  return corpus;
}

inline std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

}  // namespace fixtures
