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

#include <span>
#include <string>
#include <vector>

#include "gmsg/corpus.hpp"
#include "gmsg/model.hpp"

namespace gmsg {

struct ScoredPair {
  std::string word1, word2;
  double gold = 0.0;
  // SCWS-style sentential contexts; empty for plain pair datasets. target*
  // indexes the marked occurrence inside the token list.
  std::vector<std::string> context1, context2;
  std::size_t target1 = 0, target2 = 0;
  bool has_context = false;
};

struct EvalDataset {
  std::vector<ScoredPair> pairs;
  bool has_contexts = false;
};

// Plain format:      word1 \t word2 \t score
// Contextual format: word1 \t word2 \t score \t context1 \t context2,
// where each context is a space-tokenized sentence with literal <b> </b>
// markers around the target occurrence. Lines starting with '#' and blank
// lines are skipped; the column count must be uniform.
EvalDataset load_pair_dataset(const std::string& path, bool lowercase);

enum class SimilarityRule { AvgSim, MaxSimC };

struct EvalResult {
  double rho_x100 = 0.0;
  std::size_t covered_pairs = 0;
  std::size_t skipped_pairs = 0;
};

// Context-free similarity: the full word-space mixture kernel, log domain
// (rank-equivalent to the linear-domain double sum).
double avg_sim(const ModelParams& params, WordId w1, WordId w2);

// P(i | w, c(w)): posterior over the senses of w given the context words,
//   P(i) = phi_wi sum_c sim(f_wi, f_c) / sum_j phi_wj sum_c sim(f_wj, f_c),
// with sim the component-vs-mixture kernel over word-space representations,
// evaluated by log-sum-exp. An empty context returns the prior phi_w.
std::vector<double> sense_posterior(const ModelParams& params, WordId w,
                                    std::span<const WordId> context);

// Contextual similarity: log pair similarity of the most probable sense of
// each word under its own context (argmax ties pick the lowest index).
double max_sim_c(const ModelParams& params, WordId w1, std::span<const WordId> context1,
                 WordId w2, std::span<const WordId> context2);

// Spearman rank correlation with average ranks on ties, in [-1, 1].
// Throws std::domain_error when either side has zero rank variance.
double spearman(std::span<const double> golds, std::span<const double> preds);

// Scores every pair whose words are both in the vocabulary and reports
// Spearman rho x 100 plus coverage. Contexts are truncated to at most
// `context_window` in-vocabulary tokens on each side of the marked target.
// MaxSimC on a context-free dataset throws UsageError; fewer than two
// covered pairs throws FormatError.
EvalResult evaluate(const ModelParams& params, const Vocabulary& vocab,
                    const EvalDataset& dataset, SimilarityRule rule,
                    int context_window = 5);

// Helper shared with the CLI: in-vocabulary ids of the tokens within
// `window` positions of the target (target itself excluded).
std::vector<WordId> context_window_ids(const Vocabulary& vocab,
                                       std::span<const std::string> tokens,
                                       std::size_t target, int window);

}  // namespace gmsg
