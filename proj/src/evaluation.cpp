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

#include "gmsg/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "gmsg/errors.hpp"
#include "gmsg/gmath.hpp"

namespace gmsg {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

double parse_score(const std::string& s, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FormatError("bad score '" + s + "' on line " + std::to_string(line_no));
  }
}

void lowercase_word(std::string& s) {
  for (char& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
}

// Pulls the <b> ... </b> marked target out of a space-tokenized sentence.
void parse_context(const std::string& field, bool lowercase, std::size_t line_no,
                   std::vector<std::string>& tokens_out, std::size_t& target_out) {
  std::vector<std::string> raw = tokenize(field, /*lowercase=*/false);
  std::vector<std::string> tokens;
  tokens.reserve(raw.size());
  std::size_t target = std::numeric_limits<std::size_t>::max();
  bool inside = false;
  for (std::string& tok : raw) {
    if (tok == "<b>") {
      inside = true;
      continue;
    }
    if (tok == "</b>") {
      inside = false;
      continue;
    }
    if (inside && target == std::numeric_limits<std::size_t>::max()) {
      target = tokens.size();
    }
    if (lowercase) lowercase_word(tok);
    tokens.push_back(std::move(tok));
  }
  if (target == std::numeric_limits<std::size_t>::max()) {
    throw FormatError("context without <b>...</b> marker on line " + std::to_string(line_no));
  }
  tokens_out = std::move(tokens);
  target_out = target;
}

}  // namespace

EvalDataset load_pair_dataset(const std::string& path, bool lowercase) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file: " + path);

  EvalDataset dataset;
  std::string line;
  std::size_t line_no = 0;
  int column_count = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;

    const std::vector<std::string> fields = split_tabs(line);
    if (fields.size() != 3 && fields.size() != 5) {
      throw FormatError("expected 3 or 5 tab-separated columns on line " +
                        std::to_string(line_no));
    }
    if (column_count == 0) {
      column_count = static_cast<int>(fields.size());
      dataset.has_contexts = column_count == 5;
    } else if (column_count != static_cast<int>(fields.size())) {
      throw FormatError("inconsistent column count on line " + std::to_string(line_no));
    }

    ScoredPair pair;
    pair.word1 = fields[0];
    pair.word2 = fields[1];
    if (lowercase) {
      lowercase_word(pair.word1);
      lowercase_word(pair.word2);
    }
    pair.gold = parse_score(fields[2], line_no);
    if (fields.size() == 5) {
      pair.has_context = true;
      parse_context(fields[3], lowercase, line_no, pair.context1, pair.target1);
      parse_context(fields[4], lowercase, line_no, pair.context2, pair.target2);
    }
    dataset.pairs.push_back(std::move(pair));
  }
  if (dataset.pairs.empty()) throw FormatError("dataset has no scored pairs: " + path);
  return dataset;
}

double avg_sim(const ModelParams& params, WordId w1, WordId w2) {
  MixtureSimilarity sim;
  log_mixture_similarity(params.word(w1), params.word(w2), sim);
  return sim.log_value;
}

std::vector<double> sense_posterior(const ModelParams& params, WordId w,
                                    std::span<const WordId> context) {
  const MixtureView fw = params.word(w);
  const std::size_t k = fw.components();
  if (context.empty()) {
    return std::vector<double>(fw.weights.begin(), fw.weights.end());
  }

  // log [ phi_wi sum_c sim(f_wi, f_c) ] per sense, then a softmax.
  std::vector<double> log_score(k);
  for (std::size_t i = 0; i < k; ++i) {
    const GaussianView sense = fw.component(i);
    double max_term = -std::numeric_limits<double>::infinity();
    std::vector<double> terms;
    terms.reserve(context.size());
    for (const WordId c : context) {
      terms.push_back(log_component_mixture_similarity(sense, params.word(c)));
      max_term = std::max(max_term, terms.back());
    }
    double sum = 0.0;
    for (double t : terms) sum += std::exp(t - max_term);
    log_score[i] = std::log(fw.weights[i]) + max_term + std::log(sum);
  }

  const double max_score = *std::max_element(log_score.begin(), log_score.end());
  double total = 0.0;
  for (double s : log_score) total += std::exp(s - max_score);
  std::vector<double> posterior(k);
  for (std::size_t i = 0; i < k; ++i) {
    posterior[i] = std::exp(log_score[i] - max_score) / total;
  }
  return posterior;
}

double max_sim_c(const ModelParams& params, WordId w1, std::span<const WordId> context1,
                 WordId w2, std::span<const WordId> context2) {
  const auto argmax = [](const std::vector<double>& p) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < p.size(); ++i) {
      if (p[i] > p[best]) best = i;  // ties keep the lowest index
    }
    return best;
  };
  const std::size_t k1 = argmax(sense_posterior(params, w1, context1));
  const std::size_t k2 = argmax(sense_posterior(params, w2, context2));
  return log_pair_similarity(params.word(w1).component(k1), params.word(w2).component(k2));
}

namespace {

// Average ranks (1-based); ties share the mean of their rank range.
std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> golds, std::span<const double> preds) {
  if (golds.size() != preds.size()) throw std::domain_error("spearman: length mismatch");
  if (golds.size() < 2) throw std::domain_error("spearman: need at least 2 pairs");

  const std::vector<double> ra = average_ranks(golds);
  const std::vector<double> rb = average_ranks(preds);
  const double n = static_cast<double>(ra.size());

  double mean_a = 0.0, mean_b = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    mean_a += ra[i];
    mean_b += rb[i];
  }
  mean_a /= n;
  mean_b /= n;

  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    const double da = ra[i] - mean_a;
    const double db = rb[i] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a == 0.0 || var_b == 0.0) {
    throw std::domain_error("spearman: zero rank variance, correlation undefined");
  }
  return cov / std::sqrt(var_a * var_b);
}

std::vector<WordId> context_window_ids(const Vocabulary& vocab,
                                       std::span<const std::string> tokens,
                                       std::size_t target, int window) {
  std::vector<WordId> ids;
  const std::size_t w = static_cast<std::size_t>(window);
  const std::size_t lo = target >= w ? target - w : 0;
  const std::size_t hi = std::min(tokens.size(), target + w + 1);
  for (std::size_t i = lo; i < hi; ++i) {
    if (i == target) continue;
    const WordId id = vocab.id_of(tokens[i]);
    if (id != kOovId) ids.push_back(id);
  }
  return ids;
}

EvalResult evaluate(const ModelParams& params, const Vocabulary& vocab,
                    const EvalDataset& dataset, SimilarityRule rule, int context_window) {
  if (rule == SimilarityRule::MaxSimC && !dataset.has_contexts) {
    throw UsageError("MaxSimC needs a dataset with contexts");
  }

  std::vector<double> golds, preds;
  std::size_t skipped = 0;
  for (const ScoredPair& pair : dataset.pairs) {
    const WordId w1 = vocab.id_of(pair.word1);
    const WordId w2 = vocab.id_of(pair.word2);
    if (w1 == kOovId || w2 == kOovId) {
      ++skipped;
      continue;
    }
    double pred;
    if (rule == SimilarityRule::AvgSim) {
      pred = avg_sim(params, w1, w2);
    } else {
      const std::vector<WordId> c1 =
          context_window_ids(vocab, pair.context1, pair.target1, context_window);
      const std::vector<WordId> c2 =
          context_window_ids(vocab, pair.context2, pair.target2, context_window);
      pred = max_sim_c(params, w1, c1, w2, c2);
    }
    golds.push_back(pair.gold);
    preds.push_back(pred);
  }

  if (golds.size() < 2) {
    throw FormatError("fewer than two pairs covered by the vocabulary (" +
                      std::to_string(golds.size()) + " of " +
                      std::to_string(dataset.pairs.size()) + ")");
  }
  EvalResult result;
  result.rho_x100 = 100.0 * spearman(golds, preds);
  result.covered_pairs = golds.size();
  result.skipped_pairs = skipped;
  return result;
}

}  // namespace gmsg
