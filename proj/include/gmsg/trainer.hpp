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
#include <span>
#include <string>
#include <vector>

#include "gmsg/corpus.hpp"
#include "gmsg/gmath.hpp"
#include "gmsg/model.hpp"

namespace gmsg {

struct TrainingConfig {
  double sr = 0.75;             // negative-sampling exponent
  int window = 5;               // N, max window half-width
  std::uint32_t d = 50;         // mean dimensionality
  double initial_rate = 0.025;  // alpha
  double margin = 0.5;          // kappa, in log-similarity units
  double l2 = 1e-8;             // lambda
  std::uint32_t min_count = 5;
  std::uint32_t iterations = 5;
  std::uint32_t K = 3;
  double xi = 0.2;
  double gamma = 0.02;
  std::uint32_t negatives_per_pair = 5;
  double m = 0.01;  // variance interval lower bound
  double M = 10.0;  // variance interval upper bound
  std::uint64_t seed = 1;

  Mode mode = Mode::Gmsg;
  std::size_t max_components = 10;
  std::uint32_t workers = 1;
  bool lowercase = true;
  // Examples held out (re-drawn with a fixed seed) for the per-epoch
  // objective; 0 disables objective tracking.
  std::size_t objective_sample = 10000;

  GrowthConfig growth() const { return {gamma, xi, max_components, m, M}; }
  void validate() const;  // throws UsageError
};

struct TrainReport {
  std::uint64_t examples_seen = 0;
  std::vector<double> mean_loss;              // per epoch, from evaluate_objective
  std::vector<double> hinge_active_fraction;  // per epoch
  std::vector<std::uint64_t> growth_events;   // per epoch
  double wall_time_seconds = 0.0;

  std::uint64_t total_growth_events() const;
};

// max(0, kappa - sim_pos + sim_neg); similarities in log units.
inline double hinge_loss(double sim_pos, double sim_neg, double kappa) {
  const double l = kappa - sim_pos + sim_neg;
  return l > 0.0 ? l : 0.0;
}

// Reusable per-worker buffers for the hot path.
struct TrainScratch {
  MixtureSimilarity sim_pos, sim_neg;
  MixtureGrads grad_w, grad_other, word_accum;
  NegativeSampler::Draw negatives;
};

struct StepStats {
  double loss_sum = 0.0;
  std::uint64_t pairs = 0;   // (context, negative) hinge evaluations
  std::uint64_t active = 0;  // evaluations with a violated margin

  double mean_loss() const { return pairs ? loss_sum / static_cast<double>(pairs) : 0.0; }
};

// One subgradient pass over a single example. For every context word c and
// each sampled negative: the hinge is evaluated on the fresh parameters;
// when violated, context-space rows of c and the negative are updated
// immediately while the word-space gradient accumulates, to be applied once
// after the negative loop. L2 decay touches every visited row, then simplex
// projection and covariance clamping restore the constraints row by row.
StepStats train_step(ModelParams& params, const TrainingExample& example,
                     const NegativeSampler& sampler, const TrainingConfig& cfg,
                     double rate, Rng& rng, TrainScratch& scratch);
StepStats train_step(ModelParams& params, const TrainingExample& example,
                     const NegativeSampler& sampler, const TrainingConfig& cfg,
                     double rate, Rng& rng);

// Hinge objective (1/Z) sum l + (lambda/2) ||theta||^2 over a fixed example
// set with the caller-seeded negative draws; Z counts one unit per sampled
// negative.
double evaluate_objective(const ModelParams& params,
                          std::span<const TrainingExample> examples,
                          const NegativeSampler& sampler, const TrainingConfig& cfg,
                          Rng& rng);

struct TrainOutput {
  ModelParams params;
  Vocabulary vocab;
  TrainReport report;
};

// Full training run on pre-mapped ids (all in-vocabulary). The learning rate
// decays linearly from alpha to alpha/100 over the expected example total;
// in D-GMSG mode each example is preceded by the growth check
// context_similarity(w, c(w)) < gamma.
TrainOutput train_on_ids(std::vector<WordId> ids, Vocabulary vocab,
                         const TrainingConfig& cfg);

// Convenience wrapper: builds the vocabulary from the corpus file, maps ids,
// trains. Throws IoError / FormatError on unreadable or empty input.
TrainOutput train(const std::string& corpus_path, const TrainingConfig& cfg);

}  // namespace gmsg
