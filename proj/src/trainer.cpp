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

#include "gmsg/trainer.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <numeric>
#include <thread>

#include "gmsg/errors.hpp"

namespace gmsg {

namespace {

// Growth is a structural change; writers take a striped lock keyed by word
// id while plain parameter updates stay lock-free per the racy contract.
constexpr std::size_t kLockStripes = 1024;

struct StripedLocks {
  std::mutex stripes[kLockStripes];
  std::mutex& for_word(WordId w) {
    return stripes[static_cast<std::size_t>(w) % kLockStripes];
  }
};

bool update_var(Mode mode) { return mode != Mode::SgEquivalent; }
bool update_weights(Mode mode) { return mode != Mode::SgEquivalent; }

void apply_gradient(WordMixture& row, const MixtureGrads& g, double scale, Mode mode) {
  const std::size_t kd = row.mu.size();
  for (std::size_t i = 0; i < kd; ++i) row.mu[i] += scale * g.mu[i];
  if (update_var(mode)) {
    for (std::size_t i = 0; i < kd; ++i) row.var[i] += scale * g.var[i];
  }
  if (update_weights(mode)) {
    for (std::size_t i = 0; i < row.weights.size(); ++i) {
      row.weights[i] += scale * g.weights[i];
    }
  }
}

void l2_decay(WordMixture& row, double rate_lambda, Mode mode) {
  const double factor = 1.0 - rate_lambda;
  for (double& m : row.mu) m *= factor;
  if (update_var(mode)) {
    for (double& v : row.var) v *= factor;
  }
  if (update_weights(mode)) {
    for (double& w : row.weights) w *= factor;
  }
}

void restore_constraints(WordMixture& row, const TrainingConfig& cfg) {
  if (update_weights(cfg.mode)) project_simplex(row.weights);
  if (update_var(cfg.mode)) clamp_covariances(row, cfg.m, cfg.M);
}

}  // namespace

void TrainingConfig::validate() const {
  if (!(sr > 0.0)) throw UsageError("sr must be > 0");
  if (window < 1) throw UsageError("window must be >= 1");
  if (d < 1) throw UsageError("d must be >= 1");
  if (!(initial_rate > 0.0)) throw UsageError("initial-rate must be > 0");
  if (!(margin > 0.0)) throw UsageError("margin must be > 0");
  if (l2 < 0.0) throw UsageError("l2 must be >= 0");
  if (min_count < 1) throw UsageError("min-count must be >= 1");
  if (iterations < 1) throw UsageError("iterations must be >= 1");
  if (K < 1) throw UsageError("K must be >= 1");
  if (!(xi > 0.0 && xi < 1.0)) throw UsageError("xi must lie in (0, 1)");
  if (!(gamma > 0.0)) throw UsageError("gamma must be > 0");
  if (negatives_per_pair < 1) throw UsageError("negatives-per-pair must be >= 1");
  if (!(m > 0.0) || !(m <= M)) throw UsageError("variance interval requires 0 < m <= M");
  if (max_components < 1) throw UsageError("max-components must be >= 1");
  if (workers < 1) throw UsageError("workers must be >= 1");
  if ((mode == Mode::SgEquivalent || mode == Mode::Gsg) && K != 1) {
    throw UsageError("sg/gsg modes imply K = 1");
  }
  if (mode == Mode::SgEquivalent && (m > 0.5 || M < 0.5)) {
    throw UsageError("sg mode needs 0.5 inside [m, M]");
  }
}

std::uint64_t TrainReport::total_growth_events() const {
  return std::accumulate(growth_events.begin(), growth_events.end(), std::uint64_t{0});
}

StepStats train_step(ModelParams& params, const TrainingExample& example,
                     const NegativeSampler& sampler, const TrainingConfig& cfg,
                     double rate, Rng& rng, TrainScratch& scratch) {
  StepStats stats;
  WordMixture& word_row = params.word_table[static_cast<std::size_t>(example.center)];
  const double rate_lambda = rate * cfg.l2;

  for (const WordId c : example.context) {
    WordMixture& ctx_row = params.context_table[static_cast<std::size_t>(c)];
    sampler.sample_excluding(cfg.negatives_per_pair, c, rng, scratch.negatives);

    scratch.word_accum.reset(word_row.components(), word_row.mu.size());
    bool word_touched = false;

    for (const WordId neg : scratch.negatives.ids) {
      WordMixture& neg_row = params.context_table[static_cast<std::size_t>(neg)];

      // The positive similarity is re-evaluated per negative: the row of c
      // may have moved on the previous iteration.
      const MixtureView fw = params.word(example.center);
      log_mixture_similarity(fw, ctx_row.view(params.d), scratch.sim_pos);
      log_mixture_similarity(fw, neg_row.view(params.d), scratch.sim_neg);

      const double loss =
          hinge_loss(scratch.sim_pos.log_value, scratch.sim_neg.log_value, cfg.margin);
      stats.loss_sum += loss;
      stats.pairs++;

      if (loss > 0.0) {
        stats.active++;
        word_touched = true;

        // Ascent on the positive pair.
        mixture_similarity_gradients(fw, ctx_row.view(params.d), scratch.sim_pos,
                                     scratch.grad_w, scratch.grad_other);
        for (std::size_t i = 0; i < scratch.word_accum.mu.size(); ++i) {
          scratch.word_accum.mu[i] += scratch.grad_w.mu[i];
          scratch.word_accum.var[i] += scratch.grad_w.var[i];
        }
        for (std::size_t i = 0; i < scratch.word_accum.weights.size(); ++i) {
          scratch.word_accum.weights[i] += scratch.grad_w.weights[i];
        }
        apply_gradient(ctx_row, scratch.grad_other, rate, cfg.mode);

        // Descent on the sampled negative.
        mixture_similarity_gradients(fw, neg_row.view(params.d), scratch.sim_neg,
                                     scratch.grad_w, scratch.grad_other);
        for (std::size_t i = 0; i < scratch.word_accum.mu.size(); ++i) {
          scratch.word_accum.mu[i] -= scratch.grad_w.mu[i];
          scratch.word_accum.var[i] -= scratch.grad_w.var[i];
        }
        for (std::size_t i = 0; i < scratch.word_accum.weights.size(); ++i) {
          scratch.word_accum.weights[i] -= scratch.grad_w.weights[i];
        }
        apply_gradient(neg_row, scratch.grad_other, -rate, cfg.mode);
      }

      l2_decay(ctx_row, rate_lambda, cfg.mode);
      l2_decay(neg_row, rate_lambda, cfg.mode);
      restore_constraints(ctx_row, cfg);
      restore_constraints(neg_row, cfg);
    }

    if (word_touched) {
      apply_gradient(word_row, scratch.word_accum, rate, cfg.mode);
    }
    l2_decay(word_row, rate_lambda, cfg.mode);
    restore_constraints(word_row, cfg);
  }
  return stats;
}

StepStats train_step(ModelParams& params, const TrainingExample& example,
                     const NegativeSampler& sampler, const TrainingConfig& cfg,
                     double rate, Rng& rng) {
  TrainScratch scratch;
  return train_step(params, example, sampler, cfg, rate, rng, scratch);
}

double evaluate_objective(const ModelParams& params,
                          std::span<const TrainingExample> examples,
                          const NegativeSampler& sampler, const TrainingConfig& cfg,
                          Rng& rng) {
  if (examples.empty()) throw UsageError("evaluate_objective: empty example set");

  double hinge_sum = 0.0;
  std::uint64_t z = 0;
  MixtureSimilarity sim_pos, sim_neg;
  NegativeSampler::Draw negatives;
  for (const TrainingExample& ex : examples) {
    const MixtureView fw = params.word(ex.center);
    for (const WordId c : ex.context) {
      log_mixture_similarity(fw, params.context(c), sim_pos);
      sampler.sample_excluding(cfg.negatives_per_pair, c, rng, negatives);
      for (const WordId neg : negatives.ids) {
        log_mixture_similarity(fw, params.context(neg), sim_neg);
        hinge_sum += hinge_loss(sim_pos.log_value, sim_neg.log_value, cfg.margin);
        ++z;
      }
    }
  }

  double norm_sq = 0.0;
  for (const auto* table : {&params.word_table, &params.context_table}) {
    for (const WordMixture& row : *table) {
      for (double w : row.weights) norm_sq += w * w;
      for (double m : row.mu) norm_sq += m * m;
      for (double v : row.var) norm_sq += v * v;
    }
  }
  return hinge_sum / static_cast<double>(z) + 0.5 * cfg.l2 * norm_sq;
}

namespace {

// Examples used for the per-epoch objective, drawn once with a salted seed.
std::vector<TrainingExample> objective_examples(std::span<const WordId> ids,
                                                const TrainingConfig& cfg) {
  std::vector<TrainingExample> out;
  if (cfg.objective_sample == 0) return out;
  ExampleStream stream(ids, cfg.window, Rng(mix_seed(cfg.seed, 0xed0c)));
  TrainingExample ex;
  while (out.size() < cfg.objective_sample && stream.next(ex)) out.push_back(ex);
  return out;
}

struct EpochShard {
  std::span<const WordId> ids;
  std::uint64_t rng_stream;
};

}  // namespace

TrainOutput train_on_ids(std::vector<WordId> ids, Vocabulary vocab,
                         const TrainingConfig& cfg) {
  cfg.validate();
  if (vocab.size() == 0) throw FormatError("empty vocabulary");

  const auto start = std::chrono::steady_clock::now();

  Rng init_rng(cfg.seed);
  ModelParams params = init_model({static_cast<std::uint32_t>(vocab.size()), cfg.K, cfg.d,
                                   cfg.mode, cfg.m, cfg.M, cfg.max_components},
                                  init_rng);
  const NegativeSampler sampler(vocab, cfg.sr);
  const GrowthConfig growth = cfg.growth();
  const std::vector<TrainingExample> held_out = objective_examples(ids, cfg);

  TrainReport report;
  // The schedule decays over the expected number of center positions; the
  // retained total count equals the in-vocabulary corpus length per epoch.
  const double expected_total = std::max(
      1.0, static_cast<double>(ids.size()) * static_cast<double>(cfg.iterations));
  std::atomic<std::uint64_t> processed{0};
  StripedLocks growth_locks;

  const std::uint32_t workers =
      std::min<std::uint32_t>(cfg.workers, std::max<std::size_t>(ids.size(), 1));

  for (std::uint32_t epoch = 0; epoch < cfg.iterations; ++epoch) {
    std::vector<StepStats> worker_stats(workers);
    std::vector<std::uint64_t> worker_growth(workers, 0);

    auto run_worker = [&](std::uint32_t worker_id) {
      const std::size_t begin = ids.size() * worker_id / workers;
      const std::size_t end = ids.size() * (worker_id + 1) / workers;
      std::span<const WordId> shard(ids.data() + begin, end - begin);
      // Separate streams for window draws and negative/growth draws.
      const std::uint64_t stream_id = (std::uint64_t{epoch} << 8) | worker_id;
      Rng rng(mix_seed(cfg.seed, stream_id * 2 + 1));
      ExampleStream stream(shard, cfg.window, Rng(mix_seed(cfg.seed, stream_id * 2)));

      TrainScratch scratch;
      TrainingExample ex;
      StepStats local;
      std::uint64_t grown = 0;
      while (stream.next(ex)) {
        if (cfg.mode == Mode::Dgmsg) {
          const double s = context_similarity(params, ex.center, ex.context);
          if (s < cfg.gamma) {
            std::scoped_lock lock(growth_locks.for_word(ex.center));
            if (grow_component(params, ex.center, growth, rng)) ++grown;
          }
        }
        const std::uint64_t seen = processed.fetch_add(1, std::memory_order_relaxed);
        const double progress = static_cast<double>(seen) / expected_total;
        const double rate = cfg.initial_rate * std::max(0.01, 1.0 - progress);
        const StepStats s = train_step(params, ex, sampler, cfg, rate, rng, scratch);
        local.loss_sum += s.loss_sum;
        local.pairs += s.pairs;
        local.active += s.active;
      }
      worker_stats[worker_id] = local;
      worker_growth[worker_id] = grown;
    };

    if (workers == 1) {
      run_worker(0);
    } else {
      std::vector<std::thread> threads;
      threads.reserve(workers);
      for (std::uint32_t w = 0; w < workers; ++w) threads.emplace_back(run_worker, w);
      for (auto& t : threads) t.join();
    }

    StepStats epoch_stats;
    std::uint64_t epoch_growth = 0;
    for (std::uint32_t w = 0; w < workers; ++w) {
      epoch_stats.loss_sum += worker_stats[w].loss_sum;
      epoch_stats.pairs += worker_stats[w].pairs;
      epoch_stats.active += worker_stats[w].active;
      epoch_growth += worker_growth[w];
    }
    report.hinge_active_fraction.push_back(
        epoch_stats.pairs ? static_cast<double>(epoch_stats.active) /
                                static_cast<double>(epoch_stats.pairs)
                          : 0.0);
    report.growth_events.push_back(epoch_growth);

    if (!held_out.empty()) {
      Rng objective_rng(mix_seed(cfg.seed, 0x0b7ec7));
      report.mean_loss.push_back(
          evaluate_objective(params, held_out, sampler, cfg, objective_rng));
    } else {
      report.mean_loss.push_back(0.0);
    }
  }

  report.examples_seen = processed.load();
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  return {std::move(params), std::move(vocab), std::move(report)};
}

TrainOutput train(const std::string& corpus_path, const TrainingConfig& cfg) {
  cfg.validate();
  Vocabulary vocab = build_vocabulary_from_file(corpus_path, cfg.min_count, cfg.lowercase);
  std::vector<WordId> ids = load_corpus_ids(corpus_path, vocab, cfg.lowercase);
  return train_on_ids(std::move(ids), std::move(vocab), cfg);
}

}  // namespace gmsg
