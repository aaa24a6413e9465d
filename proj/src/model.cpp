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

#include "gmsg/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gmsg/errors.hpp"

namespace gmsg {

std::string_view mode_name(Mode mode) {
  switch (mode) {
    case Mode::SgEquivalent: return "sg";
    case Mode::Gsg: return "gsg";
    case Mode::Gmsg: return "gmsg";
    case Mode::Dgmsg: return "dgmsg";
  }
  return "unknown";
}

std::optional<Mode> parse_mode(std::string_view name) {
  if (name == "sg") return Mode::SgEquivalent;
  if (name == "gsg") return Mode::Gsg;
  if (name == "gmsg") return Mode::Gmsg;
  if (name == "dgmsg") return Mode::Dgmsg;
  return std::nullopt;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto* table : {&word_table, &context_table}) {
    for (const WordMixture& row : *table) {
      n += row.weights.size() + row.mu.size() + row.var.size();
    }
  }
  return n;
}

namespace {

double initial_variance(Mode mode, double var_min, double var_max) {
  const double v = mode == Mode::SgEquivalent ? 0.5 : 1.0;
  return std::clamp(v, var_min, var_max);
}

void init_row(WordMixture& row, std::uint32_t k, std::uint32_t d, Mode mode,
              double var_min, double var_max, std::size_t reserve, Rng& rng) {
  if (reserve > 0) {
    row.weights.reserve(reserve);
    row.mu.reserve(reserve * d);
    row.var.reserve(reserve * d);
  }
  row.weights.assign(k, 1.0 / static_cast<double>(k));
  row.mu.resize(static_cast<std::size_t>(k) * d);
  row.var.assign(static_cast<std::size_t>(k) * d, initial_variance(mode, var_min, var_max));
  const double half = 0.5 / static_cast<double>(d);
  for (double& m : row.mu) m = rng.uniform(-half, half);
}

}  // namespace

ModelParams init_model(const InitOptions& opts, Rng& rng) {
  if (opts.K < 1 || opts.d < 1) throw UsageError("init_model: K and d must be >= 1");
  const std::uint32_t k = opts.mode == Mode::Dgmsg ? 1 : opts.K;
  const std::size_t reserve = opts.mode == Mode::Dgmsg ? opts.max_components : 0;

  ModelParams params;
  params.d = opts.d;
  params.mode = opts.mode;
  params.word_table.resize(opts.vocab_size);
  params.context_table.resize(opts.vocab_size);
  for (WordMixture& row : params.word_table) {
    init_row(row, k, opts.d, opts.mode, opts.var_min, opts.var_max, reserve, rng);
  }
  for (WordMixture& row : params.context_table) {
    init_row(row, k, opts.d, opts.mode, opts.var_min, opts.var_max, reserve, rng);
  }
  return params;
}

std::size_t clamp_covariances(WordMixture& row, double m, double M) {
  std::size_t clamped = 0;
  for (double& v : row.var) {
    const double c = std::clamp(v, m, M);
    if (c != v) {
      v = c;
      ++clamped;
    }
  }
  return clamped;
}

std::size_t clamp_covariances(ModelParams& params, double m, double M) {
  if (!(m > 0.0) || !(m <= M)) throw UsageError("variance interval requires 0 < m <= M");
  std::size_t clamped = 0;
  for (auto* table : {&params.word_table, &params.context_table}) {
    for (WordMixture& row : *table) clamped += clamp_covariances(row, m, M);
  }
  return clamped;
}

void project_simplex(std::span<double> weights) {
  const std::size_t k = weights.size();
  if (k == 0) return;

  double positive_mass = 0.0;
  for (double w : weights) {
    if (w > 0.0 && std::isfinite(w)) positive_mass += w;
  }
  if (positive_mass <= 0.0) {
    const double u = 1.0 / static_cast<double>(k);
    for (double& w : weights) w = u;
    return;
  }

  // Pin sub-floor entries to the floor and spread the remaining mass over
  // the rest; repeat in case the rescale drags another entry under.
  std::vector<bool> pinned(k, false);
  for (std::size_t iter = 0; iter < k; ++iter) {
    std::size_t pinned_count = 0;
    double free_mass = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      if (pinned[i] || weights[i] < kWeightFloor || !std::isfinite(weights[i])) {
        pinned[i] = true;
        ++pinned_count;
      } else {
        free_mass += weights[i];
      }
    }
    if (pinned_count == k) {
      const double u = 1.0 / static_cast<double>(k);
      for (double& w : weights) w = u;
      return;
    }
    const double target = 1.0 - static_cast<double>(pinned_count) * kWeightFloor;
    const double scale = target / free_mass;
    bool dragged_under = false;
    for (std::size_t i = 0; i < k; ++i) {
      if (pinned[i]) {
        weights[i] = kWeightFloor;
      } else {
        weights[i] *= scale;
        if (weights[i] < kWeightFloor) dragged_under = true;
      }
    }
    if (!dragged_under) return;
  }
}

double context_similarity(const ModelParams& params, WordId w,
                          std::span<const WordId> context) {
  if (context.empty()) throw std::domain_error("context_similarity: empty context");
  const MixtureView fw = params.word(w);
  double acc = 0.0;
  for (const WordId c : context) {
    acc += normalized_similarity(fw, params.word(c));
  }
  return acc / static_cast<double>(context.size());
}

bool grow_component(ModelParams& params, WordId w, const GrowthConfig& cfg, Rng& rng) {
  WordMixture& row = params.word_table[static_cast<std::size_t>(w)];
  if (row.components() >= cfg.max_components) return false;

  // Coordinates land before the weight append: concurrent readers key the
  // component count off weights.size(), so the new slot must be complete by
  // the time it becomes visible.
  const std::size_t d = params.d;
  const double half = 0.5 / static_cast<double>(d);
  const double v0 = std::clamp(1.0, cfg.var_min, cfg.var_max);
  for (std::size_t k = 0; k < d; ++k) row.mu.push_back(rng.uniform(-half, half));
  for (std::size_t k = 0; k < d; ++k) row.var.push_back(v0);

  const double keep = 1.0 - cfg.xi;
  for (double& weight : row.weights) weight *= keep;
  row.weights.push_back(cfg.xi);
  return true;
}

}  // namespace gmsg
