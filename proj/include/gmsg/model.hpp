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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gmsg/corpus.hpp"
#include "gmsg/gmath.hpp"
#include "gmsg/rng.hpp"

namespace gmsg {

enum class Mode : std::uint8_t {
  SgEquivalent = 0,  // K=1, variances frozen at 1/2, weights frozen
  Gsg = 1,           // K=1, trained diagonal covariance
  Gmsg = 2,          // fixed K components per word
  Dgmsg = 3,         // starts at K=1, grows components during training
};

std::string_view mode_name(Mode mode);
std::optional<Mode> parse_mode(std::string_view name);  // "sg"|"gsg"|"gmsg"|"dgmsg"

// One word's mixture. Means and variances are flat K*d arrays, weights K.
// In D-GMSG mode, storage is reserved up to the component cap at init so
// growth never reallocates under concurrent readers.
struct WordMixture {
  std::vector<double> weights;
  std::vector<double> mu;
  std::vector<double> var;

  std::size_t components() const { return weights.size(); }
  MixtureView view(std::size_t dim) const { return {weights, mu, var, dim}; }
};

struct GrowthConfig {
  double gamma = 0.02;  // growth threshold on the normalized similarity
  double xi = 0.2;      // mixture coefficient of a freshly added component
  std::size_t max_components = 10;
  double var_min = 0.01;  // [m, M] interval for new components
  double var_max = 10.0;
};

// Word-space and context-space mixture tables over one vocabulary.
struct ModelParams {
  std::vector<WordMixture> word_table;
  std::vector<WordMixture> context_table;
  std::uint32_t d = 0;
  Mode mode = Mode::Gmsg;

  std::size_t vocab_size() const { return word_table.size(); }
  MixtureView word(WordId w) const { return word_table[static_cast<std::size_t>(w)].view(d); }
  MixtureView context(WordId c) const {
    return context_table[static_cast<std::size_t>(c)].view(d);
  }

  // Scalar parameters across both tables (weights + means + variances).
  std::size_t parameter_count() const;
};

// Means are drawn uniformly from [-0.5/d, 0.5/d] per coordinate, variances
// start at 1.0 clamped to [var_min, var_max] (1/2 in SG-equivalent mode,
// where they stay frozen), weights are uniform 1/K. D-GMSG ignores K and
// starts every word at a single component with capacity for max_components.
struct InitOptions {
  std::uint32_t vocab_size = 0;
  std::uint32_t K = 1;
  std::uint32_t d = 1;
  Mode mode = Mode::Gmsg;
  double var_min = 0.01;
  double var_max = 10.0;
  std::size_t max_components = 10;
};

ModelParams init_model(const InitOptions& opts, Rng& rng);

// Clamps every variance entry into [m, M]; returns how many entries moved.
// Idempotent.
std::size_t clamp_covariances(ModelParams& params, double m, double M);
std::size_t clamp_covariances(WordMixture& row, double m, double M);

// Restores the mixture-weight simplex: entries below kWeightFloor are pinned
// to the floor and the remaining mass is rescaled over the rest, so the
// output sums to 1 (within 1e-12) with every entry >= kWeightFloor. All
// entries <= 0 resets to uniform.
void project_simplex(std::span<double> weights);

// Mean over the context of the normalized word-space similarity
// sim(f_w, f_c) / sqrt(sim(f_w,f_w) sim(f_c,f_c)); value in (0, 1].
double context_similarity(const ModelParams& params, WordId w,
                          std::span<const WordId> context);

// D-GMSG growth: appends a freshly randomized component to the word-space
// mixture of w, scaling existing weights by (1-xi) and giving the newcomer
// weight xi. Existing means and variances are untouched. Returns false when
// the word is already at max_components.
bool grow_component(ModelParams& params, WordId w, const GrowthConfig& cfg, Rng& rng);

// Model file round trip. Versioned little-endian binary layout:
//   "GMSG" | u32 version=1 | u32 |V| | u32 d | u8 mode
//   word table:    per word, u16 K | K f64 weights | K*d f32 means | K*d f32 vars
//   context table: same layout
//   vocabulary:    per word, u32 byte length | UTF-8 bytes | u64 count
void save_model(const std::string& path, const ModelParams& params,
                const Vocabulary& vocab);

struct LoadedModel {
  ModelParams params;
  Vocabulary vocab;
};

LoadedModel load_model(const std::string& path);

}  // namespace gmsg
