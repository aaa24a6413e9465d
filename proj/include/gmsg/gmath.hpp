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

#include <cstddef>
#include <span>
#include <vector>

namespace gmsg {

// Everything here is a pure function of its inputs and is computed in the
// log domain: raw Gaussian densities underflow doubles long before d = 50,
// while ranks and margin comparisons only need log values.

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Weight floor for mixture coefficients; keeps log(phi) finite.
inline constexpr double kWeightFloor = 1e-6;

// A diagonal Gaussian over externally owned storage.
struct GaussianView {
  std::span<const double> mu;
  std::span<const double> var;
};

// A Gaussian mixture over flat storage; component i's coordinates occupy
// [i*dim, (i+1)*dim) of mu and var.
struct MixtureView {
  std::span<const double> weights;
  std::span<const double> mu;
  std::span<const double> var;
  std::size_t dim = 0;

  std::size_t components() const { return weights.size(); }
  GaussianView component(std::size_t i) const {
    return {mu.subspan(i * dim, dim), var.subspan(i * dim, dim)};
  }
};

// log N(0; delta_mu, diag(var_sum)) =
//   -1/2 sum_k [ log(2 pi v_k) + delta_mu_k^2 / v_k ].
// Throws std::domain_error on a non-positive variance entry.
double log_gaussian_at_zero(std::span<const double> delta_mu,
                            std::span<const double> var_sum);

// log of the Gaussian product integral int f g dx = N(0; mu_a - mu_b,
// Sigma_a + Sigma_b), diagonal covariances. Symmetric in its arguments.
double log_pair_similarity(const GaussianView& a, const GaussianView& b);

struct MixtureSimilarity {
  double log_value = 0.0;
  std::size_t rows = 0, cols = 0;
  // Posterior weight of each component pair; K_f x K_g row-major, sums to 1.
  std::vector<double> responsibilities;

  double responsibility(std::size_t i, std::size_t j) const {
    return responsibilities[i * cols + j];
  }
};

// log sum_{i,j} phi_i phi'_j N(0; mu_i - mu'_j, Sigma_i + Sigma'_j) via
// log-sum-exp, plus the pair responsibilities needed for gradients.
// Throws std::domain_error when any weight is <= 0.
MixtureSimilarity log_mixture_similarity(const MixtureView& f, const MixtureView& g);
void log_mixture_similarity(const MixtureView& f, const MixtureView& g,
                            MixtureSimilarity& out);

// log of sum_j phi_gj N(0; mu_a - mu_gj, var_a + var_gj): one component
// against a whole mixture. Used by sense posteriors.
double log_component_mixture_similarity(const GaussianView& a, const MixtureView& g);

// sim(f,g) / sqrt(sim(f,f) sim(g,g)) evaluated in the log domain and
// exponentiated; in (0, 1], equal to 1 iff f and g coincide.
double normalized_similarity(const MixtureView& f, const MixtureView& g);

// Gradients of log sim with respect to one argument's parameters.
struct MixtureGrads {
  std::vector<double> weights;  // K
  std::vector<double> mu;       // K*dim
  std::vector<double> var;      // K*dim

  void reset(std::size_t k, std::size_t kd);
};

// Analytic gradients of log_mixture_similarity. With r_ij the pair
// responsibilities and s_ij = var_i + var'_j:
//   d/d mu_ik    = sum_j r_ij (mu'_jk - mu_ik) / s_ijk
//   d/d var_ik   = sum_j r_ij [ dmu_k^2 / s_ijk^2 - 1 / s_ijk ] / 2
//   d/d phi_i    = (sum_j r_ij) / phi_i
// and symmetrically for g (the mean gradient flips sign, the variance
// gradient is shared).
void mixture_similarity_gradients(const MixtureView& f, const MixtureView& g,
                                  const MixtureSimilarity& sim,
                                  MixtureGrads& grad_f, MixtureGrads& grad_g);

}  // namespace gmsg
