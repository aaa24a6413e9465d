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

#include "gmsg/gmath.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gmsg {

double log_gaussian_at_zero(std::span<const double> delta_mu,
                            std::span<const double> var_sum) {
  if (delta_mu.size() != var_sum.size()) {
    throw std::domain_error("log_gaussian_at_zero: dimension mismatch");
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < delta_mu.size(); ++k) {
    const double v = var_sum[k];
    if (!(v > 0.0)) throw std::domain_error("log_gaussian_at_zero: non-positive variance");
    acc += std::log(v) + delta_mu[k] * delta_mu[k] / v;
  }
  return -0.5 * (acc + kLog2Pi * static_cast<double>(delta_mu.size()));
}

double log_pair_similarity(const GaussianView& a, const GaussianView& b) {
  const std::size_t d = a.mu.size();
  if (d != b.mu.size() || d != a.var.size() || d != b.var.size()) {
    throw std::domain_error("log_pair_similarity: dimension mismatch");
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double v = a.var[k] + b.var[k];
    if (!(v > 0.0)) throw std::domain_error("log_pair_similarity: non-positive variance");
    const double dmu = a.mu[k] - b.mu[k];
    acc += std::log(v) + dmu * dmu / v;
  }
  return -0.5 * (acc + kLog2Pi * static_cast<double>(d));
}

void log_mixture_similarity(const MixtureView& f, const MixtureView& g,
                            MixtureSimilarity& out) {
  const std::size_t kf = f.components();
  const std::size_t kg = g.components();
  if (kf == 0 || kg == 0) throw std::domain_error("log_mixture_similarity: empty mixture");
  if (f.dim != g.dim) throw std::domain_error("log_mixture_similarity: dimension mismatch");

  out.rows = kf;
  out.cols = kg;
  out.responsibilities.resize(kf * kg);

  // First pass stores the joint log terms in the responsibility buffer.
  double max_term = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < kf; ++i) {
    if (!(f.weights[i] > 0.0)) {
      throw std::domain_error("log_mixture_similarity: non-positive mixture weight");
    }
    const double log_wi = std::log(f.weights[i]);
    const GaussianView fi = f.component(i);
    for (std::size_t j = 0; j < kg; ++j) {
      if (!(g.weights[j] > 0.0)) {
        throw std::domain_error("log_mixture_similarity: non-positive mixture weight");
      }
      const double term = log_wi + std::log(g.weights[j]) + log_pair_similarity(fi, g.component(j));
      out.responsibilities[i * kg + j] = term;
      max_term = std::max(max_term, term);
    }
  }

  double sum = 0.0;
  for (double t : out.responsibilities) sum += std::exp(t - max_term);
  out.log_value = max_term + std::log(sum);

  for (double& t : out.responsibilities) t = std::exp(t - out.log_value);
}

MixtureSimilarity log_mixture_similarity(const MixtureView& f, const MixtureView& g) {
  MixtureSimilarity out;
  log_mixture_similarity(f, g, out);
  return out;
}

double log_component_mixture_similarity(const GaussianView& a, const MixtureView& g) {
  const std::size_t kg = g.components();
  if (kg == 0) throw std::domain_error("log_component_mixture_similarity: empty mixture");
  double max_term = -std::numeric_limits<double>::infinity();
  double terms[64];
  std::vector<double> heap_terms;
  double* t = terms;
  if (kg > 64) {
    heap_terms.resize(kg);
    t = heap_terms.data();
  }
  for (std::size_t j = 0; j < kg; ++j) {
    if (!(g.weights[j] > 0.0)) {
      throw std::domain_error("log_component_mixture_similarity: non-positive weight");
    }
    t[j] = std::log(g.weights[j]) + log_pair_similarity(a, g.component(j));
    max_term = std::max(max_term, t[j]);
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < kg; ++j) sum += std::exp(t[j] - max_term);
  return max_term + std::log(sum);
}

double normalized_similarity(const MixtureView& f, const MixtureView& g) {
  MixtureSimilarity fg, ff, gg;
  log_mixture_similarity(f, g, fg);
  log_mixture_similarity(f, f, ff);
  log_mixture_similarity(g, g, gg);
  return std::exp(fg.log_value - 0.5 * ff.log_value - 0.5 * gg.log_value);
}

void MixtureGrads::reset(std::size_t k, std::size_t kd) {
  weights.assign(k, 0.0);
  mu.assign(kd, 0.0);
  var.assign(kd, 0.0);
}

void mixture_similarity_gradients(const MixtureView& f, const MixtureView& g,
                                  const MixtureSimilarity& sim,
                                  MixtureGrads& grad_f, MixtureGrads& grad_g) {
  const std::size_t kf = f.components();
  const std::size_t kg = g.components();
  const std::size_t d = f.dim;
  if (sim.rows != kf || sim.cols != kg) {
    throw std::domain_error("mixture_similarity_gradients: stale responsibilities");
  }

  grad_f.reset(kf, kf * d);
  grad_g.reset(kg, kg * d);

  for (std::size_t i = 0; i < kf; ++i) {
    const double* mu_i = f.mu.data() + i * d;
    const double* var_i = f.var.data() + i * d;
    double* gmu_i = grad_f.mu.data() + i * d;
    double* gvar_i = grad_f.var.data() + i * d;
    double row_sum = 0.0;
    for (std::size_t j = 0; j < kg; ++j) {
      const double r = sim.responsibilities[i * kg + j];
      row_sum += r;
      if (r == 0.0) continue;
      const double* mu_j = g.mu.data() + j * d;
      const double* var_j = g.var.data() + j * d;
      double* gmu_j = grad_g.mu.data() + j * d;
      double* gvar_j = grad_g.var.data() + j * d;
      for (std::size_t k = 0; k < d; ++k) {
        const double vs = var_i[k] + var_j[k];
        const double dmu = mu_i[k] - mu_j[k];
        const double pull = r * dmu / vs;
        gmu_i[k] -= pull;
        gmu_j[k] += pull;
        // Shared through the variance sum, so both sides get the same term.
        const double vterm = r * 0.5 * (dmu * dmu / (vs * vs) - 1.0 / vs);
        gvar_i[k] += vterm;
        gvar_j[k] += vterm;
      }
    }
    grad_f.weights[i] = row_sum / f.weights[i];
  }
  for (std::size_t j = 0; j < kg; ++j) {
    double col_sum = 0.0;
    for (std::size_t i = 0; i < kf; ++i) col_sum += sim.responsibilities[i * kg + j];
    grad_g.weights[j] = col_sum / g.weights[j];
  }
}

}  // namespace gmsg
