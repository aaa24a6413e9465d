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

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "gmsg/errors.hpp"
#include "gmsg/model.hpp"
#include "oracles.hpp"

using namespace gmsg;

namespace {

ModelParams tiny_model(std::uint32_t vocab, std::uint32_t k, std::uint32_t d,
                       Mode mode = Mode::Gmsg, std::uint64_t seed = 5) {
  Rng rng(seed);
  return init_model({vocab, k, d, mode, 0.01, 10.0, 10}, rng);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("init_model") {
  SUBCASE("K=1 weight vectors are exactly (1.0)") {
    const ModelParams params = tiny_model(4, 1, 3);
    for (const WordMixture& row : params.word_table) {
      REQUIRE(row.weights.size() == 1);
      CHECK(row.weights[0] == 1.0);
    }
  }

  SUBCASE("fixed seed reproduces bit-identical parameters") {
    const ModelParams a = tiny_model(6, 2, 4, Mode::Gmsg, 99);
    const ModelParams b = tiny_model(6, 2, 4, Mode::Gmsg, 99);
    for (std::size_t w = 0; w < a.word_table.size(); ++w) {
      CHECK(a.word_table[w].mu == b.word_table[w].mu);
      CHECK(a.context_table[w].mu == b.context_table[w].mu);
      CHECK(a.word_table[w].var == b.word_table[w].var);
    }
  }

  SUBCASE("parameter count matches the closed form at full scale") {
    // |V| = 71084, K = 3, d = 50: per table |V| * (K + K*d + K*d).
    const std::uint32_t v = 71084, k = 3, d = 50;
    Rng rng(1);
    const ModelParams params = init_model({v, k, d, Mode::Gmsg, 0.01, 10.0, 10}, rng);
    const std::size_t per_table = static_cast<std::size_t>(v) * (k + 2ull * k * d);
    CHECK(per_table == 71084ull * 303ull);
    CHECK(params.parameter_count() == 2 * per_table);
  }

  SUBCASE("means live in [-0.5/d, 0.5/d], variances at the clamped midpoint") {
    const ModelParams params = tiny_model(10, 3, 5);
    const double half = 0.5 / 5.0;
    for (const WordMixture& row : params.word_table) {
      for (double m : row.mu) {
        CHECK(m >= -half);
        CHECK(m <= half);
      }
      for (double v : row.var) CHECK(v == 1.0);
    }
  }

  SUBCASE("sg mode freezes variances at one half") {
    const ModelParams params = tiny_model(4, 1, 3, Mode::SgEquivalent);
    for (const WordMixture& row : params.word_table) {
      for (double v : row.var) CHECK(v == 0.5);
    }
  }

  SUBCASE("dgmsg mode starts at one component regardless of K") {
    const ModelParams params = tiny_model(4, 3, 3, Mode::Dgmsg);
    for (const WordMixture& row : params.word_table) {
      CHECK(row.components() == 1);
      CHECK(row.weights.capacity() >= 10);
    }
  }
}

TEST_CASE("clamp_covariances") {
  SUBCASE("interior entries report zero and stay put") {
    ModelParams params = tiny_model(3, 2, 2);
    const auto before = params.word_table[0].var;
    CHECK(clamp_covariances(params, 0.01, 10.0) == 0);
    CHECK(params.word_table[0].var == before);
  }

  SUBCASE("tiny entry is floored") {
    ModelParams params = tiny_model(3, 1, 2);
    params.word_table[0].var[0] = 1e-9;
    CHECK(clamp_covariances(params, 0.01, 10.0) == 1);
    CHECK(params.word_table[0].var[0] == 0.01);
  }

  SUBCASE("idempotent on random parameters") {
    Rng rng(7);
    ModelParams params = tiny_model(5, 3, 3);
    for (WordMixture& row : params.word_table) {
      for (double& v : row.var) v = rng.uniform(-1.0, 20.0);
    }
    clamp_covariances(params, 0.01, 10.0);
    const auto snapshot = params.word_table[2].var;
    CHECK(clamp_covariances(params, 0.01, 10.0) == 0);
    CHECK(params.word_table[2].var == snapshot);
  }
}

TEST_CASE("project_simplex") {
  SUBCASE("fixed point") {
    std::vector<double> w = {0.5, 0.5};
    project_simplex(w);
    CHECK(w[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(w[1] == doctest::Approx(0.5).epsilon(1e-15));
  }

  SUBCASE("rescales a uniform overweight vector") {
    std::vector<double> w = {2.0, 2.0};
    project_simplex(w);
    CHECK(w[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(w[1] == doctest::Approx(0.5).epsilon(1e-15));
  }

  SUBCASE("negative entry is floored then mass renormalized") {
    std::vector<double> w = {1.0, -0.2};
    project_simplex(w);
    CHECK(w[1] == kWeightFloor);
    CHECK(w[0] == doctest::Approx(1.0 - kWeightFloor).epsilon(1e-12));
    CHECK(w[0] + w[1] == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("all non-positive resets to uniform") {
    std::vector<double> w = {-1.0, 0.0, -3.0};
    project_simplex(w);
    for (double x : w) CHECK(x == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }

  SUBCASE("property: output is a floored simplex for random inputs") {
    Rng rng(3);
    for (int t = 0; t < 500; ++t) {
      const std::size_t k = 1 + rng.uniform_index(8);
      std::vector<double> w(k);
      for (double& x : w) x = rng.uniform(-0.5, 2.0);
      project_simplex(w);
      double sum = 0.0;
      for (double x : w) {
        CHECK(x >= kWeightFloor);
        sum += x;
      }
      CHECK(std::abs(sum - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("context_similarity") {
  SUBCASE("a word against itself is exactly 1") {
    const ModelParams params = tiny_model(5, 2, 3);
    const std::vector<WordId> ctx = {2};
    CHECK(context_similarity(params, 2, ctx) == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("far-apart mixtures give a vanishing similarity") {
    ModelParams params = tiny_model(2, 1, 3);
    for (double& m : params.word_table[1].mu) m += 100.0;
    const std::vector<WordId> ctx = {1};
    CHECK(context_similarity(params, 0, ctx) < 1e-12);
  }

  SUBCASE("mean of per-pair normalized similarities") {
    const ModelParams params = tiny_model(8, 2, 3, Mode::Gmsg, 17);
    const std::vector<WordId> ctx = {1, 3, 5, 7};
    double expect = 0.0;
    for (const WordId c : ctx) {
      expect += normalized_similarity(params.word(0), params.word(c));
    }
    expect /= 4.0;
    CHECK(context_similarity(params, 0, ctx) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("grow_component") {
  GrowthConfig cfg;
  cfg.xi = 0.2;
  cfg.max_components = 10;

  SUBCASE("first growth splits (1.0) into (0.8, 0.2)") {
    ModelParams params = tiny_model(3, 1, 4, Mode::Dgmsg);
    Rng rng(2);
    REQUIRE(grow_component(params, 1, cfg, rng));
    const auto& w = params.word_table[1].weights;
    REQUIRE(w.size() == 2);
    CHECK(w[0] == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(w[1] == doctest::Approx(0.2).epsilon(1e-15));
  }

  SUBCASE("second growth scales again: (0.64, 0.16, 0.2)") {
    ModelParams params = tiny_model(3, 1, 4, Mode::Dgmsg);
    Rng rng(2);
    REQUIRE(grow_component(params, 1, cfg, rng));
    REQUIRE(grow_component(params, 1, cfg, rng));
    const auto& w = params.word_table[1].weights;
    REQUIRE(w.size() == 3);
    CHECK(w[0] == doctest::Approx(0.64).epsilon(1e-15));
    CHECK(w[1] == doctest::Approx(0.16).epsilon(1e-15));
    CHECK(w[2] == doctest::Approx(0.2).epsilon(1e-15));
    double sum = 0.0;
    for (double x : w) sum += x;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("existing means and variances are untouched") {
    ModelParams params = tiny_model(3, 1, 4, Mode::Dgmsg);
    const auto mu_before = params.word_table[0].mu;
    const auto var_before = params.word_table[0].var;
    Rng rng(2);
    REQUIRE(grow_component(params, 0, cfg, rng));
    for (std::size_t i = 0; i < mu_before.size(); ++i) {
      CHECK(params.word_table[0].mu[i] == mu_before[i]);
      CHECK(params.word_table[0].var[i] == var_before[i]);
    }
  }

  SUBCASE("cap stops growth") {
    ModelParams params = tiny_model(2, 1, 2, Mode::Dgmsg);
    Rng rng(2);
    GrowthConfig small = cfg;
    small.max_components = 2;
    CHECK(grow_component(params, 0, small, rng));
    CHECK_FALSE(grow_component(params, 0, small, rng));
    CHECK(params.word_table[0].components() == 2);
  }

  SUBCASE("fuzzed grow/project/clamp sequences keep the invariants") {
    Rng rng(41);
    ModelParams params = tiny_model(6, 1, 3, Mode::Dgmsg, 41);
    for (int step = 0; step < 2000; ++step) {
      const WordId w = static_cast<WordId>(rng.uniform_index(6));
      WordMixture& row = params.word_table[static_cast<std::size_t>(w)];
      const std::size_t before = row.components();
      switch (rng.uniform_index(4)) {
        case 0:
          grow_component(params, w, cfg, rng);
          CHECK(params.word_table[static_cast<std::size_t>(w)].components() >= before);
          break;
        case 1: {
          for (double& x : row.weights) x += rng.uniform(-0.2, 0.2);
          project_simplex(row.weights);
          break;
        }
        case 2: {
          for (double& v : row.var) v += rng.uniform(-0.5, 0.5);
          clamp_covariances(row, 0.01, 10.0);
          break;
        }
        default: {
          project_simplex(row.weights);
          clamp_covariances(row, 0.01, 10.0);
          break;
        }
      }
    }
    for (const WordMixture& row : params.word_table) {
      CHECK(row.components() <= cfg.max_components);
      double sum = 0.0;
      for (double x : row.weights) {
        sum += x;
        CHECK(x > 0.0);
      }
      CHECK(std::abs(sum - 1.0) < 1e-9);
      for (double v : row.var) {
        CHECK(v >= 0.01);
        CHECK(v <= 10.0);
      }
    }
  }
}

TEST_CASE("model file round trip") {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "gmsg_model_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "model.bin").string();
  const std::string path2 = (dir / "model2.bin").string();

  std::vector<std::string> tokens = {"alpha", "beta", "gamma"};
  std::vector<std::uint64_t> counts = {30, 20, 10};
  const Vocabulary vocab(std::move(tokens), std::move(counts));

  ModelParams params = tiny_model(3, 2, 4, Mode::Gmsg, 77);
  // Mixed component counts exercise the per-word K field.
  GrowthConfig gcfg;
  Rng rng(5);
  params.mode = Mode::Dgmsg;
  grow_component(params, 1, gcfg, rng);

  save_model(path, params, vocab);
  const LoadedModel loaded = load_model(path);

  CHECK(loaded.params.d == 4);
  CHECK(loaded.params.mode == Mode::Dgmsg);
  REQUIRE(loaded.vocab.size() == 3);
  CHECK(loaded.vocab.token(0) == "alpha");
  CHECK(loaded.vocab.count(2) == 10);
  CHECK(loaded.params.word_table[1].components() == 3);
  CHECK(loaded.params.context_table[1].components() == 2);
  // Weights survive exactly (f64); coordinates at f32 precision.
  CHECK(loaded.params.word_table[1].weights == params.word_table[1].weights);
  for (std::size_t i = 0; i < params.word_table[0].mu.size(); ++i) {
    CHECK(loaded.params.word_table[0].mu[i] ==
          static_cast<double>(static_cast<float>(params.word_table[0].mu[i])));
  }

  // Byte-identical re-serialization.
  save_model(path2, loaded.params, loaded.vocab);
  CHECK(read_file(path) == read_file(path2));

  SUBCASE("corrupt magic is a format error") {
    std::ofstream bad(path, std::ios::binary | std::ios::trunc);
    bad << "NOPE and then some trailing garbage";
    bad.close();
    CHECK_THROWS_AS(load_model(path), FormatError);
  }

  SUBCASE("truncated file is a format error") {
    const std::string full = read_file(path2);
    std::ofstream cut(path, std::ios::binary | std::ios::trunc);
    cut.write(full.data(), static_cast<std::streamsize>(full.size() / 2));
    cut.close();
    CHECK_THROWS_AS(load_model(path), FormatError);
  }

  SUBCASE("missing file is an I/O error") {
    CHECK_THROWS_AS(load_model((dir / "does_not_exist.bin").string()), IoError);
  }
}
