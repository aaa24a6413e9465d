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

// Command-line front door: train, eval, nn, senses, stats.
// Machine-readable TSV goes to stdout; progress and diagnostics to stderr.
// Exit codes: 0 success, 1 usage, 2 I/O, 3 data format.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gmsg/errors.hpp"
#include "gmsg/evaluation.hpp"
#include "gmsg/model.hpp"
#include "gmsg/trainer.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitFormat = 3;

struct TrainArgs {
  std::string corpus;
  std::string model_out;
  std::string dump_vocab;
  std::string mode = "gmsg";
  bool no_lowercase = false;
  gmsg::TrainingConfig cfg;
};

void add_config_flags(CLI::App& cmd, TrainArgs& args) {
  auto& cfg = args.cfg;
  cmd.add_option("--sr", cfg.sr, "negative-sampling exponent");
  cmd.add_option("--window", cfg.window, "context window size N");
  cmd.add_option("-d,--d", cfg.d, "dimensionality of means");
  cmd.add_option("--initial-rate", cfg.initial_rate, "initial learning rate");
  cmd.add_option("--margin", cfg.margin, "max-margin kappa (log-similarity units)");
  cmd.add_option("--l2", cfg.l2, "L2 regularization lambda");
  cmd.add_option("--min-count", cfg.min_count, "drop tokens with fewer occurrences");
  cmd.add_option("--iterations", cfg.iterations, "training epochs");
  cmd.add_option("-K,--K", cfg.K, "sense number per word");
  cmd.add_option("--xi", cfg.xi, "weight of a new Gaussian component");
  cmd.add_option("--gamma", cfg.gamma, "growth threshold on normalized similarity");
  cmd.add_option("--negatives-per-pair", cfg.negatives_per_pair,
                 "negative samples per positive pair");
  cmd.add_option("--m", cfg.m, "covariance eigenvalue lower bound");
  cmd.add_option("--M", cfg.M, "covariance eigenvalue upper bound");
  cmd.add_option("--seed", cfg.seed, "random seed");
  cmd.add_option("--max-components", cfg.max_components, "component cap per word (D-GMSG)");
  cmd.add_option("--workers", cfg.workers, "training worker threads");
  cmd.add_option("--objective-sample", cfg.objective_sample,
                 "examples held out for the per-epoch objective");
  cmd.add_option("--mode", args.mode, "model variant: sg | gsg | gmsg | dgmsg");
  cmd.add_flag("--no-lowercase", args.no_lowercase, "keep corpus case as-is");
}

int run_train(TrainArgs& args, const CLI::App& cmd) {
  const auto mode = gmsg::parse_mode(args.mode);
  if (!mode) throw gmsg::UsageError("unknown mode: " + args.mode);
  args.cfg.mode = *mode;
  args.cfg.lowercase = !args.no_lowercase;
  if ((args.cfg.mode == gmsg::Mode::SgEquivalent || args.cfg.mode == gmsg::Mode::Gsg) &&
      cmd.count("--K") == 0) {
    args.cfg.K = 1;  // sg/gsg are single-component variants
  }
  args.cfg.validate();

  gmsg::TrainOutput out = gmsg::train(args.corpus, args.cfg);

  if (!args.dump_vocab.empty()) {
    std::ofstream vf(args.dump_vocab);
    if (!vf) throw gmsg::IoError("cannot open vocab dump file: " + args.dump_vocab);
    out.vocab.dump_tsv(vf);
  }
  gmsg::save_model(args.model_out, out.params, out.vocab);

  for (std::size_t e = 0; e < out.report.mean_loss.size(); ++e) {
    std::cout << e << '\t' << out.report.mean_loss[e] << '\t'
              << out.report.hinge_active_fraction[e] << '\t'
              << out.report.growth_events[e] << '\n';
  }
  std::cerr << "trained " << out.vocab.size() << " words, " << out.report.examples_seen
            << " examples in " << out.report.wall_time_seconds << "s -> "
            << args.model_out << '\n';
  return 0;
}

int run_eval(const std::string& model_path, const std::string& dataset_path,
             const std::string& metric, int window, bool no_lowercase) {
  gmsg::SimilarityRule rule;
  if (metric == "avgsim") {
    rule = gmsg::SimilarityRule::AvgSim;
  } else if (metric == "maxsimc") {
    rule = gmsg::SimilarityRule::MaxSimC;
  } else {
    throw gmsg::UsageError("unknown metric: " + metric);
  }
  const gmsg::LoadedModel model = gmsg::load_model(model_path);
  const gmsg::EvalDataset dataset = gmsg::load_pair_dataset(dataset_path, !no_lowercase);
  const gmsg::EvalResult res =
      gmsg::evaluate(model.params, model.vocab, dataset, rule, window);
  std::cout << res.rho_x100 << '\t' << res.covered_pairs << '\t' << res.skipped_pairs
            << '\n';
  return 0;
}

// phi-weighted mean of a word's mixture.
std::vector<double> pooled_mean(const gmsg::MixtureView& mix) {
  std::vector<double> mean(mix.dim, 0.0);
  for (std::size_t i = 0; i < mix.components(); ++i) {
    for (std::size_t k = 0; k < mix.dim; ++k) {
      mean[k] += mix.weights[i] * mix.mu[i * mix.dim + k];
    }
  }
  return mean;
}

int run_nn(const std::string& model_path, const std::string& word, int top,
           const std::string& metric, bool no_lowercase) {
  if (top < 1) throw gmsg::UsageError("--top must be >= 1");
  const gmsg::LoadedModel model = gmsg::load_model(model_path);
  std::string query = word;
  if (!no_lowercase) {
    std::transform(query.begin(), query.end(), query.begin(),
                   [](unsigned char c) { return std::tolower(c); });
  }
  const gmsg::WordId w = model.vocab.id_of(query);
  if (w == gmsg::kOovId) throw gmsg::UsageError("word not in vocabulary: " + query);

  struct Scored {
    gmsg::WordId id;
    double score;
  };
  std::vector<Scored> scored;
  scored.reserve(model.vocab.size() - 1);

  if (metric == "logsim") {
    for (std::size_t u = 0; u < model.vocab.size(); ++u) {
      const auto id = static_cast<gmsg::WordId>(u);
      if (id == w) continue;
      scored.push_back({id, gmsg::avg_sim(model.params, w, id)});
    }
  } else if (metric == "euclid") {
    const std::vector<double> qm = pooled_mean(model.params.word(w));
    for (std::size_t u = 0; u < model.vocab.size(); ++u) {
      const auto id = static_cast<gmsg::WordId>(u);
      if (id == w) continue;
      const std::vector<double> um = pooled_mean(model.params.word(id));
      double dist_sq = 0.0;
      for (std::size_t k = 0; k < qm.size(); ++k) {
        const double diff = qm[k] - um[k];
        dist_sq += diff * diff;
      }
      // Negated distance keeps the list in descending-similarity order.
      scored.push_back({id, -std::sqrt(dist_sq)});
    }
  } else {
    throw gmsg::UsageError("unknown metric: " + metric);
  }

  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(top), scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k),
                    scored.end(), [](const Scored& a, const Scored& b) {
                      if (a.score != b.score) return a.score > b.score;
                      return a.id < b.id;
                    });
  for (std::size_t i = 0; i < k; ++i) {
    std::cout << model.vocab.token(scored[i].id) << '\t' << scored[i].score << '\n';
  }
  return 0;
}

int run_senses(const std::string& model_path, const std::string& word,
               const std::string& context, bool no_lowercase, int neighbors) {
  const gmsg::LoadedModel model = gmsg::load_model(model_path);
  std::string query = word;
  if (!no_lowercase) {
    std::transform(query.begin(), query.end(), query.begin(),
                   [](unsigned char c) { return std::tolower(c); });
  }
  const gmsg::WordId w = model.vocab.id_of(query);
  if (w == gmsg::kOovId) throw gmsg::UsageError("word not in vocabulary: " + query);

  std::vector<gmsg::WordId> context_ids;
  for (const std::string& tok : gmsg::tokenize(context, !no_lowercase)) {
    const gmsg::WordId id = model.vocab.id_of(tok);
    if (id != gmsg::kOovId) context_ids.push_back(id);
  }
  const std::vector<double> posterior =
      gmsg::sense_posterior(model.params, w, context_ids);

  const gmsg::MixtureView fw = model.params.word(w);
  for (std::size_t i = 0; i < posterior.size(); ++i) {
    // Neighbors of this sense: component-vs-mixture kernel against every
    // other word.
    struct Scored {
      gmsg::WordId id;
      double score;
    };
    std::vector<Scored> scored;
    scored.reserve(model.vocab.size() - 1);
    for (std::size_t u = 0; u < model.vocab.size(); ++u) {
      const auto id = static_cast<gmsg::WordId>(u);
      if (id == w) continue;
      scored.push_back({id, gmsg::log_component_mixture_similarity(
                                fw.component(i), model.params.word(id))});
    }
    const std::size_t k =
        std::min<std::size_t>(static_cast<std::size_t>(neighbors), scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k),
                      scored.end(), [](const Scored& a, const Scored& b) {
                        if (a.score != b.score) return a.score > b.score;
                        return a.id < b.id;
                      });
    std::cout << i << '\t' << posterior[i] << '\t';
    for (std::size_t j = 0; j < k; ++j) {
      if (j) std::cout << ' ';
      std::cout << model.vocab.token(scored[j].id);
    }
    std::cout << '\n';
  }
  return 0;
}

int run_stats(const std::string& model_path, const std::string& export_tsv) {
  const gmsg::LoadedModel model = gmsg::load_model(model_path);

  if (!export_tsv.empty()) {
    std::ofstream out(export_tsv);
    if (!out) throw gmsg::IoError("cannot open export file: " + export_tsv);
    for (std::size_t u = 0; u < model.vocab.size(); ++u) {
      const auto id = static_cast<gmsg::WordId>(u);
      out << model.vocab.token(id);
      for (const double x : pooled_mean(model.params.word(id))) out << '\t' << x;
      out << '\n';
    }
  }

  std::map<std::size_t, std::size_t> histogram;
  for (const gmsg::WordMixture& row : model.params.word_table) {
    histogram[row.components()]++;
  }
  std::cout << "vocab_size\t" << model.vocab.size() << '\n';
  std::cout << "d\t" << model.params.d << '\n';
  std::cout << "mode\t" << gmsg::mode_name(model.params.mode) << '\n';
  for (const auto& [k, count] : histogram) {
    std::cout << k << '\t' << count << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian mixture word embeddings"};
  app.require_subcommand(1);

  TrainArgs train_args;
  CLI::App* train_cmd = app.add_subcommand("train", "train a model on a text corpus");
  train_cmd->add_option("corpus", train_args.corpus, "plain-text corpus file")->required();
  train_cmd->add_option("model_out", train_args.model_out, "output model file")->required();
  train_cmd->add_option("--dump-vocab", train_args.dump_vocab,
                        "write `token \\t count` TSV after the vocabulary build");
  add_config_flags(*train_cmd, train_args);

  std::string eval_model, eval_dataset, eval_metric = "avgsim";
  int eval_window = 5;
  bool eval_no_lowercase = false;
  CLI::App* eval_cmd = app.add_subcommand("eval", "score a word-similarity benchmark");
  eval_cmd->add_option("model", eval_model, "model file")->required();
  eval_cmd->add_option("dataset", eval_dataset, "TSV benchmark file")->required();
  eval_cmd->add_option("--metric", eval_metric, "avgsim | maxsimc");
  eval_cmd->add_option("--window", eval_window, "context window for maxsimc");
  eval_cmd->add_flag("--no-lowercase", eval_no_lowercase, "keep dataset case as-is");

  std::string nn_model, nn_word, nn_metric = "logsim";
  int nn_top = 10;
  bool nn_no_lowercase = false;
  CLI::App* nn_cmd = app.add_subcommand("nn", "nearest neighbors of a word");
  nn_cmd->add_option("model", nn_model, "model file")->required();
  nn_cmd->add_option("word", nn_word, "query word")->required();
  nn_cmd->add_option("--top", nn_top, "neighbors to print");
  nn_cmd->add_option("--metric", nn_metric, "logsim | euclid");
  nn_cmd->add_flag("--no-lowercase", nn_no_lowercase, "keep query case as-is");

  std::string senses_model, senses_word, senses_context;
  bool senses_no_lowercase = false;
  int senses_neighbors = 5;
  CLI::App* senses_cmd =
      app.add_subcommand("senses", "sense posterior of a word in a context");
  senses_cmd->add_option("model", senses_model, "model file")->required();
  senses_cmd->add_option("word", senses_word, "query word")->required();
  senses_cmd->add_option("context", senses_context, "space-tokenized context string");
  senses_cmd->add_option("--neighbors", senses_neighbors, "neighbor words per sense");
  senses_cmd->add_flag("--no-lowercase", senses_no_lowercase, "keep case as-is");

  std::string stats_model, stats_export;
  CLI::App* stats_cmd = app.add_subcommand("stats", "model summary and sense histogram");
  stats_cmd->add_option("model", stats_model, "model file")->required();
  stats_cmd->add_option("--export-tsv", stats_export,
                        "write `token \\t mean...` TSV of phi-weighted means");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (train_cmd->parsed()) return run_train(train_args, *train_cmd);
    if (eval_cmd->parsed()) {
      return run_eval(eval_model, eval_dataset, eval_metric, eval_window,
                      eval_no_lowercase);
    }
    if (nn_cmd->parsed()) {
      return run_nn(nn_model, nn_word, nn_top, nn_metric, nn_no_lowercase);
    }
    if (senses_cmd->parsed()) {
      return run_senses(senses_model, senses_word, senses_context, senses_no_lowercase,
                        senses_neighbors);
    }
    if (stats_cmd->parsed()) return run_stats(stats_model, stats_export);
  } catch (const gmsg::UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const gmsg::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const gmsg::FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFormat;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
