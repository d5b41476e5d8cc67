// Command-line front end for the short-text clustering pipeline.
//
// Stages: prepare -> reduce -> train -> cluster-eval, or `pipeline` for all
// of them. Exit codes: 0 success, 1 validation error, 2 numeric failure.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "stc/errors.hpp"
#include "stc/pipeline.hpp"

namespace {

struct CliOptions {
  std::string config_path;
  std::string texts, labels, embeddings, dataset, tokenizer;
  std::string method;
  long long q = -1;
  long long trials = -1;
  long long graph_k = -1;
  double graph_sigma = -1.0;
  long long epochs = -1;
  unsigned long long seed = 0;
  bool seed_given = false;
  bool baseline = false;
  bool export_features = false;
  std::string out_dir;
};

stc::pipeline::PipelineConfig build_config(const CliOptions& opt) {
  stc::pipeline::PipelineConfig config;
  if (!opt.config_path.empty()) {
    config = stc::pipeline::load_config(opt.config_path);
  }
  if (!opt.texts.empty()) config.texts_path = opt.texts;
  if (!opt.labels.empty()) config.labels_path = opt.labels;
  if (!opt.embeddings.empty()) config.embeddings_path = opt.embeddings;
  if (!opt.dataset.empty()) config.dataset = opt.dataset;
  if (!opt.tokenizer.empty()) config.tokenizer = opt.tokenizer;
  if (!opt.method.empty()) config.method = opt.method;
  if (opt.q >= 0) config.q = static_cast<stc::Index>(opt.q);
  if (opt.trials >= 0) config.trials = static_cast<stc::Index>(opt.trials);
  if (opt.graph_k >= 0) config.graph_k = static_cast<stc::Index>(opt.graph_k);
  if (opt.graph_sigma > 0) config.graph_sigma = opt.graph_sigma;
  if (opt.epochs >= 0) config.cnn.epochs = static_cast<stc::Index>(opt.epochs);
  if (opt.seed_given) config.seed = opt.seed;
  if (opt.baseline) config.baseline = true;
  if (opt.export_features) config.export_features = true;
  if (!opt.out_dir.empty()) config.out_dir = opt.out_dir;
  return config;
}

void report(const stc::pipeline::StageStatus& status, const char* stage) {
  if (status.skipped) {
    std::printf("[%s] up to date, skipped\n", stage);
  } else {
    std::printf("[%s] done\n", stage);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"short-text clustering: reduction codes, convolutional features, k-means"};
  app.require_subcommand(1);
  app.fallthrough();

  CliOptions opt;
  app.add_option("--config", opt.config_path, "key=value config file");
  app.add_option("--texts", opt.texts, "documents, one per line");
  app.add_option("--labels", opt.labels, "labels, one per line");
  app.add_option("--embeddings", opt.embeddings, "word vectors in text format");
  app.add_option("--dataset", opt.dataset,
                 "dataset name for per-method q defaults");
  app.add_option("--tokenizer", opt.tokenizer, "verbatim | lowercase_strip");
  app.add_option("--method", opt.method,
                 "ae | lsa | le | lpi (tf | tfidf with --baseline)");
  app.add_option("--q", opt.q, "code dimensionality (0 = default)");
  app.add_option("--trials", opt.trials, "evaluation trials");
  app.add_option("--graph-k", opt.graph_k, "kNN graph neighbors");
  app.add_option("--graph-sigma", opt.graph_sigma, "heat kernel width");
  app.add_option("--epochs", opt.epochs, "training epochs");
  auto* seed_opt = app.add_option("--seed", opt.seed, "master seed");
  app.add_flag("--baseline", opt.baseline, "cluster the reduced codes directly");
  app.add_flag("--export-features", opt.export_features,
               "write the clustered feature matrix");
  app.add_option("--out", opt.out_dir, "output directory");

  auto* sub_prepare = app.add_subcommand("prepare", "load corpus, write stats and term matrices");
  auto* sub_reduce = app.add_subcommand("reduce", "produce codes Y and bits B");
  auto* sub_train = app.add_subcommand("train", "fit the network to the binary codes");
  auto* sub_eval = app.add_subcommand("cluster-eval", "cluster features and score ACC/NMI");
  auto* sub_all = app.add_subcommand("pipeline", "run every stage in order");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  opt.seed_given = seed_opt->count() > 0;

  try {
    stc::pipeline::PipelineConfig config = build_config(opt);
    if (sub_prepare->parsed()) {
      report(stc::pipeline::cmd_prepare(config), "prepare");
    } else if (sub_reduce->parsed()) {
      report(stc::pipeline::cmd_reduce(config), "reduce");
    } else if (sub_train->parsed()) {
      report(stc::pipeline::cmd_train(config), "train");
    } else if (sub_eval->parsed()) {
      report(stc::pipeline::cmd_cluster_eval(config), "cluster-eval");
    } else if (sub_all->parsed()) {
      stc::pipeline::cmd_pipeline(config);
      std::printf("[pipeline] done\n");
    }
  } catch (const stc::NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 2;
  } catch (const stc::InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
