#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stc/cluster.hpp"
#include "stc/cnn.hpp"
#include "stc/corpus.hpp"
#include "stc/dimred.hpp"
#include "stc/types.hpp"

namespace stc::pipeline {

/// Everything the stage commands need, resolved from defaults, an optional
/// key=value config file, and command-line overrides (highest precedence).
struct PipelineConfig {
  std::string texts_path;
  std::string labels_path;
  std::string embeddings_path;
  std::string dataset;  // optional: searchsnippets | stackoverflow | biomedical
  std::string tokenizer = "verbatim";
  std::string method = "lpi";  // ae|lsa|le|lpi; tf|tfidf only with baseline
  Index q = 0;                 // 0 = per-method default
  std::string weighting = "tfidf";     // X for lsa/le/lpi
  std::string ae_weighting = "tf";
  Index graph_k = 15;
  double graph_sigma = 1.0;
  Index embedding_dim = 0;  // 0 = accept the file's dimension
  cnn::CnnConfig cnn;
  Index kmeans_k = 0;  // 0 = number of classes
  Index kmeans_restarts = 100;
  Index kmeans_max_iters = 300;
  double kmeans_tol = 1e-6;
  bool kmeans_uniform_seeding = false;
  Index trials = 5;
  std::uint64_t seed = 1;
  double dev_fraction = 0.1;
  bool baseline = false;
  bool export_features = false;
  std::string out_dir = "out";

  corpus::TokenizeMode tokenize_mode() const;
  corpus::Weighting reduction_weighting() const;
  corpus::Weighting ae_weighting_enum() const;
  void validate() const;
};

/// Parse a flat key=value file ('#' starts a comment).
PipelineConfig load_config(const std::string& path);
void apply_config_line(PipelineConfig& config, const std::string& key,
                       const std::string& value);

/// Per-method default code dimensionality; best known values when the
/// dataset is one of the named trios, else the class count.
Index resolve_q(const PipelineConfig& config, int num_classes, Index embedding_dim);

struct StageStatus {
  bool skipped = false;  // inputs and params unchanged, outputs intact
  std::string manifest_path;
};

StageStatus cmd_prepare(const PipelineConfig& config);
StageStatus cmd_reduce(const PipelineConfig& config);
StageStatus cmd_train(const PipelineConfig& config);
StageStatus cmd_cluster_eval(const PipelineConfig& config);
void cmd_pipeline(const PipelineConfig& config);

// artifact names inside out_dir
std::string stats_path(const PipelineConfig&);
std::string coverage_path(const PipelineConfig&);
std::string term_matrix_path(const PipelineConfig&, corpus::Weighting w);
std::string codes_y_path(const PipelineConfig&);
std::string codes_b_path(const PipelineConfig&);
std::string mapping_path(const PipelineConfig&);
std::string checkpoint_path(const PipelineConfig&);
std::string loss_history_path(const PipelineConfig&);
std::string metrics_path(const PipelineConfig&);
std::string assignments_path(const PipelineConfig&);
std::string features_path(const PipelineConfig&);

}  // namespace stc::pipeline
