#include "stc/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "stc/embeddings.hpp"
#include "stc/errors.hpp"
#include "stc/eval.hpp"
#include "stc/io.hpp"
#include "stc/rng.hpp"

namespace stc::pipeline {

using nlohmann::json;

namespace {

std::string join(const std::string& dir, const std::string& name) {
  if (dir.empty()) return name;
  return dir.back() == '/' ? dir + name : dir + "/" + name;
}

std::string manifest_file(const PipelineConfig& c) {
  return join(c.out_dir, "manifest.json");
}

json load_manifest(const PipelineConfig& c) {
  const std::string path = manifest_file(c);
  if (!io::file_exists(path)) return json::object();
  std::ifstream in(path);
  json m = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (m.is_discarded()) return json::object();
  return m;
}

void save_manifest(const PipelineConfig& c, const json& m) {
  std::filesystem::create_directories(c.out_dir);
  std::ofstream out(manifest_file(c));
  if (!out) throw IoError("cannot write manifest: " + manifest_file(c));
  out << m.dump(2) << '\n';
}

json hash_files(const std::vector<std::string>& paths) {
  json h = json::object();
  for (const std::string& p : paths) {
    h[p] = io::hash_hex(io::file_hash(p));
  }
  return h;
}

// A stage is a no-op when its parameter fingerprint and input hashes match
// the manifest record and every output file still carries its recorded hash.
bool stage_up_to_date(const json& manifest, const std::string& stage,
                      const json& params, const json& inputs) {
  if (!manifest.contains(stage)) return false;
  const json& rec = manifest[stage];
  if (rec.value("params", json()) != params) return false;
  if (rec.value("inputs", json()) != inputs) return false;
  if (!rec.contains("outputs")) return false;
  for (const auto& [path, hash] : rec["outputs"].items()) {
    if (!io::file_exists(path)) return false;
    if (io::hash_hex(io::file_hash(path)) != hash.get<std::string>()) return false;
  }
  return true;
}

void record_stage(json& manifest, const std::string& stage, const json& params,
                  const json& inputs, const std::vector<std::string>& outputs,
                  std::uint64_t stage_seed) {
  json rec;
  rec["params"] = params;
  rec["inputs"] = inputs;
  rec["outputs"] = hash_files(outputs);
  rec["seed"] = stage_seed;
  manifest[stage] = rec;
}

corpus::Corpus load_corpus(const PipelineConfig& c) {
  if (c.texts_path.empty() || c.labels_path.empty()) {
    throw InputError("texts and labels paths must be configured");
  }
  return corpus::load_dataset(c.texts_path, c.labels_path, c.tokenize_mode());
}

embeddings::EmbeddingTable load_table(const PipelineConfig& c) {
  if (c.embeddings_path.empty()) {
    throw InputError("embeddings path must be configured");
  }
  return embeddings::load_embeddings(c.embeddings_path, c.embedding_dim,
                                     derive_seed(c.seed, "oov"));
}

std::vector<std::vector<Index>> docs_as_ids(const corpus::Corpus& corpus) {
  std::vector<std::vector<Index>> docs;
  docs.reserve(corpus.documents.size());
  for (const corpus::Document& d : corpus.documents) {
    std::vector<Index> ids;
    ids.reserve(d.tokens.size());
    for (const std::string& tok : d.tokens) ids.push_back(corpus.vocabulary.at(tok));
    docs.push_back(std::move(ids));
  }
  return docs;
}

Matrix model_embeddings(const corpus::Corpus& corpus,
                        const embeddings::EmbeddingTable& table) {
  Matrix e(table.dim(), static_cast<Index>(corpus.vocab_words.size()));
  for (std::size_t w = 0; w < corpus.vocab_words.size(); ++w) {
    e.col(static_cast<Index>(w)) = table.lookup_or_init(corpus.vocab_words[w]);
  }
  return e;
}

json reduce_params(const PipelineConfig& c) {
  return json{{"method", c.method},          {"q", c.q},
              {"weighting", c.weighting},    {"ae_weighting", c.ae_weighting},
              {"graph_k", c.graph_k},        {"sigma", c.graph_sigma},
              {"dataset", c.dataset},        {"tokenizer", c.tokenizer},
              {"seed", c.seed}};
}

json train_params(const PipelineConfig& c) {
  return json{{"filter_widths", c.cnn.filter_widths},
              {"feature_maps", c.cnn.feature_maps},
              {"k_top", c.cnn.k_top},
              {"s", c.cnn.s},
              {"learning_rate", c.cnn.learning_rate},
              {"batch_size", c.cnn.batch_size},
              {"dropout", c.cnn.dropout_rate},
              {"epochs", c.cnn.epochs},
              {"dev_fraction", c.dev_fraction},
              {"tokenizer", c.tokenizer},
              {"seed", c.seed}};
}

json eval_params(const PipelineConfig& c) {
  return json{{"kmeans_k", c.kmeans_k},
              {"restarts", c.kmeans_restarts},
              {"max_iters", c.kmeans_max_iters},
              {"tol", c.kmeans_tol},
              {"uniform_seeding", c.kmeans_uniform_seeding},
              {"trials", c.trials},
              {"baseline", c.baseline},
              {"method", c.method},
              {"seed", c.seed}};
}

bool is_raw_baseline(const PipelineConfig& c) {
  return c.method == "tf" || c.method == "tfidf";
}

}  // namespace

corpus::TokenizeMode PipelineConfig::tokenize_mode() const {
  if (tokenizer == "verbatim") return corpus::TokenizeMode::kVerbatim;
  if (tokenizer == "lowercase_strip") return corpus::TokenizeMode::kLowercaseStrip;
  throw ParameterError("unknown tokenizer: " + tokenizer);
}

corpus::Weighting PipelineConfig::reduction_weighting() const {
  if (weighting == "tf") return corpus::Weighting::kTf;
  if (weighting == "tfidf") return corpus::Weighting::kTfIdf;
  throw ParameterError("unknown weighting: " + weighting);
}

corpus::Weighting PipelineConfig::ae_weighting_enum() const {
  if (ae_weighting == "tf") return corpus::Weighting::kTf;
  if (ae_weighting == "tfidf") return corpus::Weighting::kTfIdf;
  throw ParameterError("unknown ae_weighting: " + ae_weighting);
}

void PipelineConfig::validate() const {
  tokenize_mode();
  reduction_weighting();
  ae_weighting_enum();
  if (method != "ae" && method != "lsa" && method != "le" && method != "lpi") {
    if (is_raw_baseline(*this)) {
      if (!baseline) {
        throw ParameterError("method '" + method + "' requires --baseline");
      }
    } else {
      throw ParameterError("unknown method: " + method);
    }
  }
  if (q < 0) throw ParameterError("q must be >= 0");
  if (graph_k < 1) throw ParameterError("graph_k must be >= 1");
  if (!(graph_sigma > 0)) throw ParameterError("graph_sigma must be > 0");
  if (trials < 1) throw ParameterError("trials must be >= 1");
  if (!(dev_fraction >= 0.0 && dev_fraction < 1.0)) {
    throw ParameterError("dev_fraction must lie in [0, 1)");
  }
  if (out_dir.empty()) throw ParameterError("output directory must be set");
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  PipelineConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      bool blank = true;
      for (char c : line) {
        if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
      }
      if (blank) continue;
      throw ParseError("config line " + std::to_string(line_no) +
                       ": expected key=value");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    apply_config_line(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return config;
}

void apply_config_line(PipelineConfig& c, const std::string& key,
                       const std::string& value) {
  auto as_index = [&](const std::string& v) -> Index {
    try {
      return static_cast<Index>(std::stoll(v));
    } catch (...) {
      throw ParseError("config key '" + key + "': not an integer: " + v);
    }
  };
  auto as_double = [&](const std::string& v) -> double {
    try {
      return std::stod(v);
    } catch (...) {
      throw ParseError("config key '" + key + "': not a number: " + v);
    }
  };
  auto as_bool = [&](const std::string& v) -> bool {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ParseError("config key '" + key + "': not a boolean: " + v);
  };
  auto as_index_list = [&](const std::string& v) -> std::vector<Index> {
    std::vector<Index> out;
    std::istringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(as_index(item));
    return out;
  };

  if (key == "texts") c.texts_path = value;
  else if (key == "labels") c.labels_path = value;
  else if (key == "embeddings") c.embeddings_path = value;
  else if (key == "dataset") c.dataset = value;
  else if (key == "tokenizer") c.tokenizer = value;
  else if (key == "method") c.method = value;
  else if (key == "q") c.q = as_index(value);
  else if (key == "weighting") c.weighting = value;
  else if (key == "ae_weighting") c.ae_weighting = value;
  else if (key == "graph_k") c.graph_k = as_index(value);
  else if (key == "graph_sigma") c.graph_sigma = as_double(value);
  else if (key == "embedding_dim") c.embedding_dim = as_index(value);
  else if (key == "s") c.cnn.s = as_index(value);
  else if (key == "cnn_filter_widths") {
    c.cnn.filter_widths = as_index_list(value);
    c.cnn.num_layers = static_cast<int>(c.cnn.filter_widths.size());
  } else if (key == "cnn_feature_maps") c.cnn.feature_maps = as_index_list(value);
  else if (key == "cnn_k_top") c.cnn.k_top = as_index(value);
  else if (key == "cnn_learning_rate") c.cnn.learning_rate = as_double(value);
  else if (key == "cnn_batch_size") c.cnn.batch_size = as_index(value);
  else if (key == "cnn_dropout") c.cnn.dropout_rate = as_double(value);
  else if (key == "cnn_epochs") c.cnn.epochs = as_index(value);
  else if (key == "kmeans_k") c.kmeans_k = as_index(value);
  else if (key == "kmeans_restarts") c.kmeans_restarts = as_index(value);
  else if (key == "kmeans_max_iters") c.kmeans_max_iters = as_index(value);
  else if (key == "kmeans_tol") c.kmeans_tol = as_double(value);
  else if (key == "kmeans_uniform_seeding") c.kmeans_uniform_seeding = as_bool(value);
  else if (key == "trials") c.trials = as_index(value);
  else if (key == "seed") c.seed = static_cast<std::uint64_t>(std::stoull(value));
  else if (key == "dev_fraction") c.dev_fraction = as_double(value);
  else if (key == "baseline") c.baseline = as_bool(value);
  else if (key == "export_features") c.export_features = as_bool(value);
  else if (key == "out") c.out_dir = value;
  else throw ParseError("unknown config key: " + key);
}

Index resolve_q(const PipelineConfig& config, int num_classes, Index embedding_dim) {
  if (config.q > 0) return config.q;
  if (config.method == "ae") return embedding_dim;
  // best subspace dimensions reported for the three reference datasets
  static const std::map<std::string, std::map<std::string, Index>> best = {
      {"lsa", {{"searchsnippets", 10}, {"stackoverflow", 20}, {"biomedical", 20}}},
      {"le", {{"searchsnippets", 20}, {"stackoverflow", 70}, {"biomedical", 30}}},
      {"lpi", {{"searchsnippets", 20}, {"stackoverflow", 80}, {"biomedical", 30}}},
  };
  const auto method_it = best.find(config.method);
  if (method_it != best.end() && !config.dataset.empty()) {
    const auto ds_it = method_it->second.find(config.dataset);
    if (ds_it != method_it->second.end()) return ds_it->second;
  }
  return static_cast<Index>(num_classes);
}

std::string stats_path(const PipelineConfig& c) { return join(c.out_dir, "corpus_stats.txt"); }
std::string coverage_path(const PipelineConfig& c) { return join(c.out_dir, "coverage.txt"); }
std::string term_matrix_path(const PipelineConfig& c, corpus::Weighting w) {
  return join(c.out_dir, w == corpus::Weighting::kTf ? "term_tf.txt" : "term_tfidf.txt");
}
std::string codes_y_path(const PipelineConfig& c) { return join(c.out_dir, "codes_y.txt"); }
std::string codes_b_path(const PipelineConfig& c) { return join(c.out_dir, "codes_b.txt"); }
std::string mapping_path(const PipelineConfig& c) { return join(c.out_dir, "mapping.txt"); }
std::string checkpoint_path(const PipelineConfig& c) { return join(c.out_dir, "model.ckpt"); }
std::string loss_history_path(const PipelineConfig& c) { return join(c.out_dir, "loss_history.csv"); }
std::string metrics_path(const PipelineConfig& c) { return join(c.out_dir, "metrics.csv"); }
std::string assignments_path(const PipelineConfig& c) { return join(c.out_dir, "assignments.csv"); }
std::string features_path(const PipelineConfig& c) { return join(c.out_dir, "features.txt"); }

StageStatus cmd_prepare(const PipelineConfig& config) {
  config.validate();
  json manifest = load_manifest(config);
  const json params = json{{"tokenizer", config.tokenizer},
                           {"dataset", config.dataset},
                           {"embedding_dim", config.embedding_dim},
                           {"seed", config.seed}};
  const json inputs = hash_files({config.texts_path, config.labels_path,
                                  config.embeddings_path});
  StageStatus status;
  status.manifest_path = manifest_file(config);
  if (stage_up_to_date(manifest, "prepare", params, inputs)) {
    status.skipped = true;
    return status;
  }

  corpus::Corpus corpus = load_corpus(config);
  embeddings::EmbeddingTable table = load_table(config);
  const corpus::CorpusStats stats = corpus.stats();
  const embeddings::Coverage cov = embeddings::coverage(table, corpus);

  std::filesystem::create_directories(config.out_dir);
  {
    std::ofstream out(stats_path(config));
    if (!out) throw IoError("cannot write " + stats_path(config));
    char line[256];
    out << "dataset\tC\tNum\tLen\t|V|\n";
    std::snprintf(line, sizeof(line), "%s\t%d\t%lld\t%.2f/%lld\t%lld\n",
                  config.dataset.empty() ? "-" : config.dataset.c_str(),
                  corpus.num_classes,
                  static_cast<long long>(stats.num_documents), stats.mean_length,
                  static_cast<long long>(stats.max_length),
                  static_cast<long long>(stats.vocab_size));
    out << line;
  }
  {
    std::ofstream out(coverage_path(config));
    if (!out) throw IoError("cannot write " + coverage_path(config));
    char line[256];
    std::snprintf(line, sizeof(line), "|V| covered\t%lld (%.0f%%)\n",
                  static_cast<long long>(cov.vocab_covered),
                  100.0 * cov.vocab_fraction);
    out << line;
    std::snprintf(line, sizeof(line), "|T| covered\t%lld (%.0f%%)\n",
                  static_cast<long long>(cov.tokens_covered),
                  100.0 * cov.token_fraction);
    out << line;
  }
  io::write_sparse_text(term_matrix_path(config, corpus::Weighting::kTf),
                        term_matrix(corpus, corpus::Weighting::kTf).matrix);
  io::write_sparse_text(term_matrix_path(config, corpus::Weighting::kTfIdf),
                        term_matrix(corpus, corpus::Weighting::kTfIdf).matrix);

  record_stage(manifest, "prepare", params, inputs,
               {stats_path(config), coverage_path(config),
                term_matrix_path(config, corpus::Weighting::kTf),
                term_matrix_path(config, corpus::Weighting::kTfIdf)},
               config.seed);
  save_manifest(config, manifest);
  return status;
}

StageStatus cmd_reduce(const PipelineConfig& config) {
  config.validate();
  if (is_raw_baseline(config)) {
    throw ParameterError("reduce stage does not apply to raw " + config.method +
                         " baselines");
  }
  json manifest = load_manifest(config);
  const json params = reduce_params(config);
  const json inputs = hash_files({config.texts_path, config.labels_path,
                                  config.embeddings_path});
  StageStatus status;
  status.manifest_path = manifest_file(config);
  if (stage_up_to_date(manifest, "reduce", params, inputs)) {
    status.skipped = true;
    return status;
  }

  corpus::Corpus corpus = load_corpus(config);
  embeddings::EmbeddingTable table = load_table(config);
  const Index q = resolve_q(config, corpus.num_classes, table.dim());

  dimred::ReducedCodes codes;
  if (config.method == "ae") {
    codes = dimred::reduce_ae(corpus, table, config.ae_weighting_enum());
  } else {
    corpus::TermMatrix x = term_matrix(corpus, config.reduction_weighting());
    if (config.method == "lsa") {
      codes = dimred::reduce_lsa(x, q);
    } else {
      dimred::SimilarityGraph graph =
          dimred::build_graph(x, config.graph_k, config.graph_sigma);
      codes = config.method == "le" ? dimred::reduce_le(graph, q)
                                    : dimred::reduce_lpi(x, graph, q);
    }
  }
  dimred::BinaryCodes bits = dimred::binarize_median(codes);

  std::filesystem::create_directories(config.out_dir);
  io::write_matrix_text(codes_y_path(config), codes.y);
  io::write_bit_matrix(codes_b_path(config), bits.b);
  std::vector<std::string> outputs = {codes_y_path(config), codes_b_path(config)};
  if (codes.mapping.has_value()) {
    io::write_matrix_text(mapping_path(config), *codes.mapping);
    outputs.push_back(mapping_path(config));
  }

  record_stage(manifest, "reduce", params, inputs, outputs, config.seed);
  manifest["reduce"]["resolved_q"] = codes.q;
  manifest["reduce"]["zero_weight_documents"] = codes.zero_weight_documents;
  save_manifest(config, manifest);
  return status;
}

StageStatus cmd_train(const PipelineConfig& config) {
  config.validate();
  if (config.baseline) {
    throw ParameterError("baseline mode skips CNN training");
  }
  json manifest = load_manifest(config);
  if (!io::file_exists(codes_b_path(config))) {
    throw InputError("binary codes not found at " + codes_b_path(config) +
                     "; run the reduce stage first");
  }
  const json params = train_params(config);
  const json inputs = hash_files({config.texts_path, config.labels_path,
                                  config.embeddings_path, codes_b_path(config)});
  StageStatus status;
  status.manifest_path = manifest_file(config);
  if (stage_up_to_date(manifest, "train", params, inputs)) {
    status.skipped = true;
    return status;
  }

  corpus::Corpus corpus = load_corpus(config);
  embeddings::EmbeddingTable table = load_table(config);
  BitMatrix codes = io::read_bit_matrix(codes_b_path(config));
  const Index n = static_cast<Index>(corpus.documents.size());
  if (codes.cols() != n) {
    throw InputError("binary codes cover " + std::to_string(codes.cols()) +
                     " documents but the corpus has " + std::to_string(n));
  }

  cnn::CnnConfig cnn_cfg = config.cnn;
  cnn_cfg.d_w = table.dim();
  cnn_cfg.q = codes.rows();
  if (cnn_cfg.s <= 0) cnn_cfg.s = std::max<Index>(corpus.stats().max_length, 1);
  cnn_cfg.seed = derive_seed(config.seed, "train");
  cnn_cfg.validate();

  std::vector<Index> train_idx, dev_idx;
  if (config.dev_fraction > 0.0) {
    std::tie(train_idx, dev_idx) =
        dev_split(corpus, config.dev_fraction, derive_seed(config.seed, "dev_split"));
  } else {
    for (Index i = 0; i < n; ++i) train_idx.push_back(i);
  }

  cnn::CnnModel model = cnn::init_model(cnn_cfg, model_embeddings(corpus, table));
  cnn::TrainHistory history =
      cnn::train(model, docs_as_ids(corpus), codes, train_idx, dev_idx);

  std::filesystem::create_directories(config.out_dir);
  cnn::save_checkpoint(checkpoint_path(config), model);
  {
    std::ofstream out(loss_history_path(config));
    if (!out) throw IoError("cannot write " + loss_history_path(config));
    out << "epoch,mean_loss,dev_loss\n";
    char line[128];
    for (std::size_t e = 0; e < history.epoch_mean_loss.size(); ++e) {
      std::snprintf(line, sizeof(line), "%zu,%.9g,%.9g\n", e + 1,
                    history.epoch_mean_loss[e], history.epoch_dev_loss[e]);
      out << line;
    }
  }

  record_stage(manifest, "train", params, inputs,
               {checkpoint_path(config), loss_history_path(config)},
               cnn_cfg.seed);
  save_manifest(config, manifest);
  return status;
}

StageStatus cmd_cluster_eval(const PipelineConfig& config) {
  config.validate();
  json manifest = load_manifest(config);

  std::vector<std::string> input_files = {config.texts_path, config.labels_path};
  if (config.baseline) {
    if (!is_raw_baseline(config)) input_files.push_back(codes_y_path(config));
  } else {
    input_files.push_back(checkpoint_path(config));
  }
  for (const std::string& f : input_files) {
    if (!io::file_exists(f)) {
      throw InputError("required input missing: " + f);
    }
  }
  const json params = eval_params(config);
  const json inputs = hash_files(input_files);
  StageStatus status;
  status.manifest_path = manifest_file(config);
  if (stage_up_to_date(manifest, "cluster_eval", params, inputs)) {
    status.skipped = true;
    return status;
  }

  corpus::Corpus corpus = load_corpus(config);
  const std::vector<int> gold = corpus.labels();

  Matrix features;
  if (config.baseline) {
    if (is_raw_baseline(config)) {
      const corpus::Weighting w = config.method == "tf" ? corpus::Weighting::kTf
                                                        : corpus::Weighting::kTfIdf;
      features = Matrix(term_matrix(corpus, w).matrix);
    } else {
      features = io::read_matrix_text(codes_y_path(config));
    }
  } else {
    cnn::CnnModel model = cnn::load_checkpoint(checkpoint_path(config));
    features = cnn::extract_features(model, docs_as_ids(corpus));
  }

  Index zero_columns = 0;
  Matrix normalized = cluster::normalize_columns(features, &zero_columns);

  cluster::KMeansConfig km;
  km.k = config.kmeans_k > 0 ? config.kmeans_k
                             : static_cast<Index>(corpus.num_classes);
  km.restarts = config.kmeans_restarts;
  km.max_iters = config.kmeans_max_iters;
  km.tol = config.kmeans_tol;
  km.plus_plus_seeding = !config.kmeans_uniform_seeding;

  std::vector<double> accs, nmis;
  cluster::ClusterAssignment best;
  double best_objective = 0.0;
  bool have_best = false;
  for (Index trial = 0; trial < config.trials; ++trial) {
    km.seed = derive_seed(config.seed, "trial", static_cast<std::uint64_t>(trial));
    cluster::ClusterAssignment assignment = cluster::kmeans_restarts(normalized, km);
    accs.push_back(eval::accuracy(gold, assignment.labels).acc);
    nmis.push_back(eval::nmi(gold, assignment.labels));
    if (!have_best || assignment.objective < best_objective) {
      best_objective = assignment.objective;
      best = std::move(assignment);
      have_best = true;
    }
  }

  std::filesystem::create_directories(config.out_dir);
  {
    std::ofstream out(metrics_path(config));
    if (!out) throw IoError("cannot write " + metrics_path(config));
    out << "trial,acc,nmi\n";
    char line[128];
    for (std::size_t t = 0; t < accs.size(); ++t) {
      std::snprintf(line, sizeof(line), "%zu,%.6f,%.6f\n", t + 1, accs[t], nmis[t]);
      out << line;
    }
    out << "mean±std," << eval::format_mean_std(accs) << ','
        << eval::format_mean_std(nmis) << '\n';
  }
  {
    std::ofstream out(assignments_path(config));
    if (!out) throw IoError("cannot write " + assignments_path(config));
    out << "doc_id,cluster\n";
    for (std::size_t d = 0; d < best.labels.size(); ++d) {
      out << d << ',' << best.labels[d] << '\n';
    }
  }
  std::vector<std::string> outputs = {metrics_path(config), assignments_path(config)};
  if (config.export_features) {
    io::write_matrix_text(features_path(config), features);
    outputs.push_back(features_path(config));
  }

  record_stage(manifest, "cluster_eval", params, inputs, outputs, config.seed);
  manifest["cluster_eval"]["zero_feature_columns"] = zero_columns;
  save_manifest(config, manifest);
  return status;
}

void cmd_pipeline(const PipelineConfig& config) {
  config.validate();
  cmd_prepare(config);
  if (!is_raw_baseline(config)) cmd_reduce(config);
  if (!config.baseline) cmd_train(config);
  cmd_cluster_eval(config);
}

}  // namespace stc::pipeline
