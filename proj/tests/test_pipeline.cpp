#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "stc/errors.hpp"
#include "stc/io.hpp"
#include "stc/pipeline.hpp"
#include "stc/rng.hpp"

using namespace stc;
using namespace stc::pipeline;

namespace {

namespace fs = std::filesystem;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Workspace {
  std::string dir;
  explicit Workspace(const std::string& name) {
    dir = "/tmp/stc_pipe_" + name;
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Workspace() { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return dir + "/" + name; }
};

// 3 topics x 20 docs over disjoint 8-word vocabularies, plus an embedding
// file covering every word with random 8-d vectors.
void write_synthetic_dataset(const Workspace& ws, std::uint64_t seed) {
  Rng rng(seed);
  std::ofstream texts(ws.path("texts.txt"), std::ios::binary);
  std::ofstream labels(ws.path("labels.txt"), std::ios::binary);
  for (int topic = 0; topic < 3; ++topic) {
    for (int d = 0; d < 20; ++d) {
      const int len = 4 + static_cast<int>(rng.below(5));
      for (int t = 0; t < len; ++t) {
        if (t) texts << ' ';
        texts << "t" << topic << "w" << rng.below(8);
      }
      texts << '\n';
      labels << "topic" << topic << '\n';
    }
  }
  texts.close();
  labels.close();

  std::ofstream emb(ws.path("emb.txt"), std::ios::binary);
  emb << 24 << ' ' << 8 << '\n';
  for (int topic = 0; topic < 3; ++topic) {
    for (int w = 0; w < 8; ++w) {
      emb << "t" << topic << "w" << w;
      for (int i = 0; i < 8; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), " %.6f", rng.uniform(-0.5, 0.5));
        emb << buf;
      }
      emb << '\n';
    }
  }
}

PipelineConfig synthetic_config(const Workspace& ws, const std::string& out) {
  PipelineConfig c;
  c.texts_path = ws.path("texts.txt");
  c.labels_path = ws.path("labels.txt");
  c.embeddings_path = ws.path("emb.txt");
  c.method = "lsa";
  c.q = 4;
  c.cnn.feature_maps = {2, 2};
  c.cnn.filter_widths = {3, 3};
  c.cnn.k_top = 2;
  c.cnn.batch_size = 16;
  c.cnn.epochs = 2;
  c.cnn.learning_rate = 0.05;
  c.cnn.dropout_rate = 0.5;
  c.kmeans_restarts = 5;
  c.trials = 3;
  c.seed = 9;
  c.out_dir = ws.path(out);
  return c;
}

}  // namespace

TEST_CASE("matrix and sparse text formats round-trip") {
  Workspace ws("io");
  Rng rng(1);
  Matrix m(3, 5);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 5; ++j) m(i, j) = rng.uniform(-1e3, 1e3) / 7.0;
  io::write_matrix_text(ws.path("m.txt"), m);
  Matrix back = io::read_matrix_text(ws.path("m.txt"));
  CHECK(back == m);  // %.17g round-trips doubles exactly

  const std::string header = slurp(ws.path("m.txt")).substr(0, 4);
  CHECK(header == "3 5\n");

  SpMat sp = m.sparseView();
  io::write_sparse_text(ws.path("sp.txt"), sp);
  SpMat sp_back = io::read_sparse_text(ws.path("sp.txt"));
  CHECK(Matrix(sp_back) == Matrix(sp));

  BitMatrix b(2, 4);
  b << 1, 0, 0, 1,
       0, 1, 1, 0;
  io::write_bit_matrix(ws.path("b.txt"), b);
  CHECK(io::read_bit_matrix(ws.path("b.txt")) == b);
  CHECK(slurp(ws.path("b.txt")) == "2 4\n1001\n0110\n");
}

TEST_CASE("config file parsing and validation") {
  Workspace ws("cfg");
  {
    std::ofstream out(ws.path("run.cfg"));
    out << "# comment line\n";
    out << "texts = a.txt\n";
    out << "method = le\n";
    out << "q = 12\n";
    out << "graph_k=7\n";
    out << "cnn_feature_maps = 4,3\n";
    out << "cnn_epochs = 11\n";
    out << "seed = 77\n";
    out << "baseline = true\n";
  }
  PipelineConfig c = load_config(ws.path("run.cfg"));
  CHECK(c.texts_path == "a.txt");
  CHECK(c.method == "le");
  CHECK(c.q == 12);
  CHECK(c.graph_k == 7);
  CHECK(c.cnn.feature_maps == std::vector<Index>{4, 3});
  CHECK(c.cnn.epochs == 11);
  CHECK(c.seed == 77);
  CHECK(c.baseline);

  {
    std::ofstream out(ws.path("bad.cfg"));
    out << "nonsense_key = 1\n";
  }
  CHECK_THROWS_AS(load_config(ws.path("bad.cfg")), ParseError);

  PipelineConfig invalid;
  invalid.method = "tf";  // raw baseline method without the flag
  CHECK_THROWS_AS(invalid.validate(), ParameterError);
  invalid.baseline = true;
  CHECK_NOTHROW(invalid.validate());
}

TEST_CASE("resolve_q follows method and dataset defaults") {
  PipelineConfig c;
  c.method = "lpi";
  c.dataset = "stackoverflow";
  CHECK(resolve_q(c, 20, 48) == 80);
  c.method = "le";
  CHECK(resolve_q(c, 20, 48) == 70);
  c.dataset = "searchsnippets";
  CHECK(resolve_q(c, 8, 48) == 20);
  c.method = "lsa";
  CHECK(resolve_q(c, 8, 48) == 10);
  c.method = "ae";
  CHECK(resolve_q(c, 8, 48) == 48);  // q = d_w
  c.method = "lpi";
  c.dataset = "";
  CHECK(resolve_q(c, 13, 48) == 13);  // falls back to the class count
  c.q = 33;
  CHECK(resolve_q(c, 13, 48) == 33);  // explicit q wins
}

TEST_CASE("stages produce the documented artifacts") {
  Workspace ws("stages");
  write_synthetic_dataset(ws, 5);
  PipelineConfig c = synthetic_config(ws, "out");

  StageStatus prep = cmd_prepare(c);
  CHECK(!prep.skipped);
  CHECK(io::file_exists(stats_path(c)));
  CHECK(io::file_exists(coverage_path(c)));
  {
    const std::string stats = slurp(stats_path(c));
    CHECK(stats.find("C\tNum\tLen\t|V|") != std::string::npos);
    CHECK(stats.find("\t3\t60\t") != std::string::npos);  // C=3, n=60
    const std::string cov = slurp(coverage_path(c));
    CHECK(cov.find("|V| covered\t24 (100%)") != std::string::npos);
    CHECK(cov.find("|T| covered") != std::string::npos);
  }
  SpMat tf = io::read_sparse_text(term_matrix_path(c, corpus::Weighting::kTf));
  CHECK(tf.rows() == 24);
  CHECK(tf.cols() == 60);

  StageStatus red = cmd_reduce(c);
  CHECK(!red.skipped);
  Matrix y = io::read_matrix_text(codes_y_path(c));
  CHECK(y.rows() == 4);
  CHECK(y.cols() == 60);
  BitMatrix bits = io::read_bit_matrix(codes_b_path(c));
  CHECK(bits.rows() == 4);
  CHECK(bits.cols() == 60);

  StageStatus tr = cmd_train(c);
  CHECK(!tr.skipped);
  CHECK(io::file_exists(checkpoint_path(c)));
  {
    const std::string hist = slurp(loss_history_path(c));
    CHECK(hist.rfind("epoch,mean_loss,dev_loss\n", 0) == 0);
    CHECK(std::count(hist.begin(), hist.end(), '\n') == 3);  // header + 2 epochs
  }

  StageStatus ev = cmd_cluster_eval(c);
  CHECK(!ev.skipped);
  {
    const std::string metrics = slurp(metrics_path(c));
    CHECK(metrics.rfind("trial,acc,nmi\n", 0) == 0);
    CHECK(std::count(metrics.begin(), metrics.end(), '\n') == 5);  // header + 3 + summary
    CHECK(metrics.find("mean±std,") != std::string::npos);
    const std::string assign = slurp(assignments_path(c));
    CHECK(assign.rfind("doc_id,cluster\n", 0) == 0);
    CHECK(std::count(assign.begin(), assign.end(), '\n') == 61);
  }

  // rerunning with unchanged inputs is a no-op for every stage
  CHECK(cmd_prepare(c).skipped);
  CHECK(cmd_reduce(c).skipped);
  CHECK(cmd_train(c).skipped);
  CHECK(cmd_cluster_eval(c).skipped);

  // a config change invalidates only the stages it feeds
  PipelineConfig c2 = c;
  c2.trials = 2;
  CHECK(cmd_prepare(c2).skipped);
  CHECK(cmd_reduce(c2).skipped);
  CHECK(cmd_train(c2).skipped);
  CHECK(!cmd_cluster_eval(c2).skipped);

  // the manifest records the graph parameters and the resolved q
  const std::string manifest = slurp(prep.manifest_path);
  CHECK(manifest.find("\"sigma\"") != std::string::npos);
  CHECK(manifest.find("\"graph_k\"") != std::string::npos);
  CHECK(manifest.find("\"resolved_q\": 4") != std::string::npos);

  // switching the reduction method leaves prepare untouched
  PipelineConfig c3 = c;
  c3.method = "ae";
  CHECK(cmd_prepare(c3).skipped);
  CHECK(!cmd_reduce(c3).skipped);
  // averaged embeddings derive q from the embedding dimension
  CHECK(slurp(prep.manifest_path).find("\"resolved_q\": 8") != std::string::npos);
}

TEST_CASE("pipeline reruns are byte-identical") {
  Workspace ws("determinism");
  write_synthetic_dataset(ws, 6);
  PipelineConfig c1 = synthetic_config(ws, "out1");
  PipelineConfig c2 = synthetic_config(ws, "out2");
  cmd_pipeline(c1);
  cmd_pipeline(c2);
  CHECK(slurp(metrics_path(c1)) == slurp(metrics_path(c2)));
  CHECK(slurp(loss_history_path(c1)) == slurp(loss_history_path(c2)));
  CHECK(slurp(codes_y_path(c1)) == slurp(codes_y_path(c2)));
  CHECK(slurp(assignments_path(c1)) == slurp(assignments_path(c2)));
  CHECK(slurp(checkpoint_path(c1)) == slurp(checkpoint_path(c2)));

  // a different master seed changes the run
  PipelineConfig c3 = synthetic_config(ws, "out3");
  c3.seed = 123;
  cmd_pipeline(c3);
  CHECK(slurp(codes_y_path(c1)) == slurp(codes_y_path(c3)));  // reduce has no RNG
  CHECK(slurp(loss_history_path(c1)) != slurp(loss_history_path(c3)));
}

TEST_CASE("baseline mode clusters codes or raw term matrices") {
  Workspace ws("baseline");
  write_synthetic_dataset(ws, 7);

  PipelineConfig c = synthetic_config(ws, "out_base");
  c.baseline = true;
  c.method = "lsa";
  cmd_pipeline(c);
  CHECK(!io::file_exists(checkpoint_path(c)));  // no CNN in baseline mode
  CHECK(io::file_exists(metrics_path(c)));

  PipelineConfig raw = synthetic_config(ws, "out_raw");
  raw.baseline = true;
  raw.method = "tfidf";
  cmd_pipeline(raw);
  CHECK(!io::file_exists(codes_y_path(raw)));  // reduce skipped for raw features
  CHECK(io::file_exists(metrics_path(raw)));

  PipelineConfig bad = synthetic_config(ws, "out_bad");
  bad.method = "tf";
  CHECK_THROWS_AS(cmd_pipeline(bad), ParameterError);
}

TEST_CASE("empty documents survive the whole pipeline") {
  Workspace ws("empty_docs");
  write_synthetic_dataset(ws, 11);
  // splice two empty lines into the dataset
  {
    std::string texts = slurp(ws.path("texts.txt"));
    std::string labels = slurp(ws.path("labels.txt"));
    std::ofstream t(ws.path("texts.txt"), std::ios::binary);
    t << "\n" << texts << "\n";
    std::ofstream l(ws.path("labels.txt"), std::ios::binary);
    l << "topic0\n" << labels << "topic2\n";
  }
  PipelineConfig c = synthetic_config(ws, "out_empty");
  c.method = "ae";  // zero-weight column path
  cmd_pipeline(c);
  const std::string metrics = slurp(metrics_path(c));
  CHECK(metrics.find("mean±std,") != std::string::npos);
  const std::string assign = slurp(assignments_path(c));
  CHECK(std::count(assign.begin(), assign.end(), '\n') == 63);  // header + 62 docs

  const std::string manifest = slurp(ws.path("out_empty") + "/manifest.json");
  CHECK(manifest.find("\"zero_weight_documents\": 2") != std::string::npos);
}

TEST_CASE("train refuses to run without codes; eval without checkpoint") {
  Workspace ws("missing");
  write_synthetic_dataset(ws, 8);
  PipelineConfig c = synthetic_config(ws, "out_missing");
  cmd_prepare(c);
  CHECK_THROWS_AS(cmd_train(c), InputError);
  CHECK_THROWS_AS(cmd_cluster_eval(c), InputError);
}

TEST_CASE("cli binary: exit codes and end-to-end run") {
  Workspace ws("cli");
  write_synthetic_dataset(ws, 9);
  {
    std::ofstream out(ws.path("run.cfg"));
    out << "texts = " << ws.path("texts.txt") << "\n";
    out << "labels = " << ws.path("labels.txt") << "\n";
    out << "embeddings = " << ws.path("emb.txt") << "\n";
    out << "method = lsa\nq = 4\n";
    out << "cnn_feature_maps = 2,2\ncnn_filter_widths = 3,3\ncnn_k_top = 2\n";
    out << "cnn_batch_size = 16\ncnn_epochs = 1\n";
    out << "kmeans_restarts = 4\ntrials = 2\nseed = 3\n";
    out << "out = " << ws.path("cli_out") << "\n";
  }
  auto run = [&](const std::string& args) -> int {
    const std::string cmd = std::string(STC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    return raw < 0 ? raw : (raw >> 8);
  };
  CHECK(run("pipeline --config " + ws.path("run.cfg")) == 0);
  CHECK(io::file_exists(ws.path("cli_out") + "/metrics.csv"));
  // validation failure: missing label file
  CHECK(run("prepare --texts " + ws.path("texts.txt") + " --labels /nonexistent --embeddings " +
            ws.path("emb.txt") + " --out " + ws.path("cli_err")) == 1);
  // unknown method
  CHECK(run("pipeline --config " + ws.path("run.cfg") + " --method bogus") == 1);
}
