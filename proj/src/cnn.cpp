#include "stc/cnn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>

#include "stc/errors.hpp"
#include "stc/rng.hpp"

namespace stc::cnn {
namespace {

constexpr double kProbClamp = 1e-7;
constexpr double kAdagradEps = 1e-6;

double clamp_prob(double p) {
  return std::min(1.0 - kProbClamp, std::max(kProbClamp, p));
}

}  // namespace

Index CnnConfig::feature_dim() const {
  return rows_at(num_layers) * k_top * feature_maps[static_cast<std::size_t>(num_layers - 1)];
}

Index CnnConfig::rows_at(int layer) const { return d_w >> layer; }

Index CnnConfig::input_maps(int layer) const {
  return layer == 0 ? 1 : feature_maps[static_cast<std::size_t>(layer - 1)];
}

void CnnConfig::validate() const {
  if (num_layers < 1) throw ParameterError("cnn: num_layers must be >= 1");
  if (filter_widths.size() != static_cast<std::size_t>(num_layers) ||
      feature_maps.size() != static_cast<std::size_t>(num_layers)) {
    throw ParameterError("cnn: filter_widths and feature_maps must list one entry per layer");
  }
  for (Index m : filter_widths) {
    if (m < 1) throw ParameterError("cnn: filter widths must be >= 1");
  }
  for (Index f : feature_maps) {
    if (f < 1) throw ParameterError("cnn: feature map counts must be >= 1");
  }
  if (d_w < 1 || d_w % (Index{1} << num_layers) != 0) {
    throw ParameterError("cnn: d_w=" + std::to_string(d_w) +
                         " must be divisible by 2^L=" +
                         std::to_string(Index{1} << num_layers));
  }
  if (k_top < 1) throw ParameterError("cnn: k_top must be >= 1");
  if (s < 1) throw ParameterError("cnn: sentence width s must be >= 1");
  if (q < 1) throw ParameterError("cnn: output size q must be >= 1");
  if (!(learning_rate > 0)) throw ParameterError("cnn: learning_rate must be > 0");
  if (batch_size < 1) throw ParameterError("cnn: batch_size must be >= 1");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw ParameterError("cnn: dropout_rate must lie in [0, 1)");
  }
  if (epochs < 0) throw ParameterError("cnn: epochs must be >= 0");
}

CnnModel init_model(const CnnConfig& config, const Matrix& initial_embeddings) {
  config.validate();
  if (initial_embeddings.rows() != config.d_w) {
    throw ShapeError("cnn: embedding rows " + std::to_string(initial_embeddings.rows()) +
                     " do not match d_w=" + std::to_string(config.d_w));
  }
  CnnModel model;
  model.config = config;
  model.embeddings = initial_embeddings;
  model.acc_embeddings = Matrix::Zero(initial_embeddings.rows(), initial_embeddings.cols());

  Rng rng(derive_seed(config.seed, "cnn_init"));
  const int L = config.num_layers;
  model.conv_w.resize(static_cast<std::size_t>(L));
  model.conv_b.resize(static_cast<std::size_t>(L));
  model.acc_conv_w.resize(static_cast<std::size_t>(L));
  model.acc_conv_b.resize(static_cast<std::size_t>(L));
  for (int l = 0; l < L; ++l) {
    const Index rows = config.rows_at(l);
    const Index m = config.filter_widths[static_cast<std::size_t>(l)];
    const Index n_in = config.input_maps(l);
    const Index n_out = config.feature_maps[static_cast<std::size_t>(l)];
    const double bound = std::sqrt(6.0 / static_cast<double>(n_in * m + n_out * m));
    auto& layer_w = model.conv_w[static_cast<std::size_t>(l)];
    auto& layer_b = model.conv_b[static_cast<std::size_t>(l)];
    auto& acc_w = model.acc_conv_w[static_cast<std::size_t>(l)];
    auto& acc_b = model.acc_conv_b[static_cast<std::size_t>(l)];
    layer_w.resize(static_cast<std::size_t>(n_out));
    layer_b.resize(static_cast<std::size_t>(n_out));
    acc_w.resize(static_cast<std::size_t>(n_out));
    acc_b.resize(static_cast<std::size_t>(n_out));
    for (Index o = 0; o < n_out; ++o) {
      auto& out_w = layer_w[static_cast<std::size_t>(o)];
      auto& aout_w = acc_w[static_cast<std::size_t>(o)];
      out_w.resize(static_cast<std::size_t>(n_in));
      aout_w.resize(static_cast<std::size_t>(n_in));
      for (Index i = 0; i < n_in; ++i) {
        Matrix w(rows, m);
        for (Index r = 0; r < rows; ++r) {
          for (Index c = 0; c < m; ++c) w(r, c) = rng.uniform(-bound, bound);
        }
        out_w[static_cast<std::size_t>(i)] = std::move(w);
        aout_w[static_cast<std::size_t>(i)] = Matrix::Zero(rows, m);
      }
      layer_b[static_cast<std::size_t>(o)] = Vector::Zero(rows);
      acc_b[static_cast<std::size_t>(o)] = Vector::Zero(rows);
    }
  }

  const Index r = config.feature_dim();
  const double bound = std::sqrt(6.0 / static_cast<double>(r + config.q));
  model.w_out.resize(config.q, r);
  for (Index j = 0; j < r; ++j) {
    for (Index i = 0; i < config.q; ++i) model.w_out(i, j) = rng.uniform(-bound, bound);
  }
  model.acc_w_out = Matrix::Zero(config.q, r);
  return model;
}

Vector wide_conv_row(const Vector& row, const Vector& filter) {
  const Index s_in = row.size();
  const Index m = filter.size();
  Vector out = Vector::Zero(s_in + m - 1);
  for (Index i = 0; i < m; ++i) {
    const double f = filter[i];
    if (f == 0.0) continue;
    for (Index t = 0; t < s_in; ++t) {
      out[t + i] += f * row[t];
    }
  }
  return out;
}

Matrix fold(const Matrix& map) {
  if (map.rows() % 2 != 0) {
    throw ShapeError("fold: row count " + std::to_string(map.rows()) + " is odd");
  }
  Matrix out(map.rows() / 2, map.cols());
  for (Index r = 0; r < out.rows(); ++r) {
    out.row(r) = map.row(2 * r) + map.row(2 * r + 1);
  }
  return out;
}

Index dynamic_k(int layer, int total_layers, Index sentence_length, Index k_top) {
  if (layer < 1 || layer > total_layers) {
    throw ParameterError("dynamic_k: layer index out of range");
  }
  const Index num = static_cast<Index>(total_layers - layer) * sentence_length;
  const Index ceil_part = (num + total_layers - 1) / static_cast<Index>(total_layers);
  return std::max(k_top, ceil_part);
}

std::pair<Matrix, IndexMatrix> k_max_pool(const Matrix& map, Index k) {
  if (k < 1 || k > map.cols()) {
    throw ShapeError("k_max_pool: k=" + std::to_string(k) + " exceeds width " +
                     std::to_string(map.cols()));
  }
  Matrix pooled(map.rows(), k);
  IndexMatrix indices(map.rows(), k);
  std::vector<Index> order(static_cast<std::size_t>(map.cols()));
  for (Index r = 0; r < map.rows(); ++r) {
    std::iota(order.begin(), order.end(), Index{0});
    // k largest by value, leftmost on ties
    std::partial_sort(order.begin(), order.begin() + k, order.end(),
                      [&](Index a, Index b) {
                        if (map(r, a) != map(r, b)) return map(r, a) > map(r, b);
                        return a < b;
                      });
    std::sort(order.begin(), order.begin() + k);  // restore original order
    for (Index c = 0; c < k; ++c) {
      indices(r, c) = order[static_cast<std::size_t>(c)];
      pooled(r, c) = map(r, indices(r, c));
    }
  }
  return {std::move(pooled), std::move(indices)};
}

ForwardTrace forward(const CnnModel& model, const std::vector<Index>& tokens,
                     const Vector* dropout_mask) {
  const CnnConfig& cfg = model.config;
  const int L = cfg.num_layers;

  ForwardTrace trace;
  // Trim to the tokens actually present; the wide convolution regenerates any
  // context it needs, so padding columns would only add ties of zeros.
  const Index len = std::min<Index>(static_cast<Index>(tokens.size()), cfg.s);
  trace.effective_width = std::max<Index>(len, 1);
  Matrix sentence = Matrix::Zero(cfg.d_w, trace.effective_width);
  for (Index j = 0; j < len; ++j) {
    sentence.col(j) = model.embeddings.col(tokens[static_cast<std::size_t>(j)]);
  }
  trace.activations.resize(static_cast<std::size_t>(L) + 1);
  trace.pool_indices.resize(static_cast<std::size_t>(L));
  trace.pool_k.resize(static_cast<std::size_t>(L));
  trace.prepool_width.resize(static_cast<std::size_t>(L));
  trace.activations[0].push_back(std::move(sentence));

  for (int l = 0; l < L; ++l) {
    const auto& inputs = trace.activations[static_cast<std::size_t>(l)];
    const Index n_out = cfg.feature_maps[static_cast<std::size_t>(l)];
    const Index rows = cfg.rows_at(l);
    const Index w_in = inputs[0].cols();
    const Index m = cfg.filter_widths[static_cast<std::size_t>(l)];
    const Index w_conv = w_in + m - 1;
    const Index k_l = dynamic_k(l + 1, L, trace.effective_width, cfg.k_top);
    trace.pool_k[static_cast<std::size_t>(l)] = k_l;

    auto& outputs = trace.activations[static_cast<std::size_t>(l) + 1];
    auto& pool_idx = trace.pool_indices[static_cast<std::size_t>(l)];
    outputs.reserve(static_cast<std::size_t>(n_out));
    pool_idx.reserve(static_cast<std::size_t>(n_out));

    for (Index o = 0; o < n_out; ++o) {
      Matrix conv = Matrix::Zero(rows, w_conv);
      for (std::size_t i = 0; i < inputs.size(); ++i) {
        const Matrix& w = model.conv_w[static_cast<std::size_t>(l)]
                                      [static_cast<std::size_t>(o)][i];
        const Matrix& in = inputs[i];
        for (Index r = 0; r < rows; ++r) {
          conv.row(r) += wide_conv_row(in.row(r).transpose(),
                                       w.row(r).transpose()).transpose();
        }
      }
      const Vector& bias = model.conv_b[static_cast<std::size_t>(l)]
                                       [static_cast<std::size_t>(o)];
      conv.colwise() += bias;

      Matrix folded = fold(conv);
      trace.prepool_width[static_cast<std::size_t>(l)] = folded.cols();
      if (folded.cols() < k_l) {
        // ultra-short inputs: pad with zero columns so pooling stays shaped
        Matrix padded = Matrix::Zero(folded.rows(), k_l);
        padded.leftCols(folded.cols()) = folded;
        folded = std::move(padded);
      }
      auto [pooled, idx] = k_max_pool(folded, k_l);
      pool_idx.push_back(std::move(idx));
      outputs.push_back(pooled.array().tanh().matrix());
    }
  }

  // flatten: map-major, then row, then pooled column
  const Index r_dim = cfg.feature_dim();
  trace.h.resize(r_dim);
  Index pos = 0;
  for (const Matrix& map : trace.activations[static_cast<std::size_t>(L)]) {
    for (Index row = 0; row < map.rows(); ++row) {
      for (Index col = 0; col < map.cols(); ++col) trace.h[pos++] = map(row, col);
    }
  }

  if (dropout_mask != nullptr) {
    if (dropout_mask->size() != r_dim) {
      throw ShapeError("forward: dropout mask length mismatch");
    }
    trace.mask = *dropout_mask;
    const double keep = 1.0 - cfg.dropout_rate;
    trace.h_dropped = trace.h.cwiseProduct(trace.mask) / keep;
  } else {
    trace.h_dropped = trace.h;
  }

  trace.output = model.w_out * trace.h_dropped;
  trace.probabilities = trace.output.unaryExpr(
      [](double o) { return 1.0 / (1.0 + std::exp(-o)); });
  return trace;
}

Gradients zero_gradients(const CnnModel& model) {
  Gradients g;
  g.embeddings = Matrix::Zero(model.embeddings.rows(), model.embeddings.cols());
  g.w_out = Matrix::Zero(model.w_out.rows(), model.w_out.cols());
  g.conv_w.resize(model.conv_w.size());
  g.conv_b.resize(model.conv_b.size());
  for (std::size_t l = 0; l < model.conv_w.size(); ++l) {
    g.conv_w[l].resize(model.conv_w[l].size());
    g.conv_b[l].resize(model.conv_b[l].size());
    for (std::size_t o = 0; o < model.conv_w[l].size(); ++o) {
      g.conv_w[l][o].resize(model.conv_w[l][o].size());
      for (std::size_t i = 0; i < model.conv_w[l][o].size(); ++i) {
        g.conv_w[l][o][i] = Matrix::Zero(model.conv_w[l][o][i].rows(),
                                         model.conv_w[l][o][i].cols());
      }
      g.conv_b[l][o] = Vector::Zero(model.conv_b[l][o].size());
    }
  }
  return g;
}

double loss_and_grad(const CnnModel& model,
                     const std::vector<std::vector<Index>>& batch,
                     const Matrix& code_bits, Gradients& grads,
                     const std::vector<Vector>* masks) {
  const CnnConfig& cfg = model.config;
  if (batch.empty()) throw ParameterError("loss_and_grad: empty batch");
  if (code_bits.rows() != cfg.q ||
      code_bits.cols() != static_cast<Index>(batch.size())) {
    throw ShapeError("loss_and_grad: code matrix must be q x batch");
  }
  if (masks && masks->size() != batch.size()) {
    throw ShapeError("loss_and_grad: need one dropout mask per document");
  }

  const int L = cfg.num_layers;
  const double keep = 1.0 - cfg.dropout_rate;
  double loss = 0.0;
  std::set<Index> touched;

  for (std::size_t di = 0; di < batch.size(); ++di) {
    const Vector* mask = masks ? &(*masks)[di] : nullptr;
    ForwardTrace trace = forward(model, batch[di], mask);

    Vector d_out(cfg.q);
    for (Index i = 0; i < cfg.q; ++i) {
      const double b = code_bits(i, static_cast<Index>(di));
      const double p = clamp_prob(trace.probabilities[i]);
      loss -= b * std::log(p) + (1.0 - b) * std::log(1.0 - p);
      d_out[i] = p - b;
    }

    grads.w_out.noalias() += d_out * trace.h_dropped.transpose();
    Vector dh = model.w_out.transpose() * d_out;
    if (mask) dh = dh.cwiseProduct(trace.mask) / keep;

    // unflatten dh into gradients on the last layer's post-tanh maps
    const auto& last_maps = trace.activations[static_cast<std::size_t>(L)];
    std::vector<Matrix> d_maps;
    d_maps.reserve(last_maps.size());
    Index pos = 0;
    for (const Matrix& map : last_maps) {
      Matrix d(map.rows(), map.cols());
      for (Index row = 0; row < map.rows(); ++row) {
        for (Index col = 0; col < map.cols(); ++col) d(row, col) = dh[pos++];
      }
      d_maps.push_back(std::move(d));
    }

    for (int l = L - 1; l >= 0; --l) {
      const auto& inputs = trace.activations[static_cast<std::size_t>(l)];
      const auto& outputs = trace.activations[static_cast<std::size_t>(l) + 1];
      const Index rows = cfg.rows_at(l);
      const Index m = cfg.filter_widths[static_cast<std::size_t>(l)];
      const Index w_in = inputs[0].cols();
      const Index w_conv = w_in + m - 1;
      const Index prepool = trace.prepool_width[static_cast<std::size_t>(l)];

      std::vector<Matrix> d_inputs(inputs.size());
      for (std::size_t i = 0; i < inputs.size(); ++i) {
        d_inputs[i] = Matrix::Zero(rows, w_in);
      }

      for (std::size_t o = 0; o < outputs.size(); ++o) {
        // tanh backprop on the pooled map
        Matrix d_pool =
            d_maps[o].cwiseProduct((1.0 - outputs[o].array().square()).matrix());
        // unpool: scatter into the folded width, dropping pad columns
        const IndexMatrix& idx = trace.pool_indices[static_cast<std::size_t>(l)][o];
        Matrix d_fold = Matrix::Zero(rows / 2, prepool);
        for (Index row = 0; row < d_pool.rows(); ++row) {
          for (Index c = 0; c < d_pool.cols(); ++c) {
            const Index src = idx(row, c);
            if (src < prepool) d_fold(row, src) += d_pool(row, c);
          }
        }
        // unfold: both source rows receive the folded gradient
        Matrix d_conv(rows, w_conv);
        for (Index row = 0; row < rows / 2; ++row) {
          d_conv.row(2 * row) = d_fold.row(row);
          d_conv.row(2 * row + 1) = d_fold.row(row);
        }

        grads.conv_b[static_cast<std::size_t>(l)][o] += d_conv.rowwise().sum();

        for (std::size_t i = 0; i < inputs.size(); ++i) {
          const Matrix& w = model.conv_w[static_cast<std::size_t>(l)][o][i];
          Matrix& dw = grads.conv_w[static_cast<std::size_t>(l)][o][i];
          const Matrix& in = inputs[i];
          Matrix& din = d_inputs[i];
          for (Index row = 0; row < rows; ++row) {
            for (Index t = 0; t < m; ++t) {
              double acc = 0.0;
              for (Index p = 0; p < w_in; ++p) acc += d_conv(row, p + t) * in(row, p);
              dw(row, t) += acc;
            }
            for (Index p = 0; p < w_in; ++p) {
              double acc = 0.0;
              for (Index t = 0; t < m; ++t) acc += w(row, t) * d_conv(row, p + t);
              din(row, p) += acc;
            }
          }
        }
      }
      d_maps = std::move(d_inputs);
    }

    // sentence-matrix gradient lands on the embedding columns of the tokens
    const Index len = std::min<Index>(static_cast<Index>(batch[di].size()), cfg.s);
    for (Index j = 0; j < len; ++j) {
      const Index word = batch[di][static_cast<std::size_t>(j)];
      grads.embeddings.col(word) += d_maps[0].col(j);
      touched.insert(word);
    }
  }

  grads.touched_words.assign(touched.begin(), touched.end());
  return loss;
}

void adagrad_step(CnnModel& model, const Gradients& grads, double learning_rate) {
  auto update = [&](Matrix& param, Matrix& acc, const Matrix& g) {
    acc.array() += g.array().square();
    param.array() -= learning_rate * g.array() / (acc.array().sqrt() + kAdagradEps);
  };
  for (Index word : grads.touched_words) {
    Vector g = grads.embeddings.col(word);
    model.acc_embeddings.col(word).array() += g.array().square();
    model.embeddings.col(word).array() -=
        learning_rate * g.array() /
        (model.acc_embeddings.col(word).array().sqrt() + kAdagradEps);
  }
  for (std::size_t l = 0; l < model.conv_w.size(); ++l) {
    for (std::size_t o = 0; o < model.conv_w[l].size(); ++o) {
      for (std::size_t i = 0; i < model.conv_w[l][o].size(); ++i) {
        update(model.conv_w[l][o][i], model.acc_conv_w[l][o][i], grads.conv_w[l][o][i]);
      }
      Vector gb = grads.conv_b[l][o];
      model.acc_conv_b[l][o].array() += gb.array().square();
      model.conv_b[l][o].array() -=
          learning_rate * gb.array() /
          (model.acc_conv_b[l][o].array().sqrt() + kAdagradEps);
    }
  }
  update(model.w_out, model.acc_w_out, grads.w_out);
}

TrainHistory train(CnnModel& model, const std::vector<std::vector<Index>>& docs,
                   const BitMatrix& codes, const std::vector<Index>& train_idx,
                   const std::vector<Index>& dev_idx) {
  const CnnConfig& cfg = model.config;
  if (codes.rows() != cfg.q || codes.cols() != static_cast<Index>(docs.size())) {
    throw ShapeError("train: codes must be q x n over all documents");
  }
  const Index r_dim = cfg.feature_dim();
  Rng rng(derive_seed(cfg.seed, "cnn_train"));

  auto eval_loss = [&](const std::vector<Index>& idx) -> double {
    if (idx.empty()) return std::numeric_limits<double>::quiet_NaN();
    double total = 0.0;
    for (Index doc : idx) {
      ForwardTrace t = forward(model, docs[static_cast<std::size_t>(doc)]);
      for (Index i = 0; i < cfg.q; ++i) {
        const double b = static_cast<double>(codes(i, doc));
        const double p = clamp_prob(t.probabilities[i]);
        total -= b * std::log(p) + (1.0 - b) * std::log(1.0 - p);
      }
    }
    return total / static_cast<double>(idx.size());
  };

  TrainHistory history;
  std::vector<Index> order = train_idx;
  for (Index epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<std::vector<Index>> batch;
      Matrix bits(cfg.q, static_cast<Index>(stop - start));
      batch.reserve(stop - start);
      for (std::size_t b = start; b < stop; ++b) {
        const Index doc = order[b];
        batch.push_back(docs[static_cast<std::size_t>(doc)]);
        for (Index i = 0; i < cfg.q; ++i) {
          bits(i, static_cast<Index>(b - start)) = static_cast<double>(codes(i, doc));
        }
      }
      std::vector<Vector> masks;
      const std::vector<Vector>* mask_ptr = nullptr;
      if (cfg.dropout_rate > 0.0) {
        masks.reserve(batch.size());
        for (std::size_t b = 0; b < batch.size(); ++b) {
          Vector m(r_dim);
          for (Index i = 0; i < r_dim; ++i) {
            m[i] = rng.uniform01() < cfg.dropout_rate ? 0.0 : 1.0;
          }
          masks.push_back(std::move(m));
        }
        mask_ptr = &masks;
      }
      Gradients grads = zero_gradients(model);
      epoch_loss += loss_and_grad(model, batch, bits, grads, mask_ptr);
      adagrad_step(model, grads, cfg.learning_rate);
    }
    history.epoch_mean_loss.push_back(
        order.empty() ? 0.0 : epoch_loss / static_cast<double>(order.size()));
    history.epoch_dev_loss.push_back(eval_loss(dev_idx));
  }
  return history;
}

Matrix extract_features(const CnnModel& model,
                        const std::vector<std::vector<Index>>& docs) {
  const Index r_dim = model.config.feature_dim();
  Matrix features(r_dim, static_cast<Index>(docs.size()));
  for (std::size_t j = 0; j < docs.size(); ++j) {
    features.col(static_cast<Index>(j)) = forward(model, docs[j]).h;
  }
  return features;
}

// ---------------------------------------------------------------------------
// checkpoint container: magic, version, config scalars, named tensors with
// raw little-endian doubles. Raw bytes keep the round trip bit-exact.

namespace {

constexpr char kMagic[8] = {'S', 'T', 'C', 'C', 'K', 'P', 'T', '1'};

void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

void write_string(std::ostream& out, const std::string& s) {
  write_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
  const std::uint64_t len = read_u64(in);
  std::string s(len, '\0');
  in.read(s.data(), static_cast<std::streamsize>(len));
  return s;
}

void write_tensor(std::ostream& out, const std::string& name, const Matrix& m) {
  write_string(out, name);
  write_u64(out, static_cast<std::uint64_t>(m.rows()));
  write_u64(out, static_cast<std::uint64_t>(m.cols()));
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.size())));
}

Matrix read_tensor_body(std::istream& in) {
  const auto rows = static_cast<Index>(read_u64(in));
  const auto cols = static_cast<Index>(read_u64(in));
  Matrix m(rows, cols);
  in.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.size())));
  return m;
}

}  // namespace

void save_checkpoint(const std::string& path, const CnnModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_u64(out, 1);  // version

  const CnnConfig& c = model.config;
  write_u64(out, static_cast<std::uint64_t>(c.num_layers));
  for (int l = 0; l < c.num_layers; ++l) {
    write_u64(out, static_cast<std::uint64_t>(c.filter_widths[static_cast<std::size_t>(l)]));
    write_u64(out, static_cast<std::uint64_t>(c.feature_maps[static_cast<std::size_t>(l)]));
  }
  write_u64(out, static_cast<std::uint64_t>(c.k_top));
  write_u64(out, static_cast<std::uint64_t>(c.d_w));
  write_u64(out, static_cast<std::uint64_t>(c.s));
  write_u64(out, static_cast<std::uint64_t>(c.q));
  write_u64(out, static_cast<std::uint64_t>(c.batch_size));
  write_u64(out, static_cast<std::uint64_t>(c.epochs));
  write_u64(out, c.seed);
  double lr = c.learning_rate, dr = c.dropout_rate;
  out.write(reinterpret_cast<const char*>(&lr), sizeof(lr));
  out.write(reinterpret_cast<const char*>(&dr), sizeof(dr));

  std::uint64_t tensor_count = 4;  // embeddings, w_out + accumulators
  for (std::size_t l = 0; l < model.conv_w.size(); ++l) {
    for (std::size_t o = 0; o < model.conv_w[l].size(); ++o) {
      tensor_count += 2 * model.conv_w[l][o].size() + 2;
    }
  }
  write_u64(out, tensor_count);
  write_tensor(out, "embeddings", model.embeddings);
  write_tensor(out, "acc.embeddings", model.acc_embeddings);
  write_tensor(out, "w_out", model.w_out);
  write_tensor(out, "acc.w_out", model.acc_w_out);
  for (std::size_t l = 0; l < model.conv_w.size(); ++l) {
    for (std::size_t o = 0; o < model.conv_w[l].size(); ++o) {
      const std::string tag = std::to_string(l) + "." + std::to_string(o);
      for (std::size_t i = 0; i < model.conv_w[l][o].size(); ++i) {
        write_tensor(out, "conv_w." + tag + "." + std::to_string(i),
                     model.conv_w[l][o][i]);
        write_tensor(out, "acc.conv_w." + tag + "." + std::to_string(i),
                     model.acc_conv_w[l][o][i]);
      }
      write_tensor(out, "conv_b." + tag, Matrix(model.conv_b[l][o]));
      write_tensor(out, "acc.conv_b." + tag, Matrix(model.acc_conv_b[l][o]));
    }
  }
  if (!out) throw IoError("failed while writing checkpoint: " + path);
}

CnnModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ParseError("not a checkpoint file: " + path);
  }
  const std::uint64_t version = read_u64(in);
  if (version != 1) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version));
  }

  CnnConfig c;
  c.num_layers = static_cast<int>(read_u64(in));
  c.filter_widths.assign(static_cast<std::size_t>(c.num_layers), 0);
  c.feature_maps.assign(static_cast<std::size_t>(c.num_layers), 0);
  for (int l = 0; l < c.num_layers; ++l) {
    c.filter_widths[static_cast<std::size_t>(l)] = static_cast<Index>(read_u64(in));
    c.feature_maps[static_cast<std::size_t>(l)] = static_cast<Index>(read_u64(in));
  }
  c.k_top = static_cast<Index>(read_u64(in));
  c.d_w = static_cast<Index>(read_u64(in));
  c.s = static_cast<Index>(read_u64(in));
  c.q = static_cast<Index>(read_u64(in));
  c.batch_size = static_cast<Index>(read_u64(in));
  c.epochs = static_cast<Index>(read_u64(in));
  c.seed = read_u64(in);
  in.read(reinterpret_cast<char*>(&c.learning_rate), sizeof(double));
  in.read(reinterpret_cast<char*>(&c.dropout_rate), sizeof(double));
  c.validate();

  const std::uint64_t tensor_count = read_u64(in);
  CnnModel model;
  model.config = c;
  model.conv_w.resize(static_cast<std::size_t>(c.num_layers));
  model.conv_b.resize(static_cast<std::size_t>(c.num_layers));
  model.acc_conv_w.resize(static_cast<std::size_t>(c.num_layers));
  model.acc_conv_b.resize(static_cast<std::size_t>(c.num_layers));
  for (int l = 0; l < c.num_layers; ++l) {
    const auto n_out = static_cast<std::size_t>(c.feature_maps[static_cast<std::size_t>(l)]);
    const auto n_in = static_cast<std::size_t>(c.input_maps(l));
    model.conv_w[static_cast<std::size_t>(l)].assign(n_out, std::vector<Matrix>(n_in));
    model.acc_conv_w[static_cast<std::size_t>(l)].assign(n_out, std::vector<Matrix>(n_in));
    model.conv_b[static_cast<std::size_t>(l)].assign(n_out, Vector());
    model.acc_conv_b[static_cast<std::size_t>(l)].assign(n_out, Vector());
  }

  for (std::uint64_t t = 0; t < tensor_count; ++t) {
    const std::string name = read_string(in);
    Matrix body = read_tensor_body(in);
    if (!in) throw ParseError("truncated checkpoint: " + path);
    if (name == "embeddings") {
      model.embeddings = std::move(body);
    } else if (name == "acc.embeddings") {
      model.acc_embeddings = std::move(body);
    } else if (name == "w_out") {
      model.w_out = std::move(body);
    } else if (name == "acc.w_out") {
      model.acc_w_out = std::move(body);
    } else {
      const bool acc = name.rfind("acc.", 0) == 0;
      const std::string rest = acc ? name.substr(4) : name;
      std::size_t l = 0, o = 0, i = 0;
      if (rest.rfind("conv_w.", 0) == 0) {
        if (std::sscanf(rest.c_str(), "conv_w.%zu.%zu.%zu", &l, &o, &i) != 3) {
          throw ParseError("bad tensor name in checkpoint: " + name);
        }
        (acc ? model.acc_conv_w : model.conv_w).at(l).at(o).at(i) = std::move(body);
      } else if (rest.rfind("conv_b.", 0) == 0) {
        if (std::sscanf(rest.c_str(), "conv_b.%zu.%zu", &l, &o) != 2) {
          throw ParseError("bad tensor name in checkpoint: " + name);
        }
        (acc ? model.acc_conv_b : model.conv_b).at(l).at(o) = Vector(body.col(0));
      } else {
        throw ParseError("unknown tensor in checkpoint: " + name);
      }
    }
  }
  return model;
}

}  // namespace stc::cnn
