#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "stc/types.hpp"

namespace stc::cnn {

/// Architecture and training knobs. With the defaults the deep feature has
/// length (48 / 2^2) * 5 * 8 = 480.
struct CnnConfig {
  int num_layers = 2;
  std::vector<Index> filter_widths{3, 3};
  std::vector<Index> feature_maps{12, 8};
  Index k_top = 5;
  Index d_w = 48;
  Index s = 0;  // sentence-matrix width (max tokens)
  Index q = 0;  // output units = code bits
  double learning_rate = 0.01;
  Index batch_size = 200;
  double dropout_rate = 0.5;
  Index epochs = 20;
  std::uint64_t seed = 1;

  Index feature_dim() const;               // r
  Index rows_at(int layer) const;          // d_w / 2^layer (conv input rows)
  Index input_maps(int layer) const;       // 1 at layer 0, else maps[l-1]
  void validate() const;
};

/// Trainable parameters plus their Adagrad accumulators. Embeddings hold one
/// column per word id; conv_w[l][out][in] carries an independent filter per
/// input row, conv_b[l][out] one bias per row.
struct CnnModel {
  CnnConfig config;
  Matrix embeddings;  // d_w x vocab
  std::vector<std::vector<std::vector<Matrix>>> conv_w;
  std::vector<std::vector<Vector>> conv_b;
  Matrix w_out;  // q x r

  Matrix acc_embeddings;
  std::vector<std::vector<std::vector<Matrix>>> acc_conv_w;
  std::vector<std::vector<Vector>> acc_conv_b;
  Matrix acc_w_out;
};

/// Uniform [-b, b] init with b = sqrt(6 / (fan_in + fan_out)) per group;
/// biases start at zero, accumulators at zero. `initial_embeddings` seeds the
/// trainable copy (one column per vocabulary id).
CnnModel init_model(const CnnConfig& config, const Matrix& initial_embeddings);

struct ForwardTrace {
  // activations[0] holds the (trimmed) sentence matrix; activations[l+1] the
  // post-tanh output maps of layer l.
  std::vector<std::vector<Matrix>> activations;
  std::vector<std::vector<IndexMatrix>> pool_indices;  // [layer][map]
  std::vector<Index> pool_k;        // k_l per layer
  std::vector<Index> prepool_width; // folded width before any pad-to-k
  Index effective_width = 0;        // tokens actually consumed
  Vector h;          // pre-dropout deep feature
  Vector h_dropped;  // equals h outside train mode
  Vector mask;       // empty when no dropout was applied
  Vector output;     // O = W_O h_dropped
  Vector probabilities;
};

/// Full (wide) 1-D convolution: out[j] = sum_i filter[i] * row[j - i],
/// implicit zeros outside the row; output length row + filter - 1.
Vector wide_conv_row(const Vector& row, const Vector& filter);

/// Pairwise row sums, halving the row count. No parameters.
Matrix fold(const Matrix& map);

/// Eq-style pooling schedule: k_l = max(k_top, ceil((L - l) / L * s)) with
/// 1-based layer index l.
Index dynamic_k(int layer, int total_layers, Index sentence_length, Index k_top);

/// Per row, the k largest values in their original order; ties go leftmost.
/// Returns the pooled matrix and the selected column indices.
std::pair<Matrix, IndexMatrix> k_max_pool(const Matrix& map, Index k);

/// Forward pass over one token-id sequence. `dropout_mask` (length r of 0/1)
/// switches train mode on; pass nullptr for inference.
ForwardTrace forward(const CnnModel& model, const std::vector<Index>& tokens,
                     const Vector* dropout_mask = nullptr);

struct Gradients {
  Matrix embeddings;  // nonzero only on touched columns
  std::vector<Index> touched_words;
  std::vector<std::vector<std::vector<Matrix>>> conv_w;
  std::vector<std::vector<Vector>> conv_b;
  Matrix w_out;
};

Gradients zero_gradients(const CnnModel& model);

/// Summed negative log-likelihood of the batch's code bits plus parameter
/// gradients. `masks` (one per doc) enables the dropout path; probabilities
/// are clamped to [1e-7, 1 - 1e-7] inside the loss.
double loss_and_grad(const CnnModel& model,
                     const std::vector<std::vector<Index>>& batch,
                     const Matrix& code_bits, Gradients& grads,
                     const std::vector<Vector>* masks = nullptr);

/// acc += g^2; param -= lr * g / (sqrt(acc) + 1e-6).
void adagrad_step(CnnModel& model, const Gradients& grads, double learning_rate);

struct TrainHistory {
  std::vector<double> epoch_mean_loss;
  std::vector<double> epoch_dev_loss;  // NaN entries when no dev set
};

/// Mini-batch Adagrad training against binary codes; deterministic for a
/// fixed config seed. Documents outside train/dev indices are ignored.
TrainHistory train(CnnModel& model, const std::vector<std::vector<Index>>& docs,
                   const BitMatrix& codes, const std::vector<Index>& train_idx,
                   const std::vector<Index>& dev_idx);

/// r x n matrix of deep features, inference mode (no dropout).
Matrix extract_features(const CnnModel& model,
                        const std::vector<std::vector<Index>>& docs);

/// Bit-exact binary checkpoint (config, parameters, accumulators).
void save_checkpoint(const std::string& path, const CnnModel& model);
CnnModel load_checkpoint(const std::string& path);

}  // namespace stc::cnn
