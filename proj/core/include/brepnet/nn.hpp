#pragma once

#include <span>
#include <string>
#include <vector>

#include "brepnet/rng.hpp"
#include "brepnet/tensor.hpp"
#include "brepnet/types.hpp"

namespace brepnet {

/// Per-unit MLP parameters. weights[l] is (in x out); biases[l] is a 1-by-out
/// row, empty when the layer carries no bias (only the last layer may).
struct MlpParams {
  std::vector<Tensor2> weights;
  std::vector<Tensor2> biases;

  std::size_t num_layers() const { return weights.size(); }
  Index input_width() const { return weights.empty() ? 0 : weights.front().rows(); }
  Index output_width() const { return weights.empty() ? 0 : weights.back().cols(); }
  std::size_t parameter_count() const;
};

/// Glorot-style uniform init in +-sqrt(6 / (fan_in + fan_out)).
MlpParams init_mlp(std::span<const Index> layer_widths, bool final_bias, Rng& rng);

/// Layer inputs captured during the forward pass; layer_inputs[l] is the
/// input to layer l (so layer_inputs[l] for l > 0 is the ReLU output of the
/// previous layer, which also encodes the ReLU mask).
struct MlpCache {
  std::vector<Tensor2> layer_inputs;
};

/// ReLU between layers, no activation after the last layer.
Tensor2 mlp_forward(const MlpParams& params, const Tensor2& input, MlpCache* cache = nullptr);

struct MlpGrads {
  std::vector<Tensor2> dweights;
  std::vector<Tensor2> dbiases;  // empty rows where the layer has no bias

  static MlpGrads zeros_like(const MlpParams& params);
};

/// Returns the gradient wrt the MLP input and accumulates parameter
/// gradients into grads.
Tensor2 mlp_backward(const MlpParams& params, const MlpCache& cache, const Tensor2& dout, MlpGrads& grads);

/// Columnwise max over rows sharing a segment id. Every segment must be
/// non-empty (guaranteed for faces/edges of a valid solid). Ties route to
/// the lowest row index, recorded in argmax for the backward pass.
template <typename T>
Matrix<T> segment_max_pool(const Matrix<T>& values, std::span<const Index> segment_ids, Index num_segments,
                           Matrix<Index>* argmax = nullptr);

/// Backward of segment_max_pool: routes each pooled gradient entry to the
/// row that produced the max.
Tensor2 segment_max_unpool(const Matrix<Index>& argmax, const Tensor2& dpooled, Index num_rows);

Tensor2 softmax_rows(const Tensor2& logits);

struct LossResult {
  double loss = 0.0;
  Tensor2 dlogits;  // (softmax - onehot) / rows
};

/// Mean over rows of -log softmax(logits)[label]. Throws on a label outside
/// [0, cols).
LossResult cross_entropy(const Tensor2& logits, std::span<const int> labels);

/// Adam with bias correction; moments are shaped like the parameter blocks.
struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step = 0;
  std::vector<Tensor2> first_moment;
  std::vector<Tensor2> second_moment;

  static AdamState create(std::span<Tensor2* const> params, double learning_rate = 1e-3, double beta1 = 0.9,
                          double beta2 = 0.999, double epsilon = 1e-8);
};

/// theta <- theta - lr * m_hat / (sqrt(v_hat) + eps)
void adam_step(AdamState& state, std::span<Tensor2* const> params, std::span<const Tensor2* const> grads);

}  // namespace brepnet
