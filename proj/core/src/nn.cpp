#include "brepnet/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace brepnet {

std::size_t MlpParams::parameter_count() const {
  std::size_t count = 0;
  for (const auto& w : weights) count += w.size();
  for (const auto& b : biases) count += b.size();
  return count;
}

MlpParams init_mlp(std::span<const Index> layer_widths, bool final_bias, Rng& rng) {
  if (layer_widths.size() < 2) throw std::invalid_argument("init_mlp: need at least input and output widths");
  MlpParams params;
  const std::size_t layers = layer_widths.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const Index fan_in = layer_widths[l];
    const Index fan_out = layer_widths[l + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Tensor2 w(fan_in, fan_out);
    for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-bound, bound);
    params.weights.push_back(std::move(w));
    const bool with_bias = (l + 1 < layers) || final_bias;
    params.biases.emplace_back(with_bias ? 1 : 0, with_bias ? fan_out : 0);
  }
  return params;
}

Tensor2 mlp_forward(const MlpParams& params, const Tensor2& input, MlpCache* cache) {
  if (params.weights.empty()) throw std::invalid_argument("mlp_forward: no layers");
  if (input.cols() != params.input_width()) throw std::invalid_argument("mlp_forward: input width mismatch");
  if (cache) cache->layer_inputs.clear();

  Tensor2 x = input;
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    if (cache) cache->layer_inputs.push_back(x);
    Tensor2 a = matmul(x, params.weights[l]);
    const Tensor2& b = params.biases[l];
    if (b.size() != 0) {
      for (Index r = 0; r < a.rows(); ++r) {
        auto row = a.row(r);
        for (Index c = 0; c < a.cols(); ++c) row[c] += b(0, c);
      }
    }
    if (l + 1 < params.num_layers()) {
      for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] = std::max(a.data()[i], 0.0);
    }
    x = std::move(a);
  }
  return x;
}

MlpGrads MlpGrads::zeros_like(const MlpParams& params) {
  MlpGrads g;
  for (const auto& w : params.weights) g.dweights.emplace_back(w.rows(), w.cols());
  for (const auto& b : params.biases) g.dbiases.emplace_back(b.rows(), b.cols());
  return g;
}

Tensor2 mlp_backward(const MlpParams& params, const MlpCache& cache, const Tensor2& dout, MlpGrads& grads) {
  if (cache.layer_inputs.size() != params.num_layers()) throw std::invalid_argument("mlp_backward: cache mismatch");
  Tensor2 da = dout;  // gradient wrt the pre-activation of the current layer
  for (std::size_t l = params.num_layers(); l-- > 0;) {
    const Tensor2& x = cache.layer_inputs[l];
    add_inplace(grads.dweights[l], matmul_at(x, da));
    if (params.biases[l].size() != 0) {
      Tensor2& db = grads.dbiases[l];
      for (Index r = 0; r < da.rows(); ++r) {
        auto row = da.row(r);
        for (Index c = 0; c < da.cols(); ++c) db(0, c) += row[c];
      }
    }
    Tensor2 dx = matmul_bt(da, params.weights[l]);
    if (l > 0) {
      // x is ReLU output of the previous layer: mask is x > 0.
      for (std::size_t i = 0; i < dx.size(); ++i) {
        if (x.data()[i] <= 0.0) dx.data()[i] = 0.0;
      }
    }
    da = std::move(dx);
  }
  return da;
}

template <typename T>
Matrix<T> segment_max_pool(const Matrix<T>& values, std::span<const Index> segment_ids, Index num_segments,
                           Matrix<Index>* argmax) {
  if (static_cast<Index>(segment_ids.size()) != values.rows()) {
    throw std::invalid_argument("segment_max_pool: one segment id per row required");
  }
  Matrix<T> out(num_segments, values.cols());
  Matrix<Index> arg(num_segments, values.cols());
  std::vector<bool> touched(static_cast<std::size_t>(num_segments), false);
  for (Index r = 0; r < values.rows(); ++r) {
    const Index seg = segment_ids[r];
    if (seg < 0 || seg >= num_segments) throw std::invalid_argument("segment_max_pool: segment id out of range");
    auto src = values.row(r);
    auto dst = out.row(seg);
    auto idx = arg.row(seg);
    if (!touched[seg]) {
      touched[seg] = true;
      std::copy(src.begin(), src.end(), dst.begin());
      std::fill(idx.begin(), idx.end(), r);
    } else {
      for (Index c = 0; c < values.cols(); ++c) {
        // Strict > keeps the lowest row index on ties (rows scan upward).
        if (src[c] > dst[c]) {
          dst[c] = src[c];
          idx[c] = r;
        }
      }
    }
  }
  for (Index s = 0; s < num_segments; ++s) {
    if (!touched[s]) throw std::invalid_argument("segment_max_pool: empty segment " + std::to_string(s));
  }
  if (argmax) *argmax = std::move(arg);
  return out;
}

template Matrix<double> segment_max_pool<double>(const Matrix<double>&, std::span<const Index>, Index, Matrix<Index>*);
template Matrix<float> segment_max_pool<float>(const Matrix<float>&, std::span<const Index>, Index, Matrix<Index>*);

Tensor2 segment_max_unpool(const Matrix<Index>& argmax, const Tensor2& dpooled, Index num_rows) {
  if (!(argmax.rows() == dpooled.rows() && argmax.cols() == dpooled.cols())) {
    throw std::invalid_argument("segment_max_unpool: shape mismatch");
  }
  Tensor2 out(num_rows, dpooled.cols());
  for (Index s = 0; s < dpooled.rows(); ++s) {
    for (Index c = 0; c < dpooled.cols(); ++c) {
      out(argmax(s, c), c) += dpooled(s, c);
    }
  }
  return out;
}

Tensor2 softmax_rows(const Tensor2& logits) {
  Tensor2 out(logits.rows(), logits.cols());
  for (Index r = 0; r < logits.rows(); ++r) {
    auto src = logits.row(r);
    auto dst = out.row(r);
    const double m = *std::max_element(src.begin(), src.end());
    double sum = 0.0;
    for (Index c = 0; c < logits.cols(); ++c) {
      dst[c] = std::exp(src[c] - m);
      sum += dst[c];
    }
    for (Index c = 0; c < logits.cols(); ++c) dst[c] /= sum;
  }
  return out;
}

LossResult cross_entropy(const Tensor2& logits, std::span<const int> labels) {
  if (static_cast<Index>(labels.size()) != logits.rows()) {
    throw std::invalid_argument("cross_entropy: one label per row required");
  }
  if (logits.rows() == 0) throw std::invalid_argument("cross_entropy: empty logits");
  for (int label : labels) {
    if (label < 0 || label >= logits.cols()) {
      throw std::invalid_argument("cross_entropy: label " + std::to_string(label) + " out of range");
    }
  }

  LossResult result;
  result.dlogits = softmax_rows(logits);
  const double inv_rows = 1.0 / static_cast<double>(logits.rows());
  double loss = 0.0;
  for (Index r = 0; r < logits.rows(); ++r) {
    auto row = logits.row(r);
    auto drow = result.dlogits.row(r);
    const double m = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (Index c = 0; c < logits.cols(); ++c) sum += std::exp(row[c] - m);
    loss += std::log(sum) - (row[labels[r]] - m);
    drow[labels[r]] -= 1.0;
    for (Index c = 0; c < logits.cols(); ++c) drow[c] *= inv_rows;
  }
  result.loss = loss * inv_rows;
  return result;
}

AdamState AdamState::create(std::span<Tensor2* const> params, double learning_rate, double beta1, double beta2,
                            double epsilon) {
  AdamState state;
  state.learning_rate = learning_rate;
  state.beta1 = beta1;
  state.beta2 = beta2;
  state.epsilon = epsilon;
  for (const Tensor2* p : params) {
    state.first_moment.emplace_back(p->rows(), p->cols());
    state.second_moment.emplace_back(p->rows(), p->cols());
  }
  return state;
}

void adam_step(AdamState& state, std::span<Tensor2* const> params, std::span<const Tensor2* const> grads) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    throw std::invalid_argument("adam_step: block count mismatch");
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t b = 0; b < params.size(); ++b) {
    Tensor2& theta = *params[b];
    const Tensor2& g = *grads[b];
    Tensor2& m = state.first_moment[b];
    Tensor2& v = state.second_moment[b];
    if (!theta.same_shape(g)) throw std::invalid_argument("adam_step: gradient shape mismatch");
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double gi = g.data()[i];
      m.data()[i] = state.beta1 * m.data()[i] + (1.0 - state.beta1) * gi;
      v.data()[i] = state.beta2 * v.data()[i] + (1.0 - state.beta2) * gi * gi;
      const double m_hat = m.data()[i] / bc1;
      const double v_hat = v.data()[i] / bc2;
      theta.data()[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

}  // namespace brepnet
