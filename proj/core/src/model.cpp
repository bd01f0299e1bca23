#include "brepnet/model.hpp"

#include <algorithm>
#include <stdexcept>

namespace brepnet {
namespace {

struct KernelCounts {
  Index faces;
  Index edges;
  Index coedges;
};

KernelCounts kernel_counts(const ArchitectureConfig& config) {
  const KernelSpec spec = kernel_preset(config.kernel);
  return {static_cast<Index>(spec.face_walks.size()), static_cast<Index>(spec.edge_walks.size()),
          static_cast<Index>(spec.coedge_walks.size())};
}

Index psi_width(const ArchitectureConfig& config, Index unit) {
  const KernelCounts k = kernel_counts(config);
  if (unit == 0) {
    return k.faces * config.face_feature_width + k.edges * config.edge_feature_width +
           k.coedges * config.coedge_feature_width;
  }
  return (k.faces + k.edges + k.coedges) * config.hidden_width;
}

template <typename T>
struct States {
  Matrix<T> faces;
  Matrix<T> edges;
  Matrix<T> coedges;
};

template <typename T>
Matrix<T> gather_psi(const CompiledKernel& kernel, const States<T>& h) {
  std::vector<Matrix<T>> parts;
  parts.reserve(kernel.face_walks.size() + kernel.edge_walks.size() + kernel.coedge_walks.size());
  for (const auto& w : kernel.face_walks) parts.push_back(gather(w, h.faces));
  for (const auto& w : kernel.edge_walks) parts.push_back(gather(w, h.edges));
  for (const auto& w : kernel.coedge_walks) parts.push_back(gather(w, h.coedges));
  return hconcat(std::span<const Matrix<T>>(parts));
}

/// Adjoint of gather_psi: splits the Psi gradient by walk and scatter-adds
/// each block into the source entity rows.
States<double> scatter_psi(const CompiledKernel& kernel, const Tensor2& dpsi, Index face_width, Index edge_width,
                           Index coedge_width, Index num_faces, Index num_edges, Index num_coedges) {
  States<double> dh{Tensor2(num_faces, face_width), Tensor2(num_edges, edge_width), Tensor2(num_coedges, coedge_width)};
  Index at = 0;
  for (const auto& w : kernel.face_walks) {
    add_inplace(dh.faces, scatter_add(w, slice_cols(dpsi, at, at + face_width)));
    at += face_width;
  }
  for (const auto& w : kernel.edge_walks) {
    add_inplace(dh.edges, scatter_add(w, slice_cols(dpsi, at, at + edge_width)));
    at += edge_width;
  }
  for (const auto& w : kernel.coedge_walks) {
    add_inplace(dh.coedges, scatter_add(w, slice_cols(dpsi, at, at + coedge_width)));
    at += coedge_width;
  }
  return dh;
}

/// Forward-only MLP for a generic scalar type (the cached double path lives
/// in nn.cpp).
template <typename T>
Matrix<T> apply_mlp(const std::vector<Matrix<T>>& weights, const std::vector<Matrix<T>>& biases, const Matrix<T>& x) {
  Matrix<T> h = x;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    Matrix<T> a = matmul(h, weights[l]);
    if (biases[l].size() != 0) {
      for (Index r = 0; r < a.rows(); ++r) {
        auto row = a.row(r);
        for (Index c = 0; c < a.cols(); ++c) row[c] += biases[l](0, c);
      }
    }
    if (l + 1 < weights.size()) {
      for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] = std::max(a.data()[i], T{});
    }
    h = std::move(a);
  }
  return h;
}

void check_batch_widths(const ArchitectureConfig& config, const Batch& batch) {
  if (batch.x_faces.cols() != config.face_feature_width || batch.x_edges.cols() != config.edge_feature_width ||
      batch.x_coedges.cols() != config.coedge_feature_width) {
    throw std::invalid_argument("forward: batch feature widths do not match the model configuration");
  }
}

}  // namespace

void validate_config(const ArchitectureConfig& config) {
  kernel_preset(config.kernel);  // throws for unknown names
  if (config.hidden_width < 1) throw std::invalid_argument("config: hidden width must be >= 1");
  if (config.num_hidden_units < 0) throw std::invalid_argument("config: unit count must be >= 0");
  if (config.num_classes < 2) throw std::invalid_argument("config: need at least 2 classes");
  if (config.mlp_depth < 1) throw std::invalid_argument("config: MLP depth must be >= 1");
  if (config.face_feature_width < 1 || config.edge_feature_width < 1 || config.coedge_feature_width < 1) {
    throw std::invalid_argument("config: feature widths must be >= 1");
  }
}

std::vector<Index> unit_layer_widths(const ArchitectureConfig& config, Index unit) {
  if (unit < 0 || unit > config.num_hidden_units) throw std::invalid_argument("unit_layer_widths: unit out of range");
  const Index three_s = 3 * config.hidden_width;
  std::vector<Index> widths;
  widths.push_back(psi_width(config, unit));
  const bool is_output_unit = (unit == config.num_hidden_units);
  for (Index l = 0; l + 1 < config.mlp_depth; ++l) widths.push_back(three_s);
  widths.push_back(is_output_unit ? config.num_classes : three_s);
  return widths;
}

std::size_t parameter_count(const ArchitectureConfig& config) {
  validate_config(config);
  std::size_t count = 0;
  for (Index unit = 0; unit <= config.num_hidden_units; ++unit) {
    const std::vector<Index> widths = unit_layer_widths(config, unit);
    const bool is_output_unit = (unit == config.num_hidden_units);
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
      count += static_cast<std::size_t>(widths[l]) * widths[l + 1];
      const bool last_layer = (l + 2 == widths.size());
      const bool with_bias = !last_layer || !is_output_unit || config.final_layer_bias;
      if (with_bias) count += static_cast<std::size_t>(widths[l + 1]);
    }
  }
  return count;
}

BRepNetModel init_model(const ArchitectureConfig& config, std::uint64_t seed) {
  validate_config(config);
  BRepNetModel model;
  model.config = config;
  model.init_seed = seed;
  model.standardizer = StandardizerSet::identity();
  Rng rng(seed);
  for (Index unit = 0; unit <= config.num_hidden_units; ++unit) {
    const std::vector<Index> widths = unit_layer_widths(config, unit);
    const bool is_output_unit = (unit == config.num_hidden_units);
    const bool final_bias = !is_output_unit || config.final_layer_bias;
    model.units.push_back(init_mlp(widths, final_bias, rng));
  }
  return model;
}

std::vector<ParameterBlockRef> parameter_blocks(BRepNetModel& model) {
  std::vector<ParameterBlockRef> blocks;
  for (std::size_t u = 0; u < model.units.size(); ++u) {
    MlpParams& unit = model.units[u];
    for (std::size_t l = 0; l < unit.num_layers(); ++l) {
      const std::string prefix = "unit" + std::to_string(u) + ".layer" + std::to_string(l) + ".";
      blocks.push_back({prefix + "weight", &unit.weights[l]});
      if (unit.biases[l].size() != 0) blocks.push_back({prefix + "bias", &unit.biases[l]});
    }
  }
  return blocks;
}

std::vector<ConstParameterBlockRef> parameter_blocks(const BRepNetModel& model) {
  std::vector<ConstParameterBlockRef> blocks;
  for (const auto& ref : parameter_blocks(const_cast<BRepNetModel&>(model))) {
    blocks.push_back({ref.name, ref.tensor});
  }
  return blocks;
}

ModelGrads ModelGrads::zeros_like(const BRepNetModel& model) {
  ModelGrads grads;
  for (const auto& unit : model.units) grads.units.push_back(MlpGrads::zeros_like(unit));
  return grads;
}

std::vector<const Tensor2*> ModelGrads::flat() const {
  std::vector<const Tensor2*> out;
  for (const auto& unit : units) {
    for (std::size_t l = 0; l < unit.dweights.size(); ++l) {
      out.push_back(&unit.dweights[l]);
      if (unit.dbiases[l].size() != 0) out.push_back(&unit.dbiases[l]);
    }
  }
  return out;
}

namespace {

Tensor2 forward_impl(const BRepNetModel& model, const Batch& batch, const ForwardOptions& options,
                     ForwardCache* cache, std::vector<HiddenStates>* hidden_out) {
  const ArchitectureConfig& config = model.config;
  check_batch_widths(config, batch);
  const KernelSpec spec = kernel_preset(config.kernel);
  CompiledKernel kernel = compile_kernel(batch.operators, spec);
  const Index num_faces = batch.topology.num_faces;
  const Index num_edges = batch.topology.num_edges;
  const Index num_coedges = batch.topology.num_coedges();
  const Index s = config.hidden_width;

  States<double> h{batch.x_faces, batch.x_edges, batch.x_coedges};
  if (cache) {
    *cache = ForwardCache{};
    cache->unit_caches.resize(model.units.size());
  }

  for (Index t = 0; t < config.num_hidden_units; ++t) {
    if (cache) {
      cache->hidden_face_width.push_back(h.faces.cols());
      cache->hidden_edge_width.push_back(h.edges.cols());
      cache->hidden_coedge_width.push_back(h.coedges.cols());
    }
    const Tensor2 psi = gather_psi(kernel, h);
    const Tensor2 z = mlp_forward(model.units[t], psi, cache ? &cache->unit_caches[t] : nullptr);
    if (z.cols() != 3 * s) throw std::logic_error("forward: unexpected Z width");

    States<double> h_next;
    h_next.coedges = slice_cols(z, 0, s);
    if (options.pooling == PoolingMode::kMax) {
      Matrix<Index> arg_f, arg_e;
      h_next.faces = segment_max_pool(slice_cols(z, s, 2 * s), batch.topology.coedge_face, num_faces, &arg_f);
      h_next.edges = segment_max_pool(slice_cols(z, 2 * s, 3 * s), batch.topology.coedge_edge, num_edges, &arg_e);
      if (cache) {
        cache->argmax_faces.push_back(std::move(arg_f));
        cache->argmax_edges.push_back(std::move(arg_e));
      }
    } else {
      // Ablation: no pooled updates, so nothing crosses between the loops
      // of a multi-loop face.
      h_next.faces = Tensor2(num_faces, s);
      h_next.edges = Tensor2(num_edges, s);
    }
    h = std::move(h_next);
    if (hidden_out) hidden_out->push_back({h.faces, h.edges, h.coedges});
  }

  // Output unit: the MLP emits only Z^f, pooled onto parent faces.
  const Index t_out = config.num_hidden_units;
  if (cache) {
    cache->hidden_face_width.push_back(h.faces.cols());
    cache->hidden_edge_width.push_back(h.edges.cols());
    cache->hidden_coedge_width.push_back(h.coedges.cols());
  }
  const Tensor2 psi = gather_psi(kernel, h);
  const Tensor2 z_f = mlp_forward(model.units[t_out], psi, cache ? &cache->unit_caches[t_out] : nullptr);
  Matrix<Index> arg_logits;
  Tensor2 logits = segment_max_pool(z_f, batch.topology.coedge_face, num_faces, &arg_logits);
  if (cache) {
    cache->argmax_logits = std::move(arg_logits);
    cache->kernel = std::move(kernel);
    cache->logits = logits;
  }
  (void)num_coedges;
  return logits;
}

}  // namespace

ForwardResult forward(const BRepNetModel& model, const Batch& batch, const ForwardOptions& options) {
  ForwardResult result;
  result.logits = forward_impl(model, batch, options, nullptr, options.capture_hidden ? &result.hidden : nullptr);
  return result;
}

Tensor2 classify_faces(const BRepNetModel& model, const Batch& batch) {
  return forward_impl(model, batch, {}, nullptr, nullptr);
}

Tensor2 classify_faces(const BRepNetModel& model, const SolidRecord& record) {
  const Batch batch = make_batch(std::span<const SolidRecord>(&record, 1), model.standardizer);
  return classify_faces(model, batch);
}

Tensor2f classify_faces_single_precision(const BRepNetModel& model, const Batch& batch) {
  const ArchitectureConfig& config = model.config;
  check_batch_widths(config, batch);
  const CompiledKernel kernel = compile_kernel(batch.operators, kernel_preset(config.kernel));
  const Index s = config.hidden_width;

  std::vector<std::vector<Tensor2f>> weights, biases;
  for (const auto& unit : model.units) {
    auto& w = weights.emplace_back();
    auto& b = biases.emplace_back();
    for (const auto& t : unit.weights) w.push_back(cast<float>(t));
    for (const auto& t : unit.biases) b.push_back(cast<float>(t));
  }

  States<float> h{cast<float>(batch.x_faces), cast<float>(batch.x_edges), cast<float>(batch.x_coedges)};
  for (Index t = 0; t < config.num_hidden_units; ++t) {
    const Tensor2f z = apply_mlp(weights[t], biases[t], gather_psi(kernel, h));
    States<float> h_next;
    h_next.coedges = slice_cols(z, 0, s);
    h_next.faces = segment_max_pool(slice_cols(z, s, 2 * s), batch.topology.coedge_face, batch.topology.num_faces);
    h_next.edges = segment_max_pool(slice_cols(z, 2 * s, 3 * s), batch.topology.coedge_edge, batch.topology.num_edges);
    h = std::move(h_next);
  }
  const Index t_out = config.num_hidden_units;
  const Tensor2f z_f = apply_mlp(weights[t_out], biases[t_out], gather_psi(kernel, h));
  return segment_max_pool(z_f, batch.topology.coedge_face, batch.topology.num_faces);
}

Tensor2 forward_with_cache(const BRepNetModel& model, const Batch& batch, ForwardCache& cache) {
  return forward_impl(model, batch, {}, &cache, nullptr);
}

void backward_from_dlogits(const BRepNetModel& model, const Batch& batch, const ForwardCache& cache,
                           const Tensor2& dlogits, ModelGrads& grads) {
  const ArchitectureConfig& config = model.config;
  const Index num_faces = batch.topology.num_faces;
  const Index num_edges = batch.topology.num_edges;
  const Index num_coedges = batch.topology.num_coedges();
  const Index s = config.hidden_width;
  if (grads.units.size() != model.units.size()) throw std::invalid_argument("backward: gradient layout mismatch");

  const Index t_out = config.num_hidden_units;
  Tensor2 dz = segment_max_unpool(cache.argmax_logits, dlogits, num_coedges);
  Tensor2 dpsi = mlp_backward(model.units[t_out], cache.unit_caches[t_out], dz, grads.units[t_out]);
  States<double> dh = scatter_psi(cache.kernel, dpsi, cache.hidden_face_width[t_out], cache.hidden_edge_width[t_out],
                                  cache.hidden_coedge_width[t_out], num_faces, num_edges, num_coedges);

  for (Index t = config.num_hidden_units - 1; t >= 0; --t) {
    std::vector<Tensor2> parts;
    parts.push_back(std::move(dh.coedges));
    parts.push_back(segment_max_unpool(cache.argmax_faces[t], dh.faces, num_coedges));
    parts.push_back(segment_max_unpool(cache.argmax_edges[t], dh.edges, num_coedges));
    if (parts[0].cols() != s) throw std::logic_error("backward: unexpected hidden width");
    const Tensor2 dz_t = hconcat(std::span<const Tensor2>(parts));
    Tensor2 dpsi_t = mlp_backward(model.units[t], cache.unit_caches[t], dz_t, grads.units[t]);
    dh = scatter_psi(cache.kernel, dpsi_t, cache.hidden_face_width[t], cache.hidden_edge_width[t],
                     cache.hidden_coedge_width[t], num_faces, num_edges, num_coedges);
  }
}

namespace {

std::vector<int> training_labels(const Batch& batch) {
  for (int label : batch.labels) {
    if (label < 0) throw std::invalid_argument("batch contains unlabeled faces");
  }
  return batch.labels;
}

}  // namespace

double loss_and_gradients(const BRepNetModel& model, const Batch& batch, ModelGrads& grads, Tensor2* logits_out) {
  ForwardCache cache;
  const Tensor2 logits = forward_with_cache(model, batch, cache);
  const std::vector<int> labels = training_labels(batch);
  const LossResult loss = cross_entropy(logits, labels);
  backward_from_dlogits(model, batch, cache, loss.dlogits, grads);
  if (logits_out) *logits_out = logits;
  return loss.loss;
}

double loss_only(const BRepNetModel& model, const Batch& batch) {
  const Tensor2 logits = classify_faces(model, batch);
  return cross_entropy(logits, training_labels(batch)).loss;
}

}  // namespace brepnet
