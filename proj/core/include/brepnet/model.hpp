#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "brepnet/data.hpp"
#include "brepnet/features.hpp"
#include "brepnet/nn.hpp"
#include "brepnet/tensor.hpp"
#include "brepnet/types.hpp"
#include "brepnet/walks.hpp"

namespace brepnet {

struct ArchitectureConfig {
  std::string kernel = "winged_edge";
  Index hidden_width = 84;      // s
  Index num_hidden_units = 1;   // T; the output unit is separate
  Index num_classes = kNumSegmentClasses;  // u
  Index mlp_depth = 2;          // layers per unit MLP
  bool final_layer_bias = false;
  bool standardize_flag_columns = true;
  Index face_feature_width = kFaceFeatureWidth;      // p
  Index edge_feature_width = kEdgeFeatureWidth;      // q
  Index coedge_feature_width = kCoedgeFeatureWidth;  // r
};

/// Throws std::invalid_argument when a field is out of range or the kernel
/// name is unknown.
void validate_config(const ArchitectureConfig& config);

/// Layer widths of unit `unit` (0..T are hidden units, T is the output unit
/// when unit == num_hidden_units). First width is the Psi width.
std::vector<Index> unit_layer_widths(const ArchitectureConfig& config, Index unit);

/// Exact number of weights and biases for a configuration.
std::size_t parameter_count(const ArchitectureConfig& config);

struct BRepNetModel {
  ArchitectureConfig config;
  std::vector<MlpParams> units;  // num_hidden_units + 1 entries
  StandardizerSet standardizer;
  std::uint64_t init_seed = 0;
};

/// Seeded initialization; the standardizer starts as identity until fit.
BRepNetModel init_model(const ArchitectureConfig& config, std::uint64_t seed);

struct ParameterBlockRef {
  std::string name;  // e.g. "unit0.layer1.weight"
  Tensor2* tensor;
};
struct ConstParameterBlockRef {
  std::string name;
  const Tensor2* tensor;
};

std::vector<ParameterBlockRef> parameter_blocks(BRepNetModel& model);
std::vector<ConstParameterBlockRef> parameter_blocks(const BRepNetModel& model);

enum class PoolingMode {
  kMax,       // element-wise max onto parent faces/edges
  kDisabled,  // ablation: face/edge hidden-state updates are zeroed
};

struct HiddenStates {
  Tensor2 faces;
  Tensor2 edges;
  Tensor2 coedges;
};

struct ForwardOptions {
  PoolingMode pooling = PoolingMode::kMax;
  bool capture_hidden = false;  // record HiddenStates after each hidden unit
};

struct ForwardResult {
  Tensor2 logits;                    // num_faces x num_classes
  std::vector<HiddenStates> hidden;  // per hidden unit when captured
};

ForwardResult forward(const BRepNetModel& model, const Batch& batch, const ForwardOptions& options = {});

/// Per-face segmentation scores. The record overload encodes and
/// standardizes with the model's fit statistics.
Tensor2 classify_faces(const BRepNetModel& model, const Batch& batch);
Tensor2 classify_faces(const BRepNetModel& model, const SolidRecord& record);

/// Float32 forward pass for inference; parameters and inputs are cast once.
Tensor2f classify_faces_single_precision(const BRepNetModel& model, const Batch& batch);

/// Everything the reverse pass needs from one forward evaluation.
struct ForwardCache {
  CompiledKernel kernel;
  std::vector<MlpCache> unit_caches;       // per unit
  std::vector<Matrix<Index>> argmax_faces; // per hidden unit
  std::vector<Matrix<Index>> argmax_edges; // per hidden unit
  Matrix<Index> argmax_logits;
  std::vector<Index> hidden_face_width;    // H_f width entering each unit
  std::vector<Index> hidden_edge_width;
  std::vector<Index> hidden_coedge_width;
  Tensor2 logits;
};

Tensor2 forward_with_cache(const BRepNetModel& model, const Batch& batch, ForwardCache& cache);

struct ModelGrads {
  std::vector<MlpGrads> units;

  static ModelGrads zeros_like(const BRepNetModel& model);
  std::vector<const Tensor2*> flat() const;
};

/// Reverse pass from an upstream logits gradient; gather backward
/// scatter-adds into source rows, max-pool backward routes to argmax rows.
void backward_from_dlogits(const BRepNetModel& model, const Batch& batch, const ForwardCache& cache,
                           const Tensor2& dlogits, ModelGrads& grads);

/// Forward + mean cross-entropy on the batch labels + full reverse pass.
/// When logits_out is given it receives the forward logits.
double loss_and_gradients(const BRepNetModel& model, const Batch& batch, ModelGrads& grads,
                          Tensor2* logits_out = nullptr);

/// Forward + loss only (used by finite-difference checks).
double loss_only(const BRepNetModel& model, const Batch& batch);

class ModelIoError : public std::runtime_error {
 public:
  enum class Kind { kVersion, kCorrupt, kChecksum };
  ModelIoError(Kind kind, std::string message) : std::runtime_error(std::move(message)), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Versioned binary container: header, config block, standardizer,
/// column-major parameter payload, CRC-32 checksum. load never returns a
/// partially filled model.
void save_model(const std::filesystem::path& path, const BRepNetModel& model);
BRepNetModel load_model(const std::filesystem::path& path);

}  // namespace brepnet
