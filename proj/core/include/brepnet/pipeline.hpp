#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "brepnet/data.hpp"
#include "brepnet/metrics.hpp"
#include "brepnet/model.hpp"

namespace brepnet {

/// Fits one standardizer per feature matrix on the pooled rows of the given
/// (training) records. Flag columns pass through when the config switch is
/// off.
StandardizerSet fit_standardizers(std::span<const SolidRecord> records, bool standardize_flag_columns = true,
                                  double sigma_guard = Standardizer::kSigmaGuard);

struct TrainOptions {
  ArchitectureConfig arch;
  int epochs = 50;
  Index batch_face_budget = 1000;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
};

struct EpochStats {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_accuracy = 0.0;  // from the training-pass logits
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  bool checkpointed = false;  // validation loss improved this epoch
};

struct TrainResult {
  BRepNetModel best_model;  // weights with the smallest validation loss
  std::vector<EpochStats> epochs;
  int best_epoch = 0;  // 0 when no epoch ran
  double best_val_loss = 0.0;
};

using EpochCallback = std::function<void(const EpochStats&)>;

/// Standard training loop: standardizer fit on the training records, Adam
/// updates over ~face-budget minibatches reshuffled each epoch with an
/// advancing seed, validation after every epoch, best-validation-loss
/// checkpointing. Deterministic given seed and inputs.
TrainResult train(std::span<const SolidRecord> train_records, std::span<const SolidRecord> val_records,
                  const TrainOptions& options, const EpochCallback& on_epoch = {});

struct EvalOptions {
  int threads = 1;  // results are independent of the thread count
};

struct EvalOutcome {
  EvalReport report;
  ConfusionTally tally{kNumSegmentClasses};
  double mean_loss = 0.0;  // face-weighted
};

EvalOutcome evaluate(const BRepNetModel& model, std::span<const SolidRecord> records, const EvalOptions& options = {});

struct GradCheckOptions {
  double step = 1e-6;       // central difference half-width
  double tolerance = 1e-5;  // max relative error to pass
  /// Test hook: perturb one analytic gradient entry before comparing, to
  /// prove the checker detects a broken reverse pass.
  struct Corruption {
    std::size_t block = 0;
    double delta = 1e-2;
  };
  std::optional<Corruption> corrupt;
};

struct GradCheckReport {
  struct Block {
    std::string name;
    double max_rel_err = 0.0;
  };
  std::vector<Block> blocks;
  double max_rel_err = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Central finite differences over every parameter against the analytic
/// reverse pass, relative error per parameter block.
GradCheckReport gradient_check(const BRepNetModel& model, const Batch& batch, const GradCheckOptions& options = {});

}  // namespace brepnet
