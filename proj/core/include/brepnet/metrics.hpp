#pragma once

#include <span>
#include <string>
#include <vector>

#include "brepnet/tensor.hpp"
#include "brepnet/types.hpp"

namespace brepnet {

/// (true, predicted) counts pooled over every face of every evaluated
/// solid. Tallies are mergeable, so partial tallies can be built
/// concurrently and summed.
class ConfusionTally {
 public:
  explicit ConfusionTally(Index num_classes = kNumSegmentClasses);

  Index num_classes() const { return num_classes_; }
  long long count(Index truth, Index predicted) const;
  long long total() const { return total_; }
  long long trace() const;

  void add(Index truth, Index predicted);
  void merge(const ConfusionTally& other);

  long long true_positives(Index cls) const;
  long long false_positives(Index cls) const;
  long long false_negatives(Index cls) const;

 private:
  Index num_classes_;
  std::vector<long long> counts_;  // row = truth, col = predicted
  long long total_ = 0;
};

/// Argmax prediction per face; logit ties break to the lowest class index.
/// Throws on labels outside [0, num_classes).
void accumulate(ConfusionTally& tally, const Tensor2& logits, std::span<const int> labels);

Index argmax_row(std::span<const double> row);

/// trace / total. Throws on an empty tally.
double accuracy(const ConfusionTally& tally);

struct IouResult {
  std::vector<double> per_class;
  std::vector<bool> excluded;  // classes absent from both truth and prediction
  double mean = 0.0;           // over non-excluded classes
};

/// IoU_k = TP / (TP + FP + FN) over the pooled face population. A class with
/// no pooled truth or prediction occurrences is excluded from the mean.
IouResult iou(const ConfusionTally& tally);

struct EvalReport {
  long long faces = 0;
  double accuracy = 0.0;
  double mean_iou = 0.0;
  std::vector<double> per_class_iou;
  std::vector<bool> per_class_excluded;
};

EvalReport make_report(const ConfusionTally& tally);
std::string report_to_json(const EvalReport& report);
std::string report_to_text(const EvalReport& report);

}  // namespace brepnet
