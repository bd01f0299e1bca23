#include "brepnet/metrics.hpp"

#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace brepnet {

ConfusionTally::ConfusionTally(Index num_classes) : num_classes_(num_classes) {
  if (num_classes < 1) throw std::invalid_argument("ConfusionTally: need at least one class");
  counts_.assign(static_cast<std::size_t>(num_classes) * num_classes, 0);
}

long long ConfusionTally::count(Index truth, Index predicted) const {
  return counts_[static_cast<std::size_t>(truth) * num_classes_ + predicted];
}

long long ConfusionTally::trace() const {
  long long t = 0;
  for (Index k = 0; k < num_classes_; ++k) t += count(k, k);
  return t;
}

void ConfusionTally::add(Index truth, Index predicted) {
  if (truth < 0 || truth >= num_classes_) throw std::invalid_argument("tally: label out of range");
  if (predicted < 0 || predicted >= num_classes_) throw std::invalid_argument("tally: prediction out of range");
  ++counts_[static_cast<std::size_t>(truth) * num_classes_ + predicted];
  ++total_;
}

void ConfusionTally::merge(const ConfusionTally& other) {
  if (other.num_classes_ != num_classes_) throw std::invalid_argument("tally: class count mismatch");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  total_ += other.total_;
}

long long ConfusionTally::true_positives(Index cls) const { return count(cls, cls); }

long long ConfusionTally::false_positives(Index cls) const {
  long long fp = 0;
  for (Index t = 0; t < num_classes_; ++t) {
    if (t != cls) fp += count(t, cls);
  }
  return fp;
}

long long ConfusionTally::false_negatives(Index cls) const {
  long long fn = 0;
  for (Index p = 0; p < num_classes_; ++p) {
    if (p != cls) fn += count(cls, p);
  }
  return fn;
}

Index argmax_row(std::span<const double> row) {
  Index best = 0;
  for (Index c = 1; c < static_cast<Index>(row.size()); ++c) {
    if (row[c] > row[best]) best = c;  // ties keep the lowest class index
  }
  return best;
}

void accumulate(ConfusionTally& tally, const Tensor2& logits, std::span<const int> labels) {
  if (static_cast<Index>(labels.size()) != logits.rows()) {
    throw std::invalid_argument("accumulate: one label per logits row required");
  }
  if (logits.cols() != tally.num_classes()) throw std::invalid_argument("accumulate: class count mismatch");
  for (Index r = 0; r < logits.rows(); ++r) {
    tally.add(labels[r], argmax_row(logits.row(r)));
  }
}

double accuracy(const ConfusionTally& tally) {
  if (tally.total() == 0) throw std::invalid_argument("accuracy: empty tally");
  return static_cast<double>(tally.trace()) / static_cast<double>(tally.total());
}

IouResult iou(const ConfusionTally& tally) {
  if (tally.total() == 0) throw std::invalid_argument("iou: empty tally");
  IouResult result;
  double sum = 0.0;
  Index included = 0;
  for (Index k = 0; k < tally.num_classes(); ++k) {
    const long long tp = tally.true_positives(k);
    const long long fp = tally.false_positives(k);
    const long long fn = tally.false_negatives(k);
    // Pooled over every face, so a class is excluded only when it appears in
    // neither the truth nor the predictions of the whole set.
    const bool excluded = (tp + fp + fn) == 0;
    result.excluded.push_back(excluded);
    if (excluded) {
      result.per_class.push_back(0.0);
    } else {
      const double value = static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
      result.per_class.push_back(value);
      sum += value;
      ++included;
    }
  }
  result.mean = included > 0 ? sum / included : 0.0;
  return result;
}

EvalReport make_report(const ConfusionTally& tally) {
  EvalReport report;
  report.faces = tally.total();
  report.accuracy = accuracy(tally);
  const IouResult r = iou(tally);
  report.mean_iou = r.mean;
  report.per_class_iou = r.per_class;
  report.per_class_excluded = r.excluded;
  return report;
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["faces"] = report.faces;
  j["accuracy"] = report.accuracy;
  j["mean_iou"] = report.mean_iou;
  nlohmann::json per_class = nlohmann::json::array();
  for (std::size_t k = 0; k < report.per_class_iou.size(); ++k) {
    per_class.push_back({{"class", k},
                         {"name", k < kSegmentLabelNames.size() ? std::string(kSegmentLabelNames[k]) : std::to_string(k)},
                         {"iou", report.per_class_iou[k]},
                         {"excluded", static_cast<bool>(report.per_class_excluded[k])}});
  }
  j["per_class"] = std::move(per_class);
  return j.dump(2);
}

std::string report_to_text(const EvalReport& report) {
  std::ostringstream out;
  out << "faces evaluated: " << report.faces << "\n";
  out << "accuracy:        " << report.accuracy << "\n";
  out << "mean IoU:        " << report.mean_iou << "\n";
  out << "per-class IoU:\n";
  for (std::size_t k = 0; k < report.per_class_iou.size(); ++k) {
    const std::string name = k < kSegmentLabelNames.size() ? std::string(kSegmentLabelNames[k]) : std::to_string(k);
    out << "  " << name;
    for (std::size_t pad = name.size(); pad < 14; ++pad) out << ' ';
    if (report.per_class_excluded[k]) {
      out << "(absent)\n";
    } else {
      out << report.per_class_iou[k] << "\n";
    }
  }
  return out.str();
}

}  // namespace brepnet
