#include "brepnet/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace brepnet {
namespace {

void require_labels(std::span<const SolidRecord> records, const char* what) {
  for (const SolidRecord& record : records) {
    if (!record.has_labels()) {
      throw std::invalid_argument(std::string(what) + ": record '" + record.id + "' has no labels");
    }
  }
}

}  // namespace

StandardizerSet fit_standardizers(std::span<const SolidRecord> records, bool standardize_flag_columns,
                                  double sigma_guard) {
  if (records.empty()) throw std::invalid_argument("fit_standardizers: empty training set");
  std::vector<Tensor2> xf, xe, xc;
  for (const SolidRecord& record : records) {
    xf.push_back(encode_faces(record.faces));
    xe.push_back(encode_edges(record.edges));
    xc.push_back(encode_coedges(record.coedges));
  }
  const Tensor2 faces = vconcat(std::span<const Tensor2>(xf));
  const Tensor2 edges = vconcat(std::span<const Tensor2>(xe));
  const Tensor2 coedges = vconcat(std::span<const Tensor2>(xc));

  std::vector<Index> face_pass, edge_pass, coedge_pass;
  if (!standardize_flag_columns) {
    face_pass = face_flag_columns();
    edge_pass = edge_flag_columns();
    coedge_pass = coedge_flag_columns();
  }
  StandardizerSet set;
  set.faces = Standardizer::fit(faces, sigma_guard, face_pass);
  set.edges = Standardizer::fit(edges, sigma_guard, edge_pass);
  set.coedges = Standardizer::fit(coedges, sigma_guard, coedge_pass);
  return set;
}

TrainResult train(std::span<const SolidRecord> train_records, std::span<const SolidRecord> val_records,
                  const TrainOptions& options, const EpochCallback& on_epoch) {
  if (train_records.empty()) throw std::invalid_argument("train: empty training set");
  if (val_records.empty()) throw std::invalid_argument("train: empty validation set");
  if (options.epochs < 0) throw std::invalid_argument("train: negative epoch count");
  require_labels(train_records, "train");
  require_labels(val_records, "train (validation)");
  validate_config(options.arch);

  BRepNetModel model = init_model(options.arch, options.seed);
  model.standardizer =
      fit_standardizers(train_records, options.arch.standardize_flag_columns);

  std::vector<Tensor2*> params;
  for (const ParameterBlockRef& ref : parameter_blocks(model)) params.push_back(ref.tensor);
  AdamState adam = AdamState::create(params, options.learning_rate, options.beta1, options.beta2, options.epsilon);

  TrainResult result;
  result.best_model = model;
  result.best_val_loss = std::numeric_limits<double>::infinity();

  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    const std::vector<Batch> batches =
        make_batches(train_records, options.batch_face_budget, options.seed + static_cast<std::uint64_t>(epoch),
                     model.standardizer);

    double loss_sum = 0.0;
    long long faces = 0;
    ConfusionTally train_tally(options.arch.num_classes);
    for (const Batch& batch : batches) {
      ModelGrads grads = ModelGrads::zeros_like(model);
      Tensor2 logits;
      const double loss = loss_and_gradients(model, batch, grads, &logits);
      accumulate(train_tally, logits, batch.labels);
      loss_sum += loss * static_cast<double>(batch.num_faces());
      faces += batch.num_faces();

      const std::vector<const Tensor2*> grad_ptrs = grads.flat();
      adam_step(adam, params, grad_ptrs);
    }

    const EvalOutcome val = evaluate(model, val_records);
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(faces);
    stats.train_accuracy = accuracy(train_tally);
    stats.val_loss = val.mean_loss;
    stats.val_accuracy = val.report.accuracy;
    stats.checkpointed = stats.val_loss < result.best_val_loss;
    if (stats.checkpointed) {
      result.best_val_loss = stats.val_loss;
      result.best_epoch = epoch;
      result.best_model = model;
    }
    result.epochs.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  return result;
}

EvalOutcome evaluate(const BRepNetModel& model, std::span<const SolidRecord> records, const EvalOptions& options) {
  if (records.empty()) throw std::invalid_argument("evaluate: no records");
  require_labels(records, "evaluate");
  const int threads = std::max(1, options.threads);

  struct PerSolid {
    ConfusionTally tally{kNumSegmentClasses};
    double loss = 0.0;
    long long faces = 0;
  };
  std::vector<PerSolid> partial(records.size());

  auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Batch batch = make_batch(std::span<const SolidRecord>(&records[i], 1), model.standardizer);
      const Tensor2 logits = classify_faces(model, batch);
      PerSolid& out = partial[i];
      out.tally = ConfusionTally(model.config.num_classes);
      accumulate(out.tally, logits, batch.labels);
      out.loss = cross_entropy(logits, batch.labels).loss;
      out.faces = batch.num_faces();
    }
  };

  if (threads == 1 || records.size() < 2) {
    run_range(0, records.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunks = std::min<std::size_t>(threads, records.size());
    const std::size_t per_chunk = (records.size() + chunks - 1) / chunks;
    for (std::size_t c = 0; c < chunks; ++c) {
      const std::size_t begin = c * per_chunk;
      const std::size_t end = std::min(records.size(), begin + per_chunk);
      if (begin < end) pool.emplace_back(run_range, begin, end);
    }
    for (auto& t : pool) t.join();
  }

  // Sequential reduction in record order keeps results independent of the
  // thread count.
  EvalOutcome outcome;
  outcome.tally = ConfusionTally(model.config.num_classes);
  double loss_sum = 0.0;
  long long faces = 0;
  for (const PerSolid& p : partial) {
    outcome.tally.merge(p.tally);
    loss_sum += p.loss * static_cast<double>(p.faces);
    faces += p.faces;
  }
  outcome.mean_loss = loss_sum / static_cast<double>(faces);
  outcome.report = make_report(outcome.tally);
  return outcome;
}

GradCheckReport gradient_check(const BRepNetModel& model, const Batch& batch, const GradCheckOptions& options) {
  BRepNetModel work = model;

  ModelGrads analytic = ModelGrads::zeros_like(work);
  loss_and_gradients(work, batch, analytic);

  std::vector<ParameterBlockRef> blocks = parameter_blocks(work);
  std::vector<const Tensor2*> grad_blocks = analytic.flat();
  if (blocks.size() != grad_blocks.size()) throw std::logic_error("gradient_check: block layout mismatch");

  if (options.corrupt) {
    const std::size_t b = options.corrupt->block % blocks.size();
    // const_cast is confined to the test hook: perturb one analytic entry.
    const_cast<Tensor2*>(grad_blocks[b])->data()[0] += options.corrupt->delta;
  }

  GradCheckReport report;
  report.tolerance = options.tolerance;
  const double h = options.step;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    Tensor2& theta = *blocks[b].tensor;
    const Tensor2& g = *grad_blocks[b];
    double block_max = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double original = theta.data()[i];
      theta.data()[i] = original + h;
      const double loss_plus = loss_only(work, batch);
      theta.data()[i] = original - h;
      const double loss_minus = loss_only(work, batch);
      theta.data()[i] = original;
      const double fd = (loss_plus - loss_minus) / (2.0 * h);
      const double analytic_value = g.data()[i];
      const double scale = std::max({1.0, std::abs(fd), std::abs(analytic_value)});
      block_max = std::max(block_max, std::abs(fd - analytic_value) / scale);
    }
    report.blocks.push_back({blocks[b].name, block_max});
    report.max_rel_err = std::max(report.max_rel_err, block_max);
  }
  report.passed = report.max_rel_err < options.tolerance;
  return report;
}

}  // namespace brepnet
