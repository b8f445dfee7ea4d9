#pragma once

#include <cmath>
#include <thread>
#include <vector>

#include "ame/dataset.hpp"
#include "ame/model.hpp"

namespace ame {

struct TrainOptions {
  int epochs = 60;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 0;
  int full_batch_cap = 512;  // at most this many examples per full-batch update
  int minibatch = 32;
  int threads = 2;
};

struct TrainResult {
  std::vector<double> loss_curve;  // mean BCE per epoch
};

struct EvalReport {
  double accuracy = 0.0;  // all four as percentages
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
  int tp = 0, fp = 0, tn = 0, fn = 0;
};

inline EvalReport eval_report_from_counts(int tp, int fp, int tn, int fn) {
  EvalReport r;
  r.tp = tp;
  r.fp = fp;
  r.tn = tn;
  r.fn = fn;
  int total = tp + fp + tn + fn;
  r.accuracy = total ? 100.0 * (tp + tn) / total : 0.0;
  r.recall = (tp + fn) ? 100.0 * tp / (tp + fn) : 0.0;
  r.precision = (tp + fp) ? 100.0 * tp / (tp + fp) : 0.0;
  r.f1 = (r.precision + r.recall) > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

using ExampleView = std::vector<const LabeledExample*>;

inline ExampleView view_of(const std::vector<LabeledExample>& examples,
                           const std::vector<std::size_t>& idx) {
  ExampleView v;
  v.reserve(idx.size());
  for (std::size_t i : idx) v.push_back(&examples[i]);
  return v;
}

inline ExampleView view_all(const std::vector<LabeledExample>& examples) {
  ExampleView v;
  v.reserve(examples.size());
  for (const auto& e : examples) v.push_back(&e);
  return v;
}

namespace detail {

struct BlockResult {
  double loss_sum = 0.0;
  std::map<nn::Tensor*, std::vector<double>> grads;
};

/// Forward+backward over one contiguous block of the batch, one tape per
/// example, accumulating gradients in example order. The scale folds the
/// 1/B of the batch mean into each example's seed gradient.
inline BlockResult run_block(AmeModel& model, const ExampleView& batch, std::size_t lo,
                             std::size_t hi, double inv_batch) {
  BlockResult r;
  for (std::size_t i = lo; i < hi; ++i) {
    nn::Tape tape;
    Forward f = model.forward(tape, batch[i]->input());
    nn::Val loss = tape.bce_with_logits(f.logit, batch[i]->label);
    r.loss_sum += tape.scalar_value(loss);
    tape.backward(tape.scale(loss, inv_batch), /*into_params=*/false);
    for (const auto& [tensor, grad] : tape.local_grads()) {
      auto& acc = r.grads[tensor];
      if (acc.empty()) acc.assign(grad.size(), 0.0);
      for (std::size_t k = 0; k < grad.size(); ++k) acc[k] += grad[k];
    }
  }
  return r;
}

}  // namespace detail

/// Gradient step on one batch: mean binary cross-entropy over the batch,
/// Adam update. The batch always splits into two fixed halves whose
/// gradients combine in block order, so results are bit-identical whether
/// the halves run serially or on two threads.
inline double train_batch(AmeModel& model, const ExampleView& batch, const TrainOptions& opt,
                          int batch_id) {
  const std::size_t n = batch.size();
  const double inv = 1.0 / static_cast<double>(n);
  const std::size_t mid = (n + 1) / 2;

  detail::BlockResult a, b;
  if (opt.threads > 1 && mid < n) {
    std::thread tb([&] { b = detail::run_block(model, batch, mid, n, inv); });
    a = detail::run_block(model, batch, 0, mid, inv);
    tb.join();
  } else {
    a = detail::run_block(model, batch, 0, mid, inv);
    b = detail::run_block(model, batch, mid, n, inv);
  }

  double loss = (a.loss_sum + b.loss_sum) * inv;
  if (!std::isfinite(loss))
    throw NonFiniteLossError("non-finite loss in batch " + std::to_string(batch_id));

  for (auto* block : {&a, &b}) {
    for (auto& [tensor, grad] : block->grads) {
      tensor->ensure_grad();
      for (std::size_t i = 0; i < grad.size(); ++i) tensor->grad[i] += grad[i];
    }
  }
  model.params.adam_step(opt.lr, opt.beta1, opt.beta2, opt.eps);
  return loss;
}

/// Fixed-epoch training with a per-epoch seeded shuffle. Datasets up to
/// full_batch_cap train full-batch; larger ones use minibatches.
inline TrainResult train(AmeModel& model, const ExampleView& train_set, const TrainOptions& opt) {
  if (train_set.empty()) throw TooFewExamplesError("empty training set");
  for (const auto* e : train_set)
    if (e->vuln != train_set.front()->vuln)
      throw Error("training set mixes vulnerability types");

  Rng rng(opt.seed);
  TrainResult result;
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  const bool full_batch = train_set.size() <= static_cast<std::size_t>(opt.full_batch_cap);
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t seen = 0;
    int batch_id = 0;
    std::size_t step = full_batch ? train_set.size() : static_cast<std::size_t>(opt.minibatch);
    for (std::size_t at = 0; at < order.size(); at += step) {
      ExampleView batch;
      for (std::size_t i = at; i < std::min(at + step, order.size()); ++i)
        batch.push_back(train_set[order[i]]);
      double loss = train_batch(model, batch, opt, batch_id++);
      epoch_loss += loss * static_cast<double>(batch.size());
      seen += batch.size();
    }
    result.loss_curve.push_back(epoch_loss / static_cast<double>(seen));
  }
  return result;
}

inline EvalReport evaluate(AmeModel& model, const ExampleView& test_set) {
  if (test_set.empty()) throw EmptyTestSetError("empty test set");
  int tp = 0, fp = 0, tn = 0, fn = 0;
  for (const auto* e : test_set) {
    int yhat = model.trace(e->input()).yhat;
    if (yhat == 1 && e->label == 1) tp++;
    if (yhat == 1 && e->label == 0) fp++;
    if (yhat == 0 && e->label == 0) tn++;
    if (yhat == 0 && e->label == 1) fn++;
  }
  return eval_report_from_counts(tp, fp, tn, fn);
}

// ---------------------------------------------------------------------------
// Interpretability statistics
// ---------------------------------------------------------------------------

struct FeatureStats {
  int above_sigma = 0;  // count of weight strictly greater than sigma
  int argmax = 0;       // count of having the maximum weight (ties -> lowest index)
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
};

struct WeightStats {
  double sigma = 0.25;
  std::vector<FeatureStats> features;
  std::vector<std::vector<double>> per_example;
};

/// Statistics over externally supplied weight vectors; the model-driven
/// overload below feeds it and tests recount against it.
inline WeightStats weight_stats_from(const std::vector<std::vector<double>>& weights,
                                     double sigma) {
  if (weights.empty()) throw EmptyTestSetError("no weight vectors");
  std::size_t nf = weights.front().size();
  WeightStats ws;
  ws.sigma = sigma;
  ws.features.resize(nf);
  ws.per_example = weights;
  for (const auto& w : weights) {
    std::size_t arg = 0;
    for (std::size_t i = 0; i < nf; ++i) {
      if (w[i] > sigma) ws.features[i].above_sigma++;
      if (w[i] > w[arg]) arg = i;  // strict: ties keep the lowest index
      ws.features[i].mean += w[i];
    }
    ws.features[arg].argmax++;
  }
  for (std::size_t i = 0; i < nf; ++i) ws.features[i].mean /= static_cast<double>(weights.size());
  for (const auto& w : weights)
    for (std::size_t i = 0; i < nf; ++i) {
      double d = w[i] - ws.features[i].mean;
      ws.features[i].stddev += d * d;
    }
  for (std::size_t i = 0; i < nf; ++i)
    ws.features[i].stddev = std::sqrt(ws.features[i].stddev / static_cast<double>(weights.size()));
  return ws;
}

inline WeightStats weight_stats(AmeModel& model, const ExampleView& test_set,
                                double sigma = 0.25) {
  if (test_set.empty()) throw EmptyTestSetError("empty test set");
  std::vector<std::vector<double>> weights;
  weights.reserve(test_set.size());
  for (const auto* e : test_set) weights.push_back(model.trace(e->input()).weights);
  return weight_stats_from(weights, sigma);
}

/// Trains and evaluates one variant (AME, AME-RG or AME-RP) from scratch.
inline EvalReport run_ablation(nn::Variant variant, Vuln vuln, const ExampleView& train_set,
                               const ExampleView& test_set, const TrainOptions& opt,
                               const ModelConfig& base = ModelConfig{}) {
  ModelConfig cfg = base;
  cfg.vuln = vuln;
  cfg.variant = variant;
  AmeModel model(cfg);
  model.init(opt.seed);
  train(model, train_set, opt);
  return evaluate(model, test_set);
}

}  // namespace ame
