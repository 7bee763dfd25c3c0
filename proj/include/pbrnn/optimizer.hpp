#pragma once

#include "pbrnn/core_math.hpp"
#include "pbrnn/errors.hpp"
#include "pbrnn/sample.hpp"

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <span>
#include <vector>

namespace pbrnn {

struct AdamConfig {
  double alpha = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::uint64_t step = 0;
  std::vector<double> m;
  std::vector<double> v;

  AdamState() = default;
  AdamState(AdamConfig cfg, std::size_t parameter_count)
      : config(cfg), m(parameter_count, 0.0), v(parameter_count, 0.0) {}
};

/// One bias-corrected ADAM step applied in place to `params`.
void adam_update(AdamState &state, std::span<double> params, std::span<const double> grads);

struct TrainConfig {
  std::size_t batch_size = 64;
  std::size_t epochs = 30;
  std::uint64_t shuffle_seed = 7;
  /// Fraction of the dataset withheld from updates and scored each epoch.
  double holdout_fraction = 0.0;
  /// 0 disables progress logging.
  std::size_t log_every = 0;

  void validate() const;
};

struct EpochStats {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  /// Only meaningful when holdout_fraction > 0.
  double holdout_accuracy = 0.0;
};

struct TrainResult {
  std::vector<EpochStats> history;
  std::uint64_t steps = 0;

  double final_loss() const { return history.empty() ? 0.0 : history.back().mean_loss; }
};

/// Writes "epoch mean_loss" lines.
void write_loss_history(std::ostream &out, const TrainResult &result);

/// A parameter set trainable by `train`: gradients share the parameter type.
template <class M>
concept TrainableModel = requires(const M &cm, M &m, const SampleSequence &s,
                                  std::span<const double> flat) {
  { cm.flatten() } -> std::same_as<std::vector<double>>;
  m.assign_flat(flat);
  { zeros_like(cm) } -> std::same_as<M>;
  { accumulate_loss_gradient(cm, s, m) } -> std::convertible_to<double>;
  { classify(cm, s).class_id } -> std::convertible_to<ClassId>;
};

/// Mean of per-sample gradients over `batch`, flattened. Returns the mean loss.
template <TrainableModel M>
double batch_gradient(const M &model, std::span<const SampleSequence *const> batch,
                      std::vector<double> &flat_grad) {
  M grads = zeros_like(model);
  double loss = 0.0;
  for (const SampleSequence *s : batch) loss += accumulate_loss_gradient(model, *s, grads);
  flat_grad = grads.flatten();
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (double &g : flat_grad) g *= scale;
  return loss * scale;
}

void log_epoch(const EpochStats &stats, std::size_t epochs);

/// Mini-batch ADAM over `dataset` with a fresh full permutation each epoch.
/// Deterministic given the model, data, and seeds.
template <TrainableModel M>
TrainResult train(M &model, std::span<const SampleSequence> dataset, const TrainConfig &cfg,
                  const AdamConfig &adam = {}) {
  cfg.validate();
  if (dataset.empty()) throw ArgumentError("train: empty dataset");

  Rng rng(cfg.shuffle_seed);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<std::size_t> holdout;
  if (cfg.holdout_fraction > 0.0) {
    rng.shuffle(order);
    const auto n_hold = static_cast<std::size_t>(cfg.holdout_fraction * dataset.size());
    holdout.assign(order.end() - static_cast<std::ptrdiff_t>(n_hold), order.end());
    order.resize(order.size() - n_hold);
    if (order.empty()) throw ArgumentError("train: holdout leaves no training samples");
  }

  std::vector<double> params = model.flatten();
  AdamState state(adam, params.size());
  std::vector<double> grad;
  std::vector<const SampleSequence *> batch;
  batch.reserve(cfg.batch_size);

  TrainResult result;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t i = start; i < stop; ++i) batch.push_back(&dataset[order[i]]);
      loss_sum += batch_gradient(model, std::span<const SampleSequence *const>(batch), grad) *
                  static_cast<double>(batch.size());
      adam_update(state, params, grad);
      model.assign_flat(params);
    }
    EpochStats stats{epoch, loss_sum / static_cast<double>(order.size()), 0.0};
    if (!holdout.empty()) {
      std::size_t correct = 0;
      for (std::size_t i : holdout)
        if (classify(model, dataset[i]).class_id == dataset[i].label) ++correct;
      stats.holdout_accuracy = static_cast<double>(correct) / static_cast<double>(holdout.size());
    }
    result.history.push_back(stats);
    if (cfg.log_every != 0 && (epoch % cfg.log_every == 0 || epoch == cfg.epochs))
      log_epoch(stats, cfg.epochs);
  }
  result.steps = state.step;
  return result;
}

} // namespace pbrnn
