#ifndef MANIF_TRAIN_HPP
#define MANIF_TRAIN_HPP

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "manif/dataset.hpp"
#include "manif/encoder.hpp"
#include "manif/errors.hpp"
#include "manif/losses.hpp"
#include "manif/mmcr.hpp"
#include "manif/rng.hpp"
#include "manif/split.hpp"

namespace manif {

struct TrainConfig {
  int epochs = 100;
  double lr = 0.1;
  int batch_size = 16;
  std::uint64_t seed = 0;
  LossKind loss = LossKind::cross_entropy;
  double mmcr_lambda = 0.0;  // capacity regularizer weight, 0 disables

  void validate() const {
    if (epochs < 0) throw ConfigError("train: negative epochs");
    if (batch_size < 1) throw ConfigError("train: batch_size < 1");
    if (lr <= 0.0) throw ConfigError("train: lr must be positive");
    if (mmcr_lambda < 0.0) throw ConfigError("train: mmcr_lambda < 0");
  }
};

// Mean training loss over `batch` plus the optional capacity regularizer,
// with its exact gradient. cross_entropy applies to the head logits;
// representation_mse reconstructs the input from the final output. The
// regularizer groups the batch's representations by class label.
inline std::pair<double, ParamVector> training_loss_gradient(
    const EncoderSpec& spec, const ParamVector& params, const Dataset& data,
    std::span<const int> batch, LossKind kind, double mmcr_lambda) {
  if (batch.empty()) throw DimensionError("training_loss_gradient: empty batch");
  if (kind == LossKind::cross_entropy && !spec.head)
    throw ConfigError("cross_entropy requires a class head");
  std::vector<Vec> inputs;
  inputs.reserve(batch.size());
  for (int i : batch) inputs.push_back(data.inputs[i]);
  double inv_b = 1.0 / static_cast<double>(batch.size());

  return loss_gradient(
      spec, params, inputs,
      [&](const std::vector<ForwardResult>& outs, std::vector<Vec>& d_rep,
          std::vector<Vec>& d_logits) {
        double total = 0.0;
        for (std::size_t s = 0; s < outs.size(); ++s) {
          if (kind == LossKind::cross_entropy) {
            total += inv_b * cross_entropy_loss(outs[s].logits,
                                                data.labels[batch[s]],
                                                &d_logits[s], inv_b);
          } else {
            const Vec& out = final_output(outs[s]);
            if (out.size() != inputs[s].size())
              throw ConfigError(
                  "representation_mse requires output dim == input dim");
            Vec* slot = outs[s].logits.empty() ? &d_rep[s] : &d_logits[s];
            total += inv_b * mse_loss(out, inputs[s], slot, inv_b);
          }
        }
        if (mmcr_lambda > 0.0) {
          // group representations by class present in the batch
          std::vector<int> class_slot(data.class_count, -1);
          std::vector<std::vector<Vec>> groups;
          std::vector<std::vector<std::size_t>> members;
          for (std::size_t s = 0; s < outs.size(); ++s) {
            int label = data.labels[batch[s]];
            if (class_slot[label] < 0) {
              class_slot[label] = static_cast<int>(groups.size());
              groups.emplace_back();
              members.emplace_back();
            }
            groups[class_slot[label]].push_back(outs[s].representation);
            members[class_slot[label]].push_back(s);
          }
          std::vector<std::vector<Vec>> reg_grads;
          total += mmcr_regularizer(groups, mmcr_lambda, &reg_grads);
          for (std::size_t g = 0; g < members.size(); ++g)
            for (std::size_t m = 0; m < members[g].size(); ++m) {
              std::size_t s = members[g][m];
              if (d_rep[s].empty()) d_rep[s] = reg_grads[g][m];
              else axpy(d_rep[s], 1.0, reg_grads[g][m]);
            }
        }
        return total;
      });
}

// Minibatch SGD over the given index subset, starting from params0. Batch
// order is reshuffled each epoch from `rng` alone, so identical seeds give
// identical parameter trajectories. `loss_trace`, when given, records the
// mean per-batch objective per epoch.
inline ParamVector sgd_train(const EncoderSpec& spec, ParamVector params,
                             const Dataset& data, std::vector<int> indices,
                             const TrainConfig& cfg, Rng& rng,
                             std::vector<double>* loss_trace = nullptr) {
  cfg.validate();
  if (indices.empty()) throw ConfigError("sgd_train: empty training subset");
  if (loss_trace) loss_trace->clear();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(indices);
    double epoch_loss = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < indices.size();
         start += cfg.batch_size) {
      std::size_t end = std::min(indices.size(),
                                 start + static_cast<std::size_t>(cfg.batch_size));
      std::span<const int> batch(indices.data() + start, end - start);
      auto [value, grad] =
          training_loss_gradient(spec, params, data, batch, cfg.loss,
                                 cfg.mmcr_lambda);
      params = sgd_step(params, grad, cfg.lr);
      epoch_loss += value;
      ++batches;
    }
    if (loss_trace) loss_trace->push_back(epoch_loss / batches);
  }
  return params;
}

// Fresh training run: seeded init, then SGD on the whole dataset.
inline ParamVector train(const EncoderSpec& spec, const Dataset& data,
                         const TrainConfig& cfg,
                         std::vector<double>* loss_trace = nullptr) {
  data.validate();
  Rng rng(cfg.seed);
  ParamVector params = init_params(spec, rng);
  std::vector<int> indices(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) indices[i] = static_cast<int>(i);
  return sgd_train(spec, std::move(params), data, std::move(indices), cfg, rng,
                   loss_trace);
}

// Exact baseline: a fresh model trained on the retained indices only. The
// erased samples are excluded by construction; only split.retained is read.
inline ParamVector retrain_from_scratch(const EncoderSpec& spec,
                                        const Dataset& data,
                                        const UnlearnSplit& split,
                                        const TrainConfig& cfg) {
  Rng rng(cfg.seed);
  ParamVector params = init_params(spec, rng);
  return sgd_train(spec, std::move(params), data, split.retained, cfg, rng);
}

struct GaConfig {
  int steps = 10;
  double lr = 0.05;
  bool early_stop = true;  // stop once erased accuracy falls below chance
  LossKind loss = LossKind::cross_entropy;

  void validate() const {
    if (steps < 0) throw ConfigError("gradient ascent: negative steps");
    if (lr <= 0.0) throw ConfigError("gradient ascent: lr must be positive");
  }
};

// Gradient ascent on the erased set's training loss:
//   theta <- theta + lr * grad L_erased(theta), repeated `steps` times.
// With early_stop set (cross-entropy only), ascent halts once accuracy on
// the erased samples drops below 1/class_count.
inline ParamVector gradient_ascent_unlearn(const EncoderSpec& spec,
                                           const ParamVector& theta_o,
                                           const Dataset& data,
                                           const std::vector<int>& erased,
                                           const GaConfig& cfg) {
  cfg.validate();
  if (erased.empty()) throw ConfigError("gradient ascent: empty erased set");
  ParamVector params = theta_o;
  for (int s = 0; s < cfg.steps; ++s) {
    auto [value, grad] = training_loss_gradient(spec, params, data, erased,
                                                cfg.loss, 0.0);
    params = sgd_step(params, grad, -cfg.lr);  // ascent
    if (cfg.early_stop && cfg.loss == LossKind::cross_entropy && spec.head) {
      int correct = 0;
      for (int i : erased) {
        const Vec& logits = forward(spec, params, data.inputs[i]).logits;
        int arg = 0;
        for (std::size_t j = 1; j < logits.size(); ++j)
          if (logits[j] > logits[arg]) arg = static_cast<int>(j);
        if (arg == data.labels[i]) ++correct;
      }
      double acc = static_cast<double>(correct) / erased.size();
      if (acc < 1.0 / data.class_count) break;
    }
  }
  return params;
}

// Labeled fine-tuning on the retained set, starting from theta_u.
inline ParamVector fine_tune(const EncoderSpec& spec,
                             const ParamVector& theta_u, const Dataset& data,
                             const std::vector<int>& retained, int epochs,
                             double lr, int batch_size, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.lr = lr;
  cfg.batch_size = batch_size;
  cfg.seed = seed;
  cfg.loss = LossKind::cross_entropy;
  Rng rng(seed);
  return sgd_train(spec, theta_u, data, retained, cfg, rng);
}

}  // namespace manif

#endif
