#ifndef MANIF_UNLEARN_HPP
#define MANIF_UNLEARN_HPP

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "manif/bezier.hpp"
#include "manif/dataset.hpp"
#include "manif/distance.hpp"
#include "manif/encoder.hpp"
#include "manif/errors.hpp"
#include "manif/losses.hpp"
#include "manif/rng.hpp"
#include "manif/split.hpp"

namespace manif {

enum class MarginMode { fixed, adaptive };

inline const char* to_string(MarginMode m) {
  return m == MarginMode::fixed ? "fixed" : "adaptive";
}

inline MarginMode margin_mode_from_string(const std::string& s) {
  if (s == "fixed") return MarginMode::fixed;
  if (s == "adaptive") return MarginMode::adaptive;
  throw ConfigError("unknown margin mode: " + s);
}

enum class WInit { theta_o, theta_u };

struct UnlearnConfig {
  int k = 5;                      // neighbor count used when building splits
  double t_star = 0.5;            // surrogate position on the curve
  int epochs = 20;
  double lr = 0.05;               // triplet step size on theta_u
  double path_lr = 0.05;          // control-point step size
  int path_steps_per_epoch = 8;
  int batch_size = 16;            // erased minibatch size
  int path_batch_size = 16;       // retained minibatch size for path steps
  Metric distance = Metric::euclidean;
  MarginMode margin_mode = MarginMode::adaptive;
  double fixed_margin = 0.01;     // used when margin_mode == fixed
  PathLoss path_loss = PathLoss::representation_distill;
  WInit w_init = WInit::theta_o;  // both endpoints coincide at start either way
  std::uint64_t seed = 0;

  void validate() const {
    if (k < 1) throw ConfigError("unlearn: k < 1");
    if (!(t_star >= 0.0 && t_star <= 1.0))
      throw ConfigError("unlearn: t_star outside [0, 1]");
    if (epochs < 0) throw ConfigError("unlearn: negative epochs");
    if (lr <= 0.0 || path_lr <= 0.0)
      throw ConfigError("unlearn: learning rates must be positive");
    if (path_steps_per_epoch < 0)
      throw ConfigError("unlearn: negative path steps");
    if (batch_size < 1 || path_batch_size < 1)
      throw ConfigError("unlearn: batch sizes must be positive");
    if (fixed_margin < 0.0) throw ConfigError("unlearn: negative fixed margin");
  }
};

struct UnlearnReport {
  ParamVector theta_u;
  std::vector<double> triplet_trace;  // per epoch: summed hinge loss
  std::vector<double> path_trace;     // per epoch: mean control-point objective
  std::vector<double> margin_trace;   // per epoch: mean margin in effect
  double rt_seconds = 0.0;            // wall-clock unlearning time
};

// Representation-space unlearning with a self-mode-connectivity surrogate.
//
// Starting from theta_u = theta_o, each epoch
//   (A) trains the Bezier control point w on retained (neighbor-union)
//       minibatches at random curve positions t,
//   (B) freezes the surrogate theta~ = phi_w(t*),
//   (C) computes each erased sample's neighbor centroid and adaptive
//       margin under theta~, then steps theta_u on minibatches of the
//       hinge triplet loss (away from the cached original representation,
//       toward the neighbor centroid).
// Fixed-margin mode skips the curve entirely: pull targets are the
// neighbor centroids under the current theta_u (recomputed once per
// epoch) and every margin is cfg.fixed_margin.
//
// With zero epochs the returned parameters are bit-identical to theta_o.
inline UnlearnReport manif_smc_unlearn(const EncoderSpec& spec,
                                       const ParamVector& theta_o,
                                       const Dataset& data,
                                       const UnlearnSplit& split,
                                       const UnlearnConfig& cfg) {
  cfg.validate();
  split.validate(data.size());
  if (theta_o.size() != param_count(spec))
    throw DimensionError("unlearn: parameter count mismatch");

  auto t0 = std::chrono::steady_clock::now();
  UnlearnReport report;
  report.theta_u = theta_o;

  bool smc = cfg.margin_mode == MarginMode::adaptive;
  BezierPath path;
  std::map<int, Vec> union_distill_targets;
  if (smc) {
    path.theta_u = theta_o;
    path.theta_o = theta_o;
    path.w = theta_o;  // theta_u and theta_o coincide at start, so both
                       // w_init choices give the same initial point
    for (int i : split.neighbor_union)
      union_distill_targets.emplace(
          i, forward(spec, theta_o, data.inputs[i]).representation);
  }

  Rng path_rng(derive_seed(cfg.seed, "unlearn/path"));
  Rng batch_rng(derive_seed(cfg.seed, "unlearn/batches"));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double path_loss_value = 0.0;
    ParamVector theta_tilde;
    if (smc) {
      // (A) control-point training on retained minibatches
      path.theta_u = report.theta_u;
      path = train_control_point(spec, std::move(path), data,
                                 split.neighbor_union, union_distill_targets,
                                 cfg.path_loss, cfg.path_steps_per_epoch,
                                 cfg.path_batch_size, cfg.path_lr, path_rng,
                                 &path_loss_value);
      // (B) surrogate at t*
      theta_tilde = bezier_point(path, cfg.t_star);
    } else {
      theta_tilde = report.theta_u;
    }

    // (C) per-epoch constants: pull targets and margins under theta~
    std::map<int, Vec> targets;
    std::map<int, double> margins;
    double margin_sum = 0.0;
    for (int e : split.erased) {
      Vec c = centroid_of_indices(spec, theta_tilde, data,
                                  split.neighbor_sets.at(e));
      double alpha;
      if (smc) {
        Vec f = forward(spec, theta_tilde, data.inputs[e]).representation;
        double v = dist(f, split.original_reps.at(e), cfg.distance) -
                   dist(f, c, cfg.distance);
        alpha = v > 0.0 ? v : 0.0;
      } else {
        alpha = cfg.fixed_margin;
      }
      margin_sum += alpha;
      targets.emplace(e, std::move(c));
      margins.emplace(e, alpha);
    }

    // triplet steps on erased minibatches, order reshuffled per epoch
    std::vector<int> order = split.erased;
    batch_rng.shuffle(order);
    double epoch_triplet = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += cfg.batch_size) {
      std::size_t end = std::min(order.size(),
                                 start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<int> batch(order.begin() + start, order.begin() + end);
      ParamVector grad;
      double value = triplet_loss(spec, report.theta_u, data, batch,
                                  split.original_reps, cfg.distance, margins,
                                  targets, &grad);
      report.theta_u = sgd_step(report.theta_u, grad, cfg.lr);
      epoch_triplet += value;
    }

    report.triplet_trace.push_back(epoch_triplet);
    report.path_trace.push_back(path_loss_value);
    report.margin_trace.push_back(margin_sum / split.erased.size());
  }

  report.rt_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return report;
}

}  // namespace manif

#endif
