#ifndef MANIF_BEZIER_HPP
#define MANIF_BEZIER_HPP

#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "manif/dataset.hpp"
#include "manif/encoder.hpp"
#include "manif/errors.hpp"
#include "manif/losses.hpp"
#include "manif/param_vector.hpp"
#include "manif/rng.hpp"

namespace manif {

// Quadratic Bezier curve in parameter space between the unlearned and the
// original endpoints, with a trainable control point w:
//   phi_w(t) = (1-t)^2 theta_u + 2 t (1-t) w + t^2 theta_o .
struct BezierPath {
  ParamVector theta_u;
  ParamVector w;
  ParamVector theta_o;

  void validate() const {
    check_same_length(theta_u, w, "bezier path");
    check_same_length(theta_u, theta_o, "bezier path");
    if (theta_u.empty()) throw DimensionError("bezier path: empty parameters");
  }
};

// Point on the curve. Endpoints are returned as exact copies so t = 0 and
// t = 1 are bit-identical to theta_u and theta_o.
inline ParamVector bezier_point(const BezierPath& path, double t) {
  path.validate();
  if (!(t >= 0.0 && t <= 1.0))
    throw ConfigError("bezier_point: t outside [0, 1]");
  if (t == 0.0) return path.theta_u;
  if (t == 1.0) return path.theta_o;
  double a = (1.0 - t) * (1.0 - t);
  double b = 2.0 * t * (1.0 - t);
  double c = t * t;
  ParamVector p(path.theta_u.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    p[i] = a * path.theta_u[i] + b * path.w[i] + c * path.theta_o[i];
  return p;
}

// SGD on the control point against an arbitrary objective of the curve
// point: each step samples t ~ U[0,1], evaluates the objective at
// phi_w(t), and updates w by the chain rule d phi_w / d w = 2 t (1-t).
// Endpoints are never modified. `mean_loss`, when given, receives the mean
// objective value across steps (0 for zero steps).
//
// LossFn: std::pair<double, ParamVector>(const ParamVector& theta_t)
template <class LossFn>
BezierPath optimize_control_point(BezierPath path, LossFn&& objective,
                                  int steps, double lr, Rng& rng,
                                  double* mean_loss = nullptr) {
  path.validate();
  if (steps < 0) throw ConfigError("optimize_control_point: negative steps");
  double total = 0.0;
  for (int s = 0; s < steps; ++s) {
    double t = rng.uniform();
    ParamVector theta_t = bezier_point(path, t);
    auto [value, grad] = objective(theta_t);
    if (!std::isfinite(value))
      throw NumericError("optimize_control_point: non-finite objective");
    total += value;
    double coeff = 2.0 * t * (1.0 - t);
    for (std::size_t i = 0; i < path.w.size(); ++i)
      path.w[i] -= lr * coeff * grad[i];
  }
  if (mean_loss) *mean_loss = steps > 0 ? total / steps : 0.0;
  return path;
}

enum class PathLoss { representation_distill, cross_entropy };

inline const char* to_string(PathLoss p) {
  return p == PathLoss::representation_distill ? "representation_distill"
                                               : "cross_entropy";
}

inline PathLoss path_loss_from_string(const std::string& s) {
  if (s == "representation_distill") return PathLoss::representation_distill;
  if (s == "cross_entropy") return PathLoss::cross_entropy;
  throw ConfigError("unknown path loss: " + s);
}

// Trains the control point on retained-sample minibatches. The default
// retained objective is label-free: mean squared error between the curve
// point's representations and the cached original representations
// (`distill_targets`). The labeled alternative is softmax cross-entropy
// through the head. Minibatch order is a seeded shuffle of `retained_idx`,
// cycled if `steps` exceeds one pass.
inline BezierPath train_control_point(const EncoderSpec& spec, BezierPath path,
                                      const Dataset& data,
                                      const std::vector<int>& retained_idx,
                                      const std::map<int, Vec>& distill_targets,
                                      PathLoss kind, int steps, int batch_size,
                                      double lr, Rng& rng,
                                      double* mean_loss = nullptr) {
  if (retained_idx.empty())
    throw ConfigError("train_control_point: empty retained set");
  if (batch_size < 1) throw ConfigError("train_control_point: batch_size < 1");
  if (kind == PathLoss::cross_entropy && !spec.head)
    throw ConfigError("train_control_point: cross_entropy needs a class head");
  if (kind == PathLoss::representation_distill)
    for (int i : retained_idx)
      if (!distill_targets.count(i))
        throw ConfigError("train_control_point: missing distill target");

  std::vector<int> order = retained_idx;
  rng.shuffle(order);
  std::size_t cursor = 0;
  auto next_batch = [&]() {
    std::vector<int> batch;
    for (int b = 0; b < batch_size; ++b) {
      batch.push_back(order[cursor]);
      cursor = (cursor + 1) % order.size();
    }
    return batch;
  };

  auto objective = [&](const ParamVector& theta_t) {
    std::vector<int> batch = next_batch();
    std::vector<Vec> inputs;
    inputs.reserve(batch.size());
    for (int i : batch) inputs.push_back(data.inputs[i]);
    double inv_b = 1.0 / static_cast<double>(batch.size());
    return loss_gradient(
        spec, theta_t, inputs,
        [&](const std::vector<ForwardResult>& outs, std::vector<Vec>& d_rep,
            std::vector<Vec>& d_logits) {
          double total = 0.0;
          for (std::size_t s = 0; s < outs.size(); ++s) {
            if (kind == PathLoss::representation_distill) {
              total += inv_b * mse_loss(outs[s].representation,
                                        distill_targets.at(batch[s]),
                                        &d_rep[s], inv_b);
            } else {
              total += inv_b * cross_entropy_loss(outs[s].logits,
                                                  data.labels[batch[s]],
                                                  &d_logits[s], inv_b);
            }
          }
          return total;
        });
  };

  return optimize_control_point(std::move(path), objective, steps, lr, rng,
                                mean_loss);
}

// Upper bound on the logit drift between the curve's midpoint surrogate
// and the original model:
//   lx * ( (1-t)^2 |theta_u - theta_o| + 2 t (1-t) |w - theta_o| ).
inline double logit_drift_bound(const BezierPath& path, double t_star,
                                double lx) {
  path.validate();
  if (!(t_star >= 0.0 && t_star <= 1.0))
    throw ConfigError("logit_drift_bound: t_star outside [0, 1]");
  if (lx < 0.0) throw ConfigError("logit_drift_bound: negative lx");
  double du = l2_norm(sub(path.theta_u, path.theta_o));
  double dw = l2_norm(sub(path.w, path.theta_o));
  double omt = 1.0 - t_star;
  return lx * (omt * omt * du + 2.0 * t_star * omt * dw);
}

// Empirical estimate of the output Lipschitz constant in parameter space:
// the max over sampled weight perturbations delta (biases held fixed) and
// probe inputs of |g(theta + delta, x) - g(theta, x)|_inf / |delta|_2,
// where g is the logits when a head exists and the representation
// otherwise. A lower estimate by construction; callers inflate it.
inline double estimate_lipschitz(const EncoderSpec& spec,
                                 const ParamVector& params,
                                 std::span<const Vec> probes,
                                 double perturbation_scale, int samples,
                                 Rng& rng) {
  spec.validate();
  if (probes.empty()) throw ConfigError("estimate_lipschitz: no probe inputs");
  if (perturbation_scale <= 0.0)
    throw ConfigError("estimate_lipschitz: perturbation scale must be positive");
  if (samples < 1) throw ConfigError("estimate_lipschitz: samples < 1");

  auto g_of = [&](const ParamVector& p, const Vec& x) -> Vec {
    ForwardResult r = forward(spec, p, x);
    return spec.head ? r.logits : r.representation;
  };

  std::vector<Vec> base;
  base.reserve(probes.size());
  for (const Vec& x : probes) base.push_back(g_of(params, x));

  double best = 0.0;
  ParamVector perturbed = params;
  for (int s = 0; s < samples; ++s) {
    // unit Gaussian direction on weight entries only, scaled exactly
    ParamVector delta(params.size(), 0.0);
    double norm2 = 0.0;
    for (int l = 0; l < spec.transitions(); ++l) {
      std::size_t off = weight_offset(spec, l);
      std::size_t nw =
          static_cast<std::size_t>(spec.layers[l]) * spec.layers[l + 1];
      for (std::size_t i = 0; i < nw; ++i) {
        delta[off + i] = rng.normal();
        norm2 += delta[off + i] * delta[off + i];
      }
    }
    if (norm2 == 0.0) continue;
    double factor = perturbation_scale / std::sqrt(norm2);
    for (std::size_t i = 0; i < params.size(); ++i)
      perturbed[i] = params[i] + factor * delta[i];
    for (std::size_t p = 0; p < probes.size(); ++p) {
      Vec gp = g_of(perturbed, probes[p]);
      double drift = 0.0;
      for (std::size_t i = 0; i < gp.size(); ++i)
        drift = std::max(drift, std::abs(gp[i] - base[p][i]));
      best = std::max(best, drift / perturbation_scale);
    }
  }
  return best;
}

}  // namespace manif

#endif
