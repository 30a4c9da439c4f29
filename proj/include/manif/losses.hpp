#ifndef MANIF_LOSSES_HPP
#define MANIF_LOSSES_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "manif/dataset.hpp"
#include "manif/distance.hpp"
#include "manif/encoder.hpp"
#include "manif/errors.hpp"
#include "manif/split.hpp"

namespace manif {

enum class LossKind { cross_entropy, representation_mse };

inline const char* to_string(LossKind k) {
  return k == LossKind::cross_entropy ? "cross_entropy" : "representation_mse";
}

inline LossKind loss_kind_from_string(const std::string& s) {
  if (s == "cross_entropy") return LossKind::cross_entropy;
  if (s == "representation_mse") return LossKind::representation_mse;
  throw ConfigError("unknown loss kind: " + s);
}

// Stable softmax cross-entropy on logits. When `dlogits` is non-null it
// receives scale * (softmax - onehot).
inline double cross_entropy_loss(const Vec& logits, int label, Vec* dlogits,
                                 double scale = 1.0) {
  if (label < 0 || static_cast<std::size_t>(label) >= logits.size())
    throw DimensionError("cross_entropy: label out of range");
  double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - mx);
  double log_sum = mx + std::log(sum);
  double loss = log_sum - logits[label];
  if (dlogits) {
    dlogits->resize(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i)
      (*dlogits)[i] = scale * (std::exp(logits[i] - log_sum) -
                               (static_cast<int>(i) == label ? 1.0 : 0.0));
  }
  return loss;
}

// Mean-over-dimensions squared error. `dout`, when non-null, receives
// scale * 2 (out - target) / dim.
inline double mse_loss(const Vec& out, const Vec& target, Vec* dout,
                       double scale = 1.0) {
  check_same_length(out, target, "mse_loss");
  double s = 0.0;
  double inv_dim = 1.0 / static_cast<double>(out.size());
  if (dout) dout->resize(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double d = out[i] - target[i];
    s += d * d;
    if (dout) (*dout)[i] = scale * 2.0 * d * inv_dim;
  }
  return s * inv_dim;
}

// The network output a training loss applies to: logits when a head
// exists, otherwise the representation itself.
inline const Vec& final_output(const ForwardResult& r) {
  return r.logits.empty() ? r.representation : r.logits;
}

// Per-sample training loss under the model's own objective; this is what
// the membership attack thresholds on. representation_mse reconstructs the
// input, so it requires output dim == input dim.
inline double sample_training_loss(const EncoderSpec& spec,
                                   const ParamVector& params, const Vec& x,
                                   int label, LossKind kind) {
  ForwardResult r = forward(spec, params, x);
  if (kind == LossKind::cross_entropy) {
    if (!spec.head) throw ConfigError("cross_entropy requires a class head");
    return cross_entropy_loss(r.logits, label, nullptr);
  }
  const Vec& out = final_output(r);
  if (out.size() != x.size())
    throw ConfigError("representation_mse requires output dim == input dim");
  return mse_loss(out, x, nullptr);
}

// Mean representation of a set of inputs under the given parameters.
inline Vec centroid(const EncoderSpec& spec, const ParamVector& params,
                    std::span<const Vec> inputs) {
  if (inputs.empty()) throw DimensionError("centroid: empty input set");
  Vec c(spec.representation_dim(), 0.0);
  for (const Vec& x : inputs)
    axpy(c, 1.0, forward(spec, params, x).representation);
  for (double& v : c) v /= static_cast<double>(inputs.size());
  return c;
}

inline Vec centroid_of_indices(const EncoderSpec& spec,
                               const ParamVector& params, const Dataset& data,
                               const std::vector<int>& indices) {
  if (indices.empty()) throw DimensionError("centroid: empty index set");
  Vec c(spec.representation_dim(), 0.0);
  for (int i : indices)
    axpy(c, 1.0, forward(spec, params, data.inputs[i]).representation);
  for (double& v : c) v /= static_cast<double>(indices.size());
  return c;
}

// Hinge margin between an erased sample's representation under
// theta_tilde and (its cached original representation, its neighbor
// centroid under theta_tilde): [dist(f, z_o) - dist(f, c)]_+ .
inline double adaptive_margin(const EncoderSpec& spec,
                              const ParamVector& theta_tilde, const Vec& x,
                              const Vec& z_o, const Vec& c_tilde, Metric m) {
  Vec f = forward(spec, theta_tilde, x).representation;
  double v = dist(f, z_o, m) - dist(f, c_tilde, m);
  return v > 0.0 ? v : 0.0;
}

// Push-pull diagnostics: the two squared-Euclidean objectives the triplet
// form combines. push drives representations away from their cached
// originals, pull draws them toward their neighbor centroid under the
// same parameters. Diagnostic only; the optimizer uses the triplet form.
struct PushPull {
  double push = 0.0;
  double pull = 0.0;
};

inline PushPull push_pull_objectives(const EncoderSpec& spec,
                                     const ParamVector& params,
                                     const Dataset& data,
                                     const UnlearnSplit& split) {
  PushPull r;
  for (int e : split.erased) {
    Vec f = forward(spec, params, data.inputs[e]).representation;
    const Vec& z = split.original_reps.at(e);
    Vec c = centroid_of_indices(spec, params, data, split.neighbor_sets.at(e));
    r.push += dist(f, z, Metric::squared_euclidean);
    r.pull += dist(f, c, Metric::squared_euclidean);
  }
  return r;
}

// Plain hinge on precomputed scalars: [d_c - d_z + margin]_+ .
inline double triplet_term(double d_c, double d_z, double margin) {
  double v = d_c - d_z + margin;
  return v > 0.0 ? v : 0.0;
}

// Sum of per-sample hinge triplet terms over a set of erased samples,
// with per-sample pull targets and margins held fixed:
//   sum_i [ dist(f(x_i), target_i) - dist(f(x_i), z_i,o) + margin_i ]_+ .
// Every listed sample must have a margin, a target, and a cached original
// representation. When `grad` is non-null it receives the exact gradient
// with respect to `params` (hinge subgradient 0 at the kink).
inline double triplet_loss(const EncoderSpec& spec, const ParamVector& params,
                           const Dataset& data,
                           const std::vector<int>& samples,
                           const std::map<int, Vec>& original_reps,
                           Metric metric,
                           const std::map<int, double>& margins,
                           const std::map<int, Vec>& targets,
                           ParamVector* grad = nullptr) {
  for (int i : samples) {
    if (!margins.count(i) || !targets.count(i) || !original_reps.count(i))
      throw ConfigError("triplet_loss: sample " + std::to_string(i) +
                        " missing margin, target, or original representation");
  }
  std::vector<Vec> inputs;
  inputs.reserve(samples.size());
  for (int i : samples) inputs.push_back(data.inputs[i]);

  auto objective = [&](const std::vector<ForwardResult>& outs,
                       std::vector<Vec>& d_rep, std::vector<Vec>& d_logits) {
    (void)d_logits;
    double total = 0.0;
    for (std::size_t s = 0; s < outs.size(); ++s) {
      int i = samples[s];
      const Vec& f = outs[s].representation;
      const Vec& target = targets.at(i);
      const Vec& z = original_reps.at(i);
      double d_c = dist(f, target, metric);
      double d_z = dist(f, z, metric);
      double inside = d_c - d_z + margins.at(i);
      if (inside > 0.0) {
        total += inside;
        if (grad) {
          Vec g = dist_grad(f, target, metric);
          axpy(g, -1.0, dist_grad(f, z, metric));
          d_rep[s] = std::move(g);
        }
      }
    }
    return total;
  };

  if (grad) {
    auto [value, g] = loss_gradient(spec, params, inputs, objective);
    *grad = std::move(g);
    return value;
  }
  double total = 0.0;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    int i = samples[s];
    Vec f = forward(spec, params, inputs[s]).representation;
    total += triplet_term(dist(f, targets.at(i), metric),
                          dist(f, original_reps.at(i), metric), margins.at(i));
  }
  return total;
}

}  // namespace manif

#endif
