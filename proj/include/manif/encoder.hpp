#ifndef MANIF_ENCODER_HPP
#define MANIF_ENCODER_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "manif/errors.hpp"
#include "manif/param_vector.hpp"
#include "manif/rng.hpp"

namespace manif {

enum class Activation { identity, relu, tanh };

inline const char* to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
  }
  return "identity";
}

inline Activation activation_from_string(const std::string& s) {
  if (s == "identity") return Activation::identity;
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  throw ConfigError("unknown activation: " + s);
}

inline double apply_activation(Activation a, double z) {
  switch (a) {
    case Activation::identity: return z;
    case Activation::relu: return z > 0.0 ? z : 0.0;
    case Activation::tanh: return std::tanh(z);
  }
  return z;
}

// Derivative expressed through pre-activation z and post-activation y.
// relu takes subgradient 0 at its kink.
inline double activation_derivative(Activation a, double z, double y) {
  switch (a) {
    case Activation::identity: return 1.0;
    case Activation::relu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::tanh: return 1.0 - y * y;
  }
  return 1.0;
}

// Dense feedforward encoder. `layers` runs input dim -> hidden dims ->
// representation dim; with `head` set, the final entry is a class-head
// dimension stacked on top of the representation layer.
//
// Parameter layout is layer-major with weights before biases:
//   [W0 (row-major, out x in), b0, W1, b1, ...]
struct EncoderSpec {
  std::vector<int> layers;
  std::vector<Activation> activations;  // one per transition
  bool head = false;

  int transitions() const { return static_cast<int>(layers.size()) - 1; }
  int input_dim() const { return layers.front(); }
  int output_dim() const { return layers.back(); }
  // Index of the layer output that serves as the representation
  // (0 = the raw input, valid for a bare linear head).
  int representation_layer() const { return transitions() - (head ? 1 : 0); }
  int representation_dim() const { return layers[representation_layer()]; }

  void validate() const {
    if (layers.size() < 2)
      throw ConfigError("encoder needs at least an input and an output layer");
    for (int n : layers)
      if (n < 1) throw ConfigError("layer sizes must be positive");
    if (activations.size() != static_cast<std::size_t>(transitions()))
      throw ConfigError("need exactly one activation per layer transition");
    if (head && layers.size() < 2)
      throw ConfigError("class head requires an underlying layer");
  }
};

inline std::size_t param_count(const EncoderSpec& spec) {
  spec.validate();
  std::size_t n = 0;
  for (int l = 0; l < spec.transitions(); ++l)
    n += static_cast<std::size_t>(spec.layers[l]) * spec.layers[l + 1] +
         spec.layers[l + 1];
  return n;
}

// Offset of W_l within the flat parameter vector; b_l follows the weights.
inline std::size_t weight_offset(const EncoderSpec& spec, int l) {
  std::size_t off = 0;
  for (int i = 0; i < l; ++i)
    off += static_cast<std::size_t>(spec.layers[i]) * spec.layers[i + 1] +
           spec.layers[i + 1];
  return off;
}

struct LayerWeights {
  std::vector<double> weights;  // row-major, out x in
  std::vector<double> biases;   // out
};

inline std::vector<LayerWeights> unflatten(const EncoderSpec& spec,
                                           const ParamVector& params) {
  if (params.size() != param_count(spec))
    throw DimensionError("unflatten: parameter count mismatch");
  std::vector<LayerWeights> out(spec.transitions());
  std::size_t off = 0;
  for (int l = 0; l < spec.transitions(); ++l) {
    std::size_t nw = static_cast<std::size_t>(spec.layers[l]) * spec.layers[l + 1];
    std::size_t nb = spec.layers[l + 1];
    out[l].weights.assign(params.begin() + off, params.begin() + off + nw);
    out[l].biases.assign(params.begin() + off + nw, params.begin() + off + nw + nb);
    off += nw + nb;
  }
  return out;
}

inline ParamVector flatten(const EncoderSpec& spec,
                           const std::vector<LayerWeights>& lw) {
  if (lw.size() != static_cast<std::size_t>(spec.transitions()))
    throw DimensionError("flatten: layer count mismatch");
  ParamVector out;
  out.reserve(param_count(spec));
  for (int l = 0; l < spec.transitions(); ++l) {
    std::size_t nw = static_cast<std::size_t>(spec.layers[l]) * spec.layers[l + 1];
    std::size_t nb = spec.layers[l + 1];
    if (lw[l].weights.size() != nw || lw[l].biases.size() != nb)
      throw DimensionError("flatten: layer " + std::to_string(l) + " shape mismatch");
    out.insert(out.end(), lw[l].weights.begin(), lw[l].weights.end());
    out.insert(out.end(), lw[l].biases.begin(), lw[l].biases.end());
  }
  return out;
}

// Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)] per transition;
// biases share their layer's bound.
inline ParamVector init_params(const EncoderSpec& spec, Rng& rng) {
  spec.validate();
  ParamVector p(param_count(spec));
  std::size_t off = 0;
  for (int l = 0; l < spec.transitions(); ++l) {
    double bound = 1.0 / std::sqrt(static_cast<double>(spec.layers[l]));
    std::size_t n = static_cast<std::size_t>(spec.layers[l]) * spec.layers[l + 1] +
                    spec.layers[l + 1];
    for (std::size_t i = 0; i < n; ++i) p[off + i] = rng.uniform(-bound, bound);
    off += n;
  }
  return p;
}

struct ForwardResult {
  Vec representation;
  Vec logits;  // empty for encoder-only specs
};

// Per-layer pre/post activations kept for reverse mode.
// post[0] is the input; post[l+1] = act(pre[l]).
struct ForwardCache {
  std::vector<Vec> pre;
  std::vector<Vec> post;
};

inline void forward_cached(const EncoderSpec& spec, const ParamVector& params,
                           const Vec& x, ForwardCache& cache) {
  if (params.size() != param_count(spec))
    throw DimensionError("forward: parameter count mismatch");
  if (x.size() != static_cast<std::size_t>(spec.input_dim()))
    throw DimensionError("forward: input dimension mismatch");
  int T = spec.transitions();
  cache.pre.assign(T, {});
  cache.post.assign(T + 1, {});
  cache.post[0] = x;
  std::size_t off = 0;
  for (int l = 0; l < T; ++l) {
    int in = spec.layers[l], out = spec.layers[l + 1];
    const Vec& a = cache.post[l];
    Vec& z = cache.pre[l];
    Vec& y = cache.post[l + 1];
    z.assign(out, 0.0);
    y.assign(out, 0.0);
    for (int r = 0; r < out; ++r) {
      double s = params[off + static_cast<std::size_t>(in) * out + r];  // bias
      const double* wrow = &params[off + static_cast<std::size_t>(r) * in];
      for (int c = 0; c < in; ++c) s += wrow[c] * a[c];
      z[r] = s;
      y[r] = apply_activation(spec.activations[l], s);
      if (!std::isfinite(y[r]))
        throw NumericError("non-finite activation at layer " + std::to_string(l + 1));
    }
    off += static_cast<std::size_t>(in) * out + out;
  }
}

inline ForwardResult forward(const EncoderSpec& spec, const ParamVector& params,
                             const Vec& x) {
  ForwardCache cache;
  forward_cached(spec, params, x, cache);
  ForwardResult r;
  r.representation = cache.post[spec.representation_layer()];
  if (spec.head) r.logits = cache.post[spec.transitions()];
  return r;
}

// Reverse pass: accumulates d(loss)/d(params) into `grad` given cotangents
// of the representation and (when a head exists) the logits. Either
// cotangent may be empty, meaning zero.
inline void backward(const EncoderSpec& spec, const ParamVector& params,
                     const ForwardCache& cache, const Vec& d_rep,
                     const Vec& d_logits, ParamVector& grad) {
  int T = spec.transitions();
  int rep_layer = spec.representation_layer();
  if (grad.size() != params.size())
    throw DimensionError("backward: gradient buffer size mismatch");
  if (!d_rep.empty() &&
      d_rep.size() != static_cast<std::size_t>(spec.layers[rep_layer]))
    throw DimensionError("backward: representation cotangent size mismatch");
  if (!d_logits.empty() &&
      (!spec.head || d_logits.size() != static_cast<std::size_t>(spec.layers[T])))
    throw DimensionError("backward: logits cotangent size mismatch");

  // g[l] = d(loss)/d(post[l]) for the layer being processed.
  std::vector<Vec> g(T + 1);
  if (spec.head && !d_logits.empty()) g[T] = d_logits;
  if (!d_rep.empty()) {
    if (g[rep_layer].empty()) g[rep_layer] = d_rep;
    else axpy(g[rep_layer], 1.0, d_rep);
  }

  for (int l = T - 1; l >= 0; --l) {
    if (g[l + 1].empty()) continue;  // nothing flows through this layer
    int in = spec.layers[l], out = spec.layers[l + 1];
    std::size_t off = weight_offset(spec, l);
    const Vec& a = cache.post[l];
    Vec dz(out);
    for (int r = 0; r < out; ++r)
      dz[r] = g[l + 1][r] * activation_derivative(spec.activations[l],
                                                  cache.pre[l][r],
                                                  cache.post[l + 1][r]);
    for (int r = 0; r < out; ++r) {
      double* wg = &grad[off + static_cast<std::size_t>(r) * in];
      for (int c = 0; c < in; ++c) wg[c] += dz[r] * a[c];
    }
    for (int r = 0; r < out; ++r)
      grad[off + static_cast<std::size_t>(in) * out + r] += dz[r];
    if (l > 0) {
      if (g[l].empty()) g[l].assign(in, 0.0);
      for (int r = 0; r < out; ++r) {
        const double* wrow = &params[off + static_cast<std::size_t>(r) * in];
        double d = dz[r];
        for (int c = 0; c < in; ++c) g[l][c] += d * wrow[c];
      }
    }
  }
}

// Exact reverse-mode gradient of an arbitrary batch functional of the
// network outputs. The functional sees every sample's outputs at once and
// fills per-sample cotangents (it may leave entries empty for zero), so
// batch-coupled objectives work as well as per-sample sums.
//
// LossFn: double(const std::vector<ForwardResult>& outs,
//                std::vector<Vec>& d_rep, std::vector<Vec>& d_logits)
template <class LossFn>
std::pair<double, ParamVector> loss_gradient(const EncoderSpec& spec,
                                             const ParamVector& params,
                                             std::span<const Vec> inputs,
                                             LossFn&& loss) {
  std::size_t n = inputs.size();
  std::vector<ForwardCache> caches(n);
  std::vector<ForwardResult> outs(n);
  for (std::size_t i = 0; i < n; ++i) {
    forward_cached(spec, params, inputs[i], caches[i]);
    outs[i].representation = caches[i].post[spec.representation_layer()];
    if (spec.head) outs[i].logits = caches[i].post[spec.transitions()];
  }
  std::vector<Vec> d_rep(n), d_logits(n);
  double value = loss(outs, d_rep, d_logits);
  if (!std::isfinite(value)) throw NumericError("loss value is not finite");
  ParamVector grad(params.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i)
    backward(spec, params, caches[i], d_rep[i], d_logits[i], grad);
  return {value, grad};
}

}  // namespace manif

#endif
