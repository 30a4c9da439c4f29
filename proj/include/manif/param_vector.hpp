#ifndef MANIF_PARAM_VECTOR_HPP
#define MANIF_PARAM_VECTOR_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "manif/errors.hpp"

namespace manif {

// Flat parameter vector; the single currency between all optimizers.
using ParamVector = std::vector<double>;
// Generic dense vector (inputs, representations, logits).
using Vec = std::vector<double>;

inline void check_same_length(const Vec& a, const Vec& b, const char* what) {
  if (a.size() != b.size())
    throw DimensionError(std::string(what) + ": length mismatch (" +
                         std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + ")");
}

inline bool all_finite(const Vec& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

inline double dot(const Vec& a, const Vec& b) {
  check_same_length(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double l2_norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline Vec sub(const Vec& a, const Vec& b) {
  check_same_length(a, b, "sub");
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vec add(const Vec& a, const Vec& b) {
  check_same_length(a, b, "add");
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline Vec scale(const Vec& a, double s) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = s * a[i];
  return r;
}

// y += s * x
inline void axpy(Vec& y, double s, const Vec& x) {
  check_same_length(y, x, "axpy");
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += s * x[i];
}

// One SGD step: params - lr * grad. Lengths must match.
inline ParamVector sgd_step(const ParamVector& params, const ParamVector& grad,
                            double lr) {
  check_same_length(params, grad, "sgd_step");
  ParamVector out(params.size());
  for (std::size_t i = 0; i < params.size(); ++i)
    out[i] = params[i] - lr * grad[i];
  return out;
}

}  // namespace manif

#endif
