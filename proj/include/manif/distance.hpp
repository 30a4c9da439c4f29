#ifndef MANIF_DISTANCE_HPP
#define MANIF_DISTANCE_HPP

#include <cmath>
#include <string>

#include "manif/errors.hpp"
#include "manif/param_vector.hpp"

namespace manif {

enum class Metric { euclidean, squared_euclidean, cosine };

inline const char* to_string(Metric m) {
  switch (m) {
    case Metric::euclidean: return "euclidean";
    case Metric::squared_euclidean: return "squared_euclidean";
    case Metric::cosine: return "cosine";
  }
  return "euclidean";
}

inline Metric metric_from_string(const std::string& s) {
  if (s == "euclidean") return Metric::euclidean;
  if (s == "squared_euclidean") return Metric::squared_euclidean;
  if (s == "cosine") return Metric::cosine;
  throw ConfigError("unknown distance metric: " + s);
}

inline double dist(const Vec& a, const Vec& b, Metric m) {
  check_same_length(a, b, "dist");
  switch (m) {
    case Metric::euclidean: {
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
      }
      return std::sqrt(s);
    }
    case Metric::squared_euclidean: {
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
      }
      return s;
    }
    case Metric::cosine: {
      double na = l2_norm(a), nb = l2_norm(b);
      if (na == 0.0 || nb == 0.0)
        throw NumericError("cosine distance undefined for zero vector");
      return 1.0 - dot(a, b) / (na * nb);
    }
  }
  return 0.0;
}

// d dist(a, b) / d a. Euclidean takes subgradient 0 at a == b.
inline Vec dist_grad(const Vec& a, const Vec& b, Metric m) {
  check_same_length(a, b, "dist_grad");
  switch (m) {
    case Metric::euclidean: {
      Vec g = sub(a, b);
      double n = l2_norm(g);
      if (n == 0.0) return Vec(a.size(), 0.0);
      for (double& x : g) x /= n;
      return g;
    }
    case Metric::squared_euclidean: {
      Vec g = sub(a, b);
      for (double& x : g) x *= 2.0;
      return g;
    }
    case Metric::cosine: {
      double na = l2_norm(a), nb = l2_norm(b);
      if (na == 0.0 || nb == 0.0)
        throw NumericError("cosine distance undefined for zero vector");
      double ab = dot(a, b);
      Vec g(a.size());
      for (std::size_t i = 0; i < a.size(); ++i)
        g[i] = -b[i] / (na * nb) + ab * a[i] / (na * na * na * nb);
      return g;
    }
  }
  return Vec(a.size(), 0.0);
}

}  // namespace manif

#endif
