#ifndef MANIF_TESTS_HELPERS_HPP
#define MANIF_TESTS_HELPERS_HPP

#include <cmath>
#include <functional>
#include <vector>

#include "manif/encoder.hpp"
#include "manif/param_vector.hpp"

namespace testutil {

// Central finite differences, the independent oracle for every analytic
// gradient in the suite.
inline manif::ParamVector central_fd(
    const std::function<double(const manif::ParamVector&)>& f,
    manif::ParamVector p, double step = 1e-5) {
  manif::ParamVector g(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    double keep = p[i];
    p[i] = keep + step;
    double hi = f(p);
    p[i] = keep - step;
    double lo = f(p);
    p[i] = keep;
    g[i] = (hi - lo) / (2.0 * step);
  }
  return g;
}

inline double rel_l2_error(const manif::ParamVector& got,
                           const manif::ParamVector& want) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    double d = got[i] - want[i];
    num += d * d;
    den += want[i] * want[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-10);
}

}  // namespace testutil

#endif
