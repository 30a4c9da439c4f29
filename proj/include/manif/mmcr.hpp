#ifndef MANIF_MMCR_HPP
#define MANIF_MMCR_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "manif/errors.hpp"
#include "manif/param_vector.hpp"

namespace manif {

// Column-major matrix of group centroids: `rows` is the representation
// dimension, one column per group.
struct CentroidMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;  // column-major, a[j * rows + i]

  double& at(int i, int j) { return a[static_cast<std::size_t>(j) * rows + i]; }
  double at(int i, int j) const { return a[static_cast<std::size_t>(j) * rows + i]; }

  void validate() const {
    if (rows < 1 || cols < 1) throw DimensionError("centroid matrix: empty");
    if (a.size() != static_cast<std::size_t>(rows) * cols)
      throw DimensionError("centroid matrix: storage size mismatch");
  }
};

namespace detail {

struct JacobiFactors {
  std::vector<double> w;      // rows x cols column-major: A * V, orthogonal columns
  std::vector<double> v;      // cols x cols column-major accumulated rotations
  std::vector<double> sigma;  // per-column norms of w, unsorted
  int rows = 0, cols = 0;
};

// One-sided Jacobi orthogonalization of the columns of A. Sweeps rotate
// column pairs until every off-diagonal dot product is at most `tol` in
// absolute value; throws after `max_sweeps` full sweeps without converging.
inline JacobiFactors one_sided_jacobi(const CentroidMatrix& m,
                                      double tol = 1e-10,
                                      int max_sweeps = 200) {
  m.validate();
  JacobiFactors f;
  f.rows = m.rows;
  f.cols = m.cols;
  f.w = m.a;
  f.v.assign(static_cast<std::size_t>(m.cols) * m.cols, 0.0);
  for (int j = 0; j < m.cols; ++j)
    f.v[static_cast<std::size_t>(j) * m.cols + j] = 1.0;

  auto wcol = [&](int j) { return &f.w[static_cast<std::size_t>(j) * m.rows]; };
  auto vcol = [&](int j) { return &f.v[static_cast<std::size_t>(j) * m.cols]; };

  bool converged = (m.cols == 1);
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    converged = true;
    for (int p = 0; p < m.cols - 1; ++p) {
      for (int q = p + 1; q < m.cols; ++q) {
        double *wp = wcol(p), *wq = wcol(q);
        double app = 0.0, aqq = 0.0, apq = 0.0;
        for (int i = 0; i < m.rows; ++i) {
          app += wp[i] * wp[i];
          aqq += wq[i] * wq[i];
          apq += wp[i] * wq[i];
        }
        if (std::abs(apq) <= tol) continue;
        converged = false;
        double tau = (aqq - app) / (2.0 * apq);
        double t = (tau >= 0.0 ? 1.0 : -1.0) /
                   (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        double cs = 1.0 / std::sqrt(1.0 + t * t);
        double sn = cs * t;
        for (int i = 0; i < m.rows; ++i) {
          double xp = wp[i], xq = wq[i];
          wp[i] = cs * xp - sn * xq;
          wq[i] = sn * xp + cs * xq;
        }
        double *vp = vcol(p), *vq = vcol(q);
        for (int i = 0; i < m.cols; ++i) {
          double xp = vp[i], xq = vq[i];
          vp[i] = cs * xp - sn * xq;
          vq[i] = sn * xp + cs * xq;
        }
      }
    }
  }
  if (!converged)
    throw ConvergenceError("one-sided Jacobi failed to converge within sweep budget");

  f.sigma.resize(m.cols);
  for (int j = 0; j < m.cols; ++j) {
    double s = 0.0;
    const double* wj = wcol(j);
    for (int i = 0; i < m.rows; ++i) s += wj[i] * wj[i];
    f.sigma[j] = std::sqrt(s);
  }
  return f;
}

}  // namespace detail

// Singular values by one-sided Jacobi, sorted nonincreasing; exactly
// min(rows, cols) of them.
inline std::vector<double> singular_values(const CentroidMatrix& m) {
  detail::JacobiFactors f = detail::one_sided_jacobi(m);
  std::sort(f.sigma.begin(), f.sigma.end(), std::greater<double>());
  f.sigma.resize(std::min(m.rows, m.cols));
  return f.sigma;
}

// Nuclear-norm capacity regularizer over class groups of representations.
// Columns of the centroid matrix are the L2-normalized group means; the
// additive loss term is -lambda * sum(singular values), so minimizing it
// maximizes the spread of centroid directions. `grad_out`, when given, is
// filled with d(loss)/d(representation) per group member, using the
// subgradient U V^T of the nuclear norm chained through the normalization
// and the mean; columns with vanishing singular value contribute zero.
inline double mmcr_regularizer(const std::vector<std::vector<Vec>>& groups,
                               double lambda,
                               std::vector<std::vector<Vec>>* grad_out = nullptr) {
  if (groups.empty()) throw DimensionError("mmcr: no groups");
  std::size_t dim = 0;
  for (const auto& g : groups) {
    if (g.empty()) throw DimensionError("mmcr: empty group");
    for (const auto& r : g) {
      if (dim == 0) dim = r.size();
      if (r.size() != dim || dim == 0)
        throw DimensionError("mmcr: ragged representation dimensions");
    }
  }
  if (grad_out) {
    grad_out->assign(groups.size(), {});
    for (std::size_t g = 0; g < groups.size(); ++g)
      (*grad_out)[g].assign(groups[g].size(), Vec(dim, 0.0));
  }
  if (lambda == 0.0) return 0.0;  // regularizer disabled: no SVD work

  int P = static_cast<int>(groups.size());
  int D = static_cast<int>(dim);
  std::vector<Vec> centroids(P, Vec(dim, 0.0));
  std::vector<double> centroid_norms(P);
  CentroidMatrix m;
  m.rows = D;
  m.cols = P;
  m.a.assign(static_cast<std::size_t>(D) * P, 0.0);
  for (int g = 0; g < P; ++g) {
    const auto& members = groups[g];
    for (const auto& r : members) axpy(centroids[g], 1.0, r);
    for (double& x : centroids[g]) x /= static_cast<double>(members.size());
    double n = l2_norm(centroids[g]);
    if (n == 0.0)
      throw NumericError("mmcr: degenerate zero centroid under normalization");
    centroid_norms[g] = n;
    for (int i = 0; i < D; ++i) m.at(i, g) = centroids[g][i] / n;
  }

  detail::JacobiFactors f = detail::one_sided_jacobi(m);
  double nuclear = 0.0;
  for (double s : f.sigma) nuclear += s;
  double loss = -lambda * nuclear;

  if (grad_out) {
    // G = U V^T restricted to columns with sigma above threshold.
    std::vector<double> G(static_cast<std::size_t>(D) * P, 0.0);
    for (int j = 0; j < P; ++j) {
      if (f.sigma[j] <= 1e-12) continue;
      const double* wj = &f.w[static_cast<std::size_t>(j) * D];
      const double* vj = &f.v[static_cast<std::size_t>(j) * P];
      for (int c = 0; c < P; ++c)
        for (int i = 0; i < D; ++i)
          G[static_cast<std::size_t>(c) * D + i] += (wj[i] / f.sigma[j]) * vj[c];
    }
    for (int g = 0; g < P; ++g) {
      // chain through normalization: (I - cc^T)/|c| applied to G column g
      const double* gcol = &G[static_cast<std::size_t>(g) * D];
      Vec chat(D);
      for (int i = 0; i < D; ++i) chat[i] = m.at(i, g);
      double cg = 0.0;
      for (int i = 0; i < D; ++i) cg += chat[i] * gcol[i];
      double inv_n = 1.0 / centroid_norms[g];
      double inv_members = 1.0 / static_cast<double>(groups[g].size());
      Vec per_member(D);
      for (int i = 0; i < D; ++i)
        per_member[i] = -lambda * inv_members * inv_n * (gcol[i] - chat[i] * cg);
      for (auto& gm : (*grad_out)[g]) gm = per_member;
    }
  }
  return loss;
}

}  // namespace manif

#endif
