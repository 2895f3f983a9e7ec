// Copyright 2026 The elliptic Authors.
// SPDX-License-Identifier: Apache-2.0

// Independent reference computations used by the tests. Nothing here calls
// into the library's numerical kernels.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace elliptic::testing {

using Cx = std::complex<double>;

/// Singular values of a (possibly complex) matrix by one-sided Jacobi, descending.
template <typename M>
std::vector<double> jacobi_singular_values(const M& a) {
  Eigen::JacobiSVD<M> svd(a);
  const auto& s = svd.singularValues();
  std::vector<double> out(s.data(), s.data() + s.size());
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

/// Stieltjes transform of the semicircle law on [-2, 2], upper branch.
inline Cx semicircle_transform(Cx alpha) {
  // Root of s^2 + alpha s + 1 = 0 with Im s > 0 when Im alpha > 0.
  const Cx root = std::sqrt(alpha * alpha - 4.0);
  Cx s = (-alpha + root) / 2.0;
  if (s.imag() <= 0.0) s = (-alpha - root) / 2.0;
  return s;
}

inline double semicircle_density(double x) {
  return std::abs(x) < 2.0 ? std::sqrt(4.0 - x * x) / (2.0 * std::numbers::pi) : 0.0;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Potential of the uniform law on the ellipse with semi-axes 1+rho, 1-rho,
/// inside the ellipse: 1/2 - x^2/(2(1+rho)) - y^2/(2(1-rho)).
inline double ellipse_interior_potential(double rho, Cx z) {
  return 0.5 - z.real() * z.real() / (2.0 * (1.0 + rho)) -
         z.imag() * z.imag() / (2.0 * (1.0 - rho));
}

/// Disk potential: 1/2 - |z|^2/2 inside, -log|z| outside.
inline double disk_potential(Cx z) {
  const double r = std::abs(z);
  return r <= 1.0 ? 0.5 - 0.5 * r * r : -std::log(r);
}

/// min over supports S with |S| = k of the norm of x outside S, by enumeration.
inline double brute_force_sparse_distance(const std::vector<double>& x, int k) {
  const int n = static_cast<int>(x.size());
  if (k >= n) return 0.0;
  std::vector<bool> pick(static_cast<std::size_t>(n), false);
  std::fill(pick.begin(), pick.begin() + k, true);
  double best = INFINITY;
  do {
    double rest = 0.0;
    for (int i = 0; i < n; ++i) {
      if (!pick[static_cast<std::size_t>(i)]) rest += x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
    }
    best = std::min(best, rest);
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return std::sqrt(best);
}

/// Distance from row i to the span of the other rows, as a least-squares
/// residual through a complete orthogonal decomposition.
inline double projection_distance(const Eigen::MatrixXd& a, Eigen::Index i) {
  const Eigen::Index m = a.rows();
  const Eigen::VectorXd r = a.row(i).transpose();
  if (m == 1) return r.norm();
  Eigen::MatrixXd b(a.cols(), m - 1);
  for (Eigen::Index k = 0, c = 0; k < m; ++k) {
    if (k != i) b.col(c++) = a.row(k).transpose();
  }
  const Eigen::VectorXd coef = b.completeOrthogonalDecomposition().solve(r);
  return (r - b * coef).norm();
}

inline Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, unsigned seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> d;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = d(g);
  return m;
}

}  // namespace elliptic::testing
