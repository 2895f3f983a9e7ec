// Copyright 2026 The elliptic Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "elliptic/detail/dense.hpp"
#include "elliptic/ensemble.hpp"
#include "elliptic/error.hpp"

namespace elliptic {

using Complex = std::complex<double>;

/// Eigenvalues of n^{-1/2} X in solver order.
struct ComplexSpectrum {
  std::vector<Complex> values;
  std::optional<EnsembleSpec> source_spec;

  Complex sum() const {
    Complex acc{0.0, 0.0};
    for (const auto& v : values) acc += v;
    return acc;
  }
};

//---------------------------------------------------------------------------//
/*!
 * Singular values s_1 >= ... >= s_n of n^{-1/2} X - z I.
 *
 * The symmetrized view is the spectrum of the Hermitization V(z), i.e. the
 * multiset {+s_i} U {-s_i}. cdf() is the distribution function of the
 * singular values; symmetrized_cdf() is that of V(z). They are tied by
 * F(x) = (1 + sgn(x) cdf(|x|)) / 2, up to the atoms at +-x.
 */
struct SingularSpectrum {
  Complex z{0.0, 0.0};
  std::vector<double> values;

  std::size_t size() const { return values.size(); }

  /// {+-s_i} sorted ascending.
  std::vector<double> symmetrized() const {
    std::vector<double> out;
    out.reserve(2 * values.size());
    for (double s : values) {
      out.push_back(s);
      out.push_back(-s);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  double cdf(double x) const {
    if (values.empty()) return 0.0;
    const auto count = std::count_if(values.begin(), values.end(),
                                     [x](double s) { return s <= x; });
    return static_cast<double>(count) / static_cast<double>(values.size());
  }

  double symmetrized_cdf(double x) const {
    if (values.empty()) return 0.0;
    std::size_t count = 0;
    for (double s : values) {
      if (s <= x) ++count;
      if (-s <= x) ++count;
    }
    return static_cast<double>(count) / (2.0 * static_cast<double>(values.size()));
  }
};

/// n^{-1/2} X.
inline Matrix normalized(const Matrix& x) {
  return x / std::sqrt(static_cast<double>(x.rows()));
}

inline ComplexSpectrum eigenvalues(const Matrix& x) {
  if (x.rows() != x.cols()) throw ArgumentError("eigenvalues: matrix is not square");
  if (!x.allFinite()) throw ArgumentError("eigenvalues: non-finite entries");
  return ComplexSpectrum{detail::eigenvalues_real(normalized(x)), std::nullopt};
}

inline ComplexSpectrum eigenvalues(const MatrixSample& m) {
  auto spec = eigenvalues(m.entries);
  spec.source_spec = m.spec;
  return spec;
}

/// V(z) = [[0, n^{-1/2}X - zI], [n^{-1/2}X^T - conj(z)I, 0]], 2n x 2n Hermitian.
inline Eigen::MatrixXcd hermitize(const Matrix& x, Complex z) {
  const Eigen::Index n = x.rows();
  const Matrix a = normalized(x);
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  v.topRightCorner(n, n) = a.cast<Complex>();
  v.bottomLeftCorner(n, n) = a.transpose().cast<Complex>();
  for (Eigen::Index i = 0; i < n; ++i) {
    v(i, n + i) -= z;
    v(n + i, i) -= std::conj(z);
  }
  return v;
}

inline Eigen::MatrixXcd hermitize(const MatrixSample& m, Complex z) {
  return hermitize(m.entries, z);
}

/// Direct SVD of n^{-1/2} X - z I (real kernel when z is real).
inline SingularSpectrum singular_values(const Matrix& x, Complex z) {
  if (x.rows() != x.cols()) throw ArgumentError("singular_values: matrix is not square");
  const Eigen::Index n = x.rows();
  Matrix a = normalized(x);
  if (z.imag() == 0.0) {
    a.diagonal().array() -= z.real();
    return SingularSpectrum{z, detail::singular_values_real(std::move(a))};
  }
  Eigen::MatrixXcd c = a.cast<Complex>();
  for (Eigen::Index i = 0; i < n; ++i) c(i, i) -= z;
  return SingularSpectrum{z, detail::singular_values_complex(std::move(c))};
}

inline SingularSpectrum singular_values(const MatrixSample& m, Complex z) {
  return singular_values(m.entries, z);
}

/// Cross-check route: nonnegative half of the spectrum of V(z).
inline SingularSpectrum singular_values_hermitized(const Matrix& x, Complex z) {
  const Eigen::Index n = x.rows();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitize(x, z), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericalError("Hermitian eigensolver did not converge", detail::fingerprint(x));
  }
  // Eigenvalues come ascending; the top n are the +s_i.
  std::vector<double> s(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    s[static_cast<std::size_t>(i)] = std::max(0.0, es.eigenvalues()(2 * n - 1 - i));
  }
  return SingularSpectrum{z, std::move(s)};
}

/// log|det(n^{-1/2}X - zI)| = sum log s_i; -inf when some s_i is exactly 0.
inline double log_determinant(const SingularSpectrum& sv) {
  double acc = 0.0;
  for (double s : sv.values) {
    if (s == 0.0) return -std::numeric_limits<double>::infinity();
    acc += std::log(s);
  }
  return acc;
}

inline double log_determinant(const MatrixSample& m, Complex z) {
  return log_determinant(singular_values(m, z));
}

/// Same quantity through the eigenvalues: sum log|lambda_i - z|.
inline double log_determinant_from_eigenvalues(const ComplexSpectrum& spec, Complex z) {
  double acc = 0.0;
  for (const auto& l : spec.values) {
    const double d = std::abs(l - z);
    if (d == 0.0) return -std::numeric_limits<double>::infinity();
    acc += std::log(d);
  }
  return acc;
}

/// S_n(alpha, z) = (1/2n) Tr (V(z) - alpha)^{-1}, from the singular values.
inline Complex empirical_stieltjes(const SingularSpectrum& sv, Complex alpha) {
  if (!(alpha.imag() > 0.0)) throw ArgumentError("empirical_stieltjes: Im alpha must be > 0");
  if (sv.values.empty()) throw ArgumentError("empirical_stieltjes: empty spectrum");
  Complex acc{0.0, 0.0};
  for (double s : sv.values) acc += 1.0 / (s - alpha) + 1.0 / (-s - alpha);
  return acc / (2.0 * static_cast<double>(sv.values.size()));
}

/// Block averages of the explicitly assembled resolvent R = (V(z) - alpha)^{-1}.
struct ResolventAverages {
  Complex first_block;  ///< (1/n) sum_{i<n} R_ii
  Complex last_block;   ///< (1/n) sum_{i>=n} R_ii
  Complex t;            ///< (1/n) sum_j R_{j+n, j}
  Complex u;            ///< (1/n) sum_j R_{j, j+n}
  Complex trace_mean() const { return 0.5 * (first_block + last_block); }
};

inline ResolventAverages resolvent_averages(const Matrix& x, Complex z, Complex alpha) {
  if (!(alpha.imag() > 0.0)) throw ArgumentError("resolvent_averages: Im alpha must be > 0");
  const Eigen::Index n = x.rows();
  Eigen::MatrixXcd v = hermitize(x, z);
  v.diagonal().array() -= alpha;
  const Eigen::MatrixXcd r = v.partialPivLu().inverse();
  ResolventAverages out{};
  for (Eigen::Index j = 0; j < n; ++j) {
    out.first_block += r(j, j);
    out.last_block += r(n + j, n + j);
    out.t += r(n + j, j);
    out.u += r(j, n + j);
  }
  const double inv = 1.0 / static_cast<double>(n);
  out.first_block *= inv;
  out.last_block *= inv;
  out.t *= inv;
  out.u *= inv;
  return out;
}

inline ResolventAverages resolvent_averages(const MatrixSample& m, Complex z, Complex alpha) {
  return resolvent_averages(m.entries, z, alpha);
}

}  // namespace elliptic
