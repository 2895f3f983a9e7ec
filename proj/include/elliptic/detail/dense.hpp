// Copyright 2026 The elliptic Authors.
// SPDX-License-Identifier: Apache-2.0

// Dense eigenvalue and singular value kernels. LAPACK when available,
// Eigen otherwise. All entry points take their matrix by value: the LAPACK
// drivers overwrite the input.

#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "elliptic/error.hpp"

#if defined(ELLIPTIC_HAVE_LAPACK)
#ifndef lapack_complex_float
#define lapack_complex_float std::complex<float>
#endif
#ifndef lapack_complex_double
#define lapack_complex_double std::complex<double>
#endif
#include <lapacke.h>
#endif

namespace elliptic::detail {

/// FNV-1a over the raw bytes of a dense matrix; reported with solver failures.
template <typename Derived>
std::string fingerprint(const Eigen::DenseBase<Derived>& m) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  const auto* bytes = reinterpret_cast<const unsigned char*>(m.derived().data());
  const auto len = static_cast<std::size_t>(m.size()) * sizeof(typename Derived::Scalar);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ull;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%ldx%ld fnv=%016llx", static_cast<long>(m.rows()),
                static_cast<long>(m.cols()), static_cast<unsigned long long>(h));
  return buf;
}

inline void sort_descending(std::vector<double>& v) {
  std::sort(v.begin(), v.end(), std::greater<>());
}

/// Eigenvalues of a real square matrix, in the order the solver returns them.
inline std::vector<std::complex<double>> eigenvalues_real(Eigen::MatrixXd a) {
  const auto n = a.rows();
  std::vector<std::complex<double>> out(static_cast<std::size_t>(n));
  if (n == 0) return out;
#if defined(ELLIPTIC_HAVE_LAPACK)
  const std::string fp = fingerprint(a);
  std::vector<double> wr(static_cast<std::size_t>(n)), wi(static_cast<std::size_t>(n));
  const lapack_int info =
      LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'N', static_cast<lapack_int>(n), a.data(),
                    static_cast<lapack_int>(n), wr.data(), wi.data(), nullptr, 1, nullptr, 1);
  if (info != 0) {
    throw NumericalError("dgeev failed with info=" + std::to_string(info), fp);
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {wr[i], wi[i]};
#else
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  if (es.info() != Eigen::Success) {
    throw NumericalError("real Schur iteration did not converge", fingerprint(a));
  }
  for (Eigen::Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
#endif
  return out;
}

/// Singular values of a real matrix, descending.
inline std::vector<double> singular_values_real(Eigen::MatrixXd a) {
  const auto k = std::min(a.rows(), a.cols());
  std::vector<double> s(static_cast<std::size_t>(k));
  if (k == 0) return s;
#if defined(ELLIPTIC_HAVE_LAPACK)
  const std::string fp = fingerprint(a);
  const lapack_int info = LAPACKE_dgesdd(
      LAPACK_COL_MAJOR, 'N', static_cast<lapack_int>(a.rows()),
      static_cast<lapack_int>(a.cols()), a.data(), static_cast<lapack_int>(a.rows()),
      s.data(), nullptr, 1, nullptr, 1);
  if (info != 0) throw NumericalError("dgesdd failed with info=" + std::to_string(info), fp);
#else
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a);
  for (Eigen::Index i = 0; i < k; ++i) s[static_cast<std::size_t>(i)] = svd.singularValues()(i);
#endif
  sort_descending(s);
  return s;
}

/// Singular values of a complex matrix, descending.
inline std::vector<double> singular_values_complex(Eigen::MatrixXcd a) {
  const auto k = std::min(a.rows(), a.cols());
  std::vector<double> s(static_cast<std::size_t>(k));
  if (k == 0) return s;
#if defined(ELLIPTIC_HAVE_LAPACK)
  const std::string fp = fingerprint(a);
  const lapack_int info = LAPACKE_zgesdd(
      LAPACK_COL_MAJOR, 'N', static_cast<lapack_int>(a.rows()),
      static_cast<lapack_int>(a.cols()), a.data(), static_cast<lapack_int>(a.rows()),
      s.data(), nullptr, 1, nullptr, 1);
  if (info != 0) throw NumericalError("zgesdd failed with info=" + std::to_string(info), fp);
#else
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(a);
  for (Eigen::Index i = 0; i < k; ++i) s[static_cast<std::size_t>(i)] = svd.singularValues()(i);
#endif
  sort_descending(s);
  return s;
}

}  // namespace elliptic::detail
