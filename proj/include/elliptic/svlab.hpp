// Copyright 2026 The elliptic Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "elliptic/detail/dense.hpp"
#include "elliptic/ensemble.hpp"
#include "elliptic/error.hpp"
#include "elliptic/parallel.hpp"
#include "elliptic/rng.hpp"
#include "elliptic/spectral.hpp"

namespace elliptic {

//---------------------------------------------------------------------------//
// Least singular value
//---------------------------------------------------------------------------//

/*!
 * Monte Carlo batch of least singular values of A = X - z sqrt(n) I.
 *
 * scaled_minima[k] = sqrt(n) s_n(A) = n s_n(n^{-1/2} X - z I), the scale on
 * which the event s_n(A) <= eps n^{-1/2} reads scaled_minima <= eps.
 * Trials whose decomposition fails are dropped; trial_ids keeps the surviving
 * draw indices in order.
 */
struct LsvTrialBatch {
  EnsembleSpec spec;
  Complex z;
  int trials = 0;
  double K = 0.0;
  std::vector<int> trial_ids;
  std::vector<double> scaled_minima;
  std::vector<bool> norm_ok;  ///< ||A|| <= 3 K sqrt(n)
  int norm_exceedances = 0;
  int failed = 0;
};

inline LsvTrialBatch least_singular_mc(const EnsembleSpec& spec, Complex z, int trials, double K,
                                       unsigned threads = 1) {
  spec.validate();
  if (trials < 1) throw ArgumentError("least_singular_mc: trials must be >= 1");
  if (!(K > 1.0)) throw ArgumentError("least_singular_mc: K must be > 1");

  struct Slot {
    double scaled = 0.0;
    bool ok = false;
    bool failed = false;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(trials));
  const double n = static_cast<double>(spec.n);
  parallel_for(slots.size(), threads, [&](std::size_t t) {
    try {
      const auto m = sample_matrix(spec, static_cast<std::uint32_t>(t));
      const auto sv = singular_values(m, z);
      slots[t].scaled = n * sv.values.back();
      // ||A|| = sqrt(n) s_1(n^{-1/2} X - z I)
      slots[t].ok = sv.values.front() <= 3.0 * K;
    } catch (const NumericalError&) {
      slots[t].failed = true;
    }
  });

  LsvTrialBatch b{spec, z, trials, K, {}, {}, {}, 0, 0};
  for (std::size_t t = 0; t < slots.size(); ++t) {
    if (slots[t].failed) {
      ++b.failed;
      continue;
    }
    b.trial_ids.push_back(static_cast<int>(t));
    b.scaled_minima.push_back(slots[t].scaled);
    b.norm_ok.push_back(slots[t].ok);
    if (!slots[t].ok) ++b.norm_exceedances;
  }
  return b;
}

/// p(eps) = fraction of scaled minima <= eps.
inline double empirical_tail(const LsvTrialBatch& b, double eps) {
  if (b.scaled_minima.empty()) throw ArgumentError("empirical_tail: empty batch");
  const auto c = std::count_if(b.scaled_minima.begin(), b.scaled_minima.end(),
                               [eps](double s) { return s <= eps; });
  return static_cast<double>(c) / static_cast<double>(b.scaled_minima.size());
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw ArgumentError("median: empty input");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

//---------------------------------------------------------------------------//
// Negative second moment identity
//---------------------------------------------------------------------------//

struct DistanceIdentity {
  double lhs = 0.0;  ///< sum_i s_i^{-2}
  double rhs = 0.0;  ///< sum_i dist(R_i, H_i)^{-2}
  double residual = 0.0;
};

/// Distance from row i of `a` to the span of its other rows.
inline double row_distance(const Matrix& a, Eigen::Index i) {
  const Eigen::Index m = a.rows();
  const Eigen::VectorXd r = a.row(i).transpose();
  if (m == 1) return r.norm();
  Matrix others(a.cols(), m - 1);
  for (Eigen::Index k = 0, c = 0; k < m; ++k) {
    if (k != i) others.col(c++) = a.row(k).transpose();
  }
  Eigen::HouseholderQR<Matrix> qr(others);
  const Matrix q = qr.householderQ() * Matrix::Identity(a.cols(), m - 1);
  return (r - q * (q.transpose() * r)).norm();
}

inline DistanceIdentity distance_identity_check(const Matrix& a) {
  if (a.rows() < 1 || a.rows() > a.cols()) {
    throw ArgumentError("distance_identity_check: need 1 <= rows <= cols");
  }
  if (!a.allFinite()) throw ArgumentError("distance_identity_check: non-finite entries");
  const auto s = detail::singular_values_real(a);
  if (!(s.back() > 1e-10 * s.front())) {
    throw PreconditionError("distance_identity_check: matrix does not have full row rank");
  }
  DistanceIdentity out;
  for (double v : s) out.lhs += 1.0 / (v * v);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double d = row_distance(a, i);
    out.rhs += 1.0 / (d * d);
  }
  out.residual = std::abs(out.lhs - out.rhs) / out.lhs;
  return out;
}

//---------------------------------------------------------------------------//
// Concentration function
//---------------------------------------------------------------------------//

struct ConcentrationEstimate {
  double epsilon = 0.0;
  double estimate = 0.0;
  double grid_width = 0.0;  ///< width of the sliding window, 2 eps
  std::size_t samples = 0;
};

/*!
 * sup_v (1/N) #{k : |Z_k - v| < eps}. An optimal open window can always be
 * slid until a sample sits just inside its left end, so the sup is the
 * largest count of samples in [Z_i, Z_i + 2 eps) over i.
 */
inline ConcentrationEstimate levy_concentration(std::span<const double> samples, double epsilon) {
  if (!(epsilon > 0.0)) throw ArgumentError("levy_concentration: epsilon must be > 0");
  if (samples.size() < 100) throw ArgumentError("levy_concentration: need at least 100 samples");
  std::vector<double> z(samples.begin(), samples.end());
  for (double v : z) {
    if (!std::isfinite(v)) throw ArgumentError("levy_concentration: non-finite sample");
  }
  std::sort(z.begin(), z.end());
  const double width = 2.0 * epsilon;
  std::size_t best = 0;
  std::size_t hi = 0;
  for (std::size_t lo = 0; lo < z.size(); ++lo) {
    hi = std::max(hi, lo);
    while (hi < z.size() && z[hi] - z[lo] < width) ++hi;
    best = std::max(best, hi - lo);
  }
  return {epsilon, static_cast<double>(best) / static_cast<double>(z.size()), width, z.size()};
}

struct SmallBallOptions {
  double tau = 0.5;
  double delta = 0.1;
  double coefficient_ratio = 10.0;  ///< max |b_i| / |a_i|
  int realizations = 100000;
  std::uint64_t seed = 0;
  PairDist pair_dist = PairDist::kGaussian;
  double C = 2.0;
  double C1 = 2.0;
  unsigned threads = 1;
};

struct SmallBallResult {
  ConcentrationEstimate estimate;
  double bound = 0.0;  ///< C eps / sqrt(1-rho^2) + C1 / ((1-rho^2)^{3/2} sqrt(n)); reported only
};

/// Concentration of sum_i (a_i xi_i + b_i eta_i) over correlated pairs.
inline SmallBallResult sbp_clt_experiment(int n, double rho, std::span<const double> a,
                                          std::span<const double> b, double epsilon,
                                          const SmallBallOptions& opt = {}) {
  validate_rho(rho);
  if (n < 1) throw ArgumentError("sbp_clt_experiment: n must be >= 1");
  if (a.size() != static_cast<std::size_t>(n) || b.size() != static_cast<std::size_t>(n)) {
    throw ArgumentError("sbp_clt_experiment: coefficient sequences must have length n");
  }
  if (!(epsilon > 0.0)) throw ArgumentError("sbp_clt_experiment: epsilon must be > 0");
  if (opt.realizations < 100) throw ArgumentError("sbp_clt_experiment: need >= 100 realizations");
  const double dn = static_cast<double>(n);
  const double lo = opt.tau / std::sqrt(2.0 * dn);
  const double hi = 1.0 / std::sqrt(opt.delta * dn);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double ai = std::abs(a[i]);
    if (!(ai >= lo && ai <= hi)) {
      throw ArgumentError("sbp_clt_experiment: |a_" + std::to_string(i) +
                          "| outside [tau/sqrt(2n), 1/sqrt(delta n)]");
    }
    if (!(std::abs(b[i]) <= opt.coefficient_ratio * ai)) {
      throw ArgumentError("sbp_clt_experiment: |b_" + std::to_string(i) + "/a_" +
                          std::to_string(i) + "| exceeds coefficient_ratio");
    }
  }

  const CounterRng rng(opt.seed, StreamDomain::kSmallBall, 0);
  std::vector<double> sums(static_cast<std::size_t>(opt.realizations));
  parallel_for(sums.size(), opt.threads, [&](std::size_t r) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto [xi, eta] = sample_pair(rho, opt.pair_dist, rng,
                                         static_cast<std::uint64_t>(r) * static_cast<std::uint64_t>(n) +
                                             static_cast<std::uint64_t>(i));
      acc += a[static_cast<std::size_t>(i)] * xi + b[static_cast<std::size_t>(i)] * eta;
    }
    sums[r] = acc;
  });

  const double g = 1.0 - rho * rho;
  SmallBallResult out;
  out.estimate = levy_concentration(sums, epsilon);
  out.bound = opt.C * epsilon / std::sqrt(g) + opt.C1 / (std::pow(g, 1.5) * std::sqrt(dn));
  return out;
}

//---------------------------------------------------------------------------//
// Sparse / compressible / incompressible vectors
//---------------------------------------------------------------------------//

enum class VectorLabel { kSparse, kCompressible, kIncompressible };

inline std::string_view to_string(VectorLabel l) {
  switch (l) {
    case VectorLabel::kSparse: return "sparse";
    case VectorLabel::kCompressible: return "compressible";
    case VectorLabel::kIncompressible: return "incompressible";
  }
  return "?";
}

struct VectorClass {
  double delta = 0.1;
  double tau = 0.5;
  VectorLabel label = VectorLabel::kIncompressible;
  double dist_to_sparse = 0.0;
};

/// Distance from x to the set of vectors with at most floor(delta n) nonzeros:
/// the norm of everything but the floor(delta n) largest coordinates.
inline double distance_to_sparse(std::span<const double> x, double delta) {
  std::vector<double> sq(x.size());
  std::transform(x.begin(), x.end(), sq.begin(), [](double v) { return v * v; });
  const auto k = static_cast<std::size_t>(std::floor(delta * static_cast<double>(x.size())));
  if (k >= sq.size()) return 0.0;
  std::nth_element(sq.begin(), sq.begin() + static_cast<std::ptrdiff_t>(k), sq.end(),
                   std::greater<>());
  std::sort(sq.begin() + static_cast<std::ptrdiff_t>(k), sq.end());
  return std::sqrt(std::accumulate(sq.begin() + static_cast<std::ptrdiff_t>(k), sq.end(), 0.0));
}

inline VectorClass classify_vector(std::span<const double> x, double delta = 0.1,
                                   double tau = 0.5) {
  if (x.empty()) throw ArgumentError("classify_vector: empty vector");
  if (!(delta > 0.0 && delta < 1.0) || !(tau > 0.0 && tau < 1.0)) {
    throw ArgumentError("classify_vector: delta and tau must lie in (0,1)");
  }
  double norm2 = 0.0;
  for (double v : x) norm2 += v * v;
  if (!(std::abs(std::sqrt(norm2) - 1.0) <= 1e-10)) {
    throw ArgumentError("classify_vector: input is not a unit vector");
  }
  const double n = static_cast<double>(x.size());
  const auto support = std::count_if(x.begin(), x.end(), [](double v) { return v != 0.0; });
  VectorClass c{delta, tau, VectorLabel::kIncompressible, distance_to_sparse(x, delta)};
  if (static_cast<double>(support) <= delta * n) {
    c.label = VectorLabel::kSparse;
  } else if (c.dist_to_sparse <= tau) {
    c.label = VectorLabel::kCompressible;
  }
  return c;
}

/// Number of coordinates with tau/sqrt(2n) <= |x_k| <= 1/sqrt(delta n).
inline std::size_t spread_count(std::span<const double> x, double delta, double tau) {
  const double n = static_cast<double>(x.size());
  const double lo = tau / std::sqrt(2.0 * n);
  const double hi = 1.0 / std::sqrt(delta * n);
  return static_cast<std::size_t>(std::count_if(x.begin(), x.end(), [&](double v) {
    const double a = std::abs(v);
    return a >= lo && a <= hi;
  }));
}

/// Incompressible vectors have at least (1/2) delta tau^2 n spread coordinates.
inline bool spread_property_holds(std::span<const double> x, double delta, double tau) {
  const double n = static_cast<double>(x.size());
  return static_cast<double>(spread_count(x, delta, tau)) >= 0.5 * delta * tau * tau * n;
}

}  // namespace elliptic
