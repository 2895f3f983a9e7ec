// Copyright 2026 The elliptic Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "elliptic/error.hpp"
#include "elliptic/rng.hpp"

namespace elliptic {

using Matrix = Eigen::MatrixXd;

/// Joint law of an off-diagonal pair (X_ij, X_ji).
enum class PairDist { kGaussian, kRademacher };

/// Law of the diagonal entries X_ii.
enum class DiagDist { kStandardGaussian, kZero, kSameAsOffDiagMarginal };

inline std::string_view to_string(PairDist d) {
  return d == PairDist::kGaussian ? "gaussian" : "rademacher";
}

inline std::string_view to_string(DiagDist d) {
  switch (d) {
    case DiagDist::kStandardGaussian: return "standard_gaussian";
    case DiagDist::kZero: return "zero";
    case DiagDist::kSameAsOffDiagMarginal: return "same_as_offdiag_marginal";
  }
  return "?";
}

inline std::optional<PairDist> parse_pair_dist(std::string_view s) {
  if (s == "gaussian") return PairDist::kGaussian;
  if (s == "rademacher") return PairDist::kRademacher;
  return std::nullopt;
}

inline std::optional<DiagDist> parse_diag_dist(std::string_view s) {
  if (s == "standard_gaussian") return DiagDist::kStandardGaussian;
  if (s == "zero") return DiagDist::kZero;
  if (s == "same_as_offdiag_marginal") return DiagDist::kSameAsOffDiagMarginal;
  return std::nullopt;
}

/// E|X|^4 of the marginal of a pair law (the M_4 of the ensemble).
inline double marginal_fourth_moment(PairDist d) {
  return d == PairDist::kGaussian ? 3.0 : 1.0;
}

inline void validate_rho(double rho) {
  if (!std::isfinite(rho) || !(std::abs(rho) < 1.0)) {
    throw ConfigError("rho: |rho| must be < 1, got " + std::to_string(rho));
  }
}

//---------------------------------------------------------------------------//
/*!
 * A real n x n ensemble with i.i.d. off-diagonal pairs of correlation rho and
 * an independent i.i.d. diagonal. Construct through make(), which rejects
 * |rho| >= 1 and n == 0.
 */
struct EnsembleSpec {
  int n = 1;
  double rho = 0.0;
  PairDist pair_dist = PairDist::kGaussian;
  DiagDist diag_dist = DiagDist::kStandardGaussian;
  std::uint64_t seed = 0;

  static EnsembleSpec make(int n, double rho, PairDist pair = PairDist::kGaussian,
                           DiagDist diag = DiagDist::kStandardGaussian,
                           std::uint64_t seed = 0) {
    EnsembleSpec s{n, rho, pair, diag, seed};
    s.validate();
    return s;
  }

  void validate() const {
    if (n < 1) throw ConfigError("n: must be >= 1, got " + std::to_string(n));
    validate_rho(rho);
  }

  friend bool operator==(const EnsembleSpec&, const EnsembleSpec&) = default;
};

struct MatrixSample {
  EnsembleSpec spec;
  Matrix entries;
  std::uint32_t draw_index = 0;
};

/// Cell probabilities of the Rademacher pair law, ordered
/// (+1,+1), (-1,-1), (+1,-1), (-1,+1).
inline std::array<double, 4> rademacher_pmf(double rho) {
  const double same = (1.0 + rho) / 4.0;
  const double diff = (1.0 - rho) / 4.0;
  return {same, same, diff, diff};
}

/// One (X_ij, X_ji) pair from counter `index` of `rng`.
inline std::pair<double, double> sample_pair(double rho, PairDist dist,
                                             const CounterRng& rng,
                                             std::uint64_t index) {
  validate_rho(rho);
  if (dist == PairDist::kGaussian) {
    const auto g = rng.normals(index);
    return {g[0], rho * g[0] + std::sqrt(1.0 - rho * rho) * g[1]};
  }
  const double u = rng.uniforms(index)[0];
  const auto p = rademacher_pmf(rho);
  if (u < p[0]) return {1.0, 1.0};
  if (u < p[0] + p[1]) return {-1.0, -1.0};
  if (u < p[0] + p[1] + p[2]) return {1.0, -1.0};
  return {-1.0, 1.0};
}

namespace detail {

inline double sample_diagonal(const EnsembleSpec& spec, const CounterRng& rng,
                              std::uint64_t index) {
  switch (spec.diag_dist) {
    case DiagDist::kZero:
      return 0.0;
    case DiagDist::kStandardGaussian:
      return rng.normals(index)[0];
    case DiagDist::kSameAsOffDiagMarginal:
      if (spec.pair_dist == PairDist::kGaussian) return rng.normals(index)[0];
      return rng.uniforms(index)[0] < 0.5 ? -1.0 : 1.0;
  }
  return 0.0;
}

}  // namespace detail

/// Draw `draw_index` of the ensemble. Entry (i, j), i < j, and its partner
/// (j, i) come from counter i*n + j of the pair stream; X_ii from counter i of
/// the diagonal stream.
inline MatrixSample sample_matrix(const EnsembleSpec& spec, std::uint32_t draw_index) {
  spec.validate();
  const int n = spec.n;
  const CounterRng pairs(spec.seed, StreamDomain::kOffDiagonalPairs, draw_index);
  const CounterRng diag(spec.seed, StreamDomain::kDiagonal, draw_index);

  Matrix x(n, n);
  for (int i = 0; i < n; ++i) {
    x(i, i) = detail::sample_diagonal(spec, diag, static_cast<std::uint64_t>(i));
    for (int j = i + 1; j < n; ++j) {
      const auto index = static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n) +
                         static_cast<std::uint64_t>(j);
      const auto [a, b] = sample_pair(spec.rho, spec.pair_dist, pairs, index);
      x(i, j) = a;
      x(j, i) = b;
    }
  }
  return MatrixSample{spec, std::move(x), draw_index};
}

//---------------------------------------------------------------------------//
// Moment audit
//---------------------------------------------------------------------------//

struct MomentEstimate {
  double value = 0.0;
  double std_error = 0.0;
  double target = 0.0;
  bool flagged = false;
};

/// Pooled moments over all off-diagonal pairs. Standard errors are computed at
/// the pair level, so the within-pair correlation is accounted for.
struct MomentReport {
  std::size_t pairs = 0;
  MomentEstimate mean;
  MomentEstimate variance;
  MomentEstimate pair_correlation;
  MomentEstimate fourth_moment;

  bool any_flagged() const {
    return mean.flagged || variance.flagged || pair_correlation.flagged ||
           fourth_moment.flagged;
  }
};

namespace detail {

struct RunningMoment {
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double v) {
    sum += v;
    sum_sq += v * v;
  }

  MomentEstimate finish(std::size_t count, double target, double sigmas) const {
    const double m = sum / static_cast<double>(count);
    const double var = std::max(0.0, sum_sq / static_cast<double>(count) - m * m);
    const double se = std::sqrt(var / static_cast<double>(count));
    return {m, se, target, std::abs(m - target) > sigmas * se + 1e-12};
  }
};

}  // namespace detail

/// Flags any moment outside its `sigmas`-sigma band around the ensemble target.
inline MomentReport moment_audit(std::span<const MatrixSample> samples,
                                 double sigmas = 4.0) {
  if (samples.empty()) throw ArgumentError("moment_audit: no samples");
  const EnsembleSpec& spec = samples.front().spec;

  detail::RunningMoment mean, second, corr, fourth;
  std::size_t count = 0;
  for (const auto& s : samples) {
    const int n = s.spec.n;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double a = s.entries(i, j);
        const double b = s.entries(j, i);
        mean.add(0.5 * (a + b));
        second.add(0.5 * (a * a + b * b));
        corr.add(a * b);
        fourth.add(0.5 * (a * a * a * a + b * b * b * b));
        ++count;
      }
    }
  }
  if (count == 0) throw ArgumentError("moment_audit: samples have no off-diagonal pairs");

  MomentReport r;
  r.pairs = count;
  r.mean = mean.finish(count, 0.0, sigmas);
  r.variance = second.finish(count, 1.0, sigmas);
  r.pair_correlation = corr.finish(count, spec.rho, sigmas);
  r.fourth_moment = fourth.finish(count, marginal_fourth_moment(spec.pair_dist), sigmas);
  return r;
}

}  // namespace elliptic
