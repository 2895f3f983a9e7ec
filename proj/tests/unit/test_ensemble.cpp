// Copyright 2026 The elliptic Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "elliptic/ensemble.hpp"

namespace elliptic {
namespace {

TEST(EnsembleSpec, RejectsUnitCorrelation) {
  EXPECT_THROW(EnsembleSpec::make(10, 1.0), ConfigError);
  EXPECT_THROW(EnsembleSpec::make(10, -1.0), ConfigError);
  EXPECT_THROW(EnsembleSpec::make(10, NAN), ConfigError);
  EXPECT_THROW(EnsembleSpec::make(0, 0.5), ConfigError);
  EXPECT_NO_THROW(EnsembleSpec::make(1, 0.999));
}

TEST(EnsembleSpec, NamesRoundTrip) {
  for (auto d : {PairDist::kGaussian, PairDist::kRademacher}) {
    EXPECT_EQ(parse_pair_dist(to_string(d)), d);
  }
  for (auto d : {DiagDist::kStandardGaussian, DiagDist::kZero, DiagDist::kSameAsOffDiagMarginal}) {
    EXPECT_EQ(parse_diag_dist(to_string(d)), d);
  }
  EXPECT_FALSE(parse_pair_dist("cauchy").has_value());
}

TEST(SamplePair, RejectsBadRho) {
  const CounterRng r(0, StreamDomain::kUser, 0);
  EXPECT_THROW(sample_pair(1.0, PairDist::kGaussian, r, 0), ConfigError);
}

TEST(SamplePair, GaussianUncorrelatedAtRhoZero) {
  const CounterRng r(11, StreamDomain::kUser, 0);
  const int n = 1000000;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto [x, y] = sample_pair(0.0, PairDist::kGaussian, r, static_cast<std::uint64_t>(i));
    sxy += x * y;
    sxx += x * x;
    syy += y * y;
  }
  EXPECT_NEAR(sxy / std::sqrt(sxx * syy), 0.0, 0.004);
}

TEST(SamplePair, RademacherCellFrequency) {
  EXPECT_DOUBLE_EQ(rademacher_pmf(0.5)[0], 0.375);
  const CounterRng r(12, StreamDomain::kUser, 0);
  const int n = 1000000;
  int pp = 0;
  for (int i = 0; i < n; ++i) {
    const auto [x, y] = sample_pair(0.5, PairDist::kRademacher, r, static_cast<std::uint64_t>(i));
    ASSERT_TRUE(std::abs(x) == 1.0 && std::abs(y) == 1.0);
    pp += (x > 0 && y > 0);
  }
  EXPECT_NEAR(static_cast<double>(pp) / n, 0.375, 4.0 * std::sqrt(0.375 * 0.625 / n));
}

TEST(SamplePair, RademacherPmfIsAProbability) {
  for (int k = -100; k <= 100; ++k) {
    const double rho = k / 100.0;
    const auto p = rademacher_pmf(rho);
    double sum = 0.0;
    for (double c : p) {
      EXPECT_GE(c, 0.0);
      sum += c;
    }
    EXPECT_DOUBLE_EQ(sum, 1.0);
    // E[XY] = P(same) - P(different)
    EXPECT_NEAR(p[0] + p[1] - p[2] - p[3], rho, 1e-15);
  }
}

struct PairCase {
  double rho;
  PairDist dist;
};

class PairMomentBands : public ::testing::TestWithParam<PairCase> {};

TEST_P(PairMomentBands, WithinExplicitBands) {
  const auto [rho, dist] = GetParam();
  const CounterRng r(77, StreamDomain::kUser, 1);
  const int n = 100000;
  double mean = 0.0, var = 0.0, corr = 0.0, corr2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto [x, y] = sample_pair(rho, dist, r, static_cast<std::uint64_t>(i));
    mean += x;
    var += x * x;
    corr += x * y;
    corr2 += x * x * y * y;
  }
  mean /= n;
  var /= n;
  corr /= n;
  const double m4 = marginal_fourth_moment(dist);
  const double corr_sd = std::sqrt(std::max(corr2 / n - corr * corr, 0.0) / n);
  EXPECT_LE(std::abs(mean), 4.0 / std::sqrt(n));
  EXPECT_LE(std::abs(var - 1.0), 4.0 * std::sqrt(m4 - 1.0) / std::sqrt(n) + 1e-12);
  EXPECT_LE(std::abs(corr - rho), 4.0 * corr_sd + 1e-12);
}

INSTANTIATE_TEST_SUITE_P(
    AllLaws, PairMomentBands,
    ::testing::Values(PairCase{-0.5, PairDist::kGaussian}, PairCase{0.0, PairDist::kGaussian},
                      PairCase{0.5, PairDist::kGaussian}, PairCase{0.9, PairDist::kGaussian},
                      PairCase{-0.5, PairDist::kRademacher}, PairCase{0.0, PairDist::kRademacher},
                      PairCase{0.5, PairDist::kRademacher}, PairCase{0.9, PairDist::kRademacher}));

TEST(SampleMatrix, OneByOneUsesDiagonalLaw) {
  auto spec = EnsembleSpec::make(1, 0.3, PairDist::kGaussian, DiagDist::kStandardGaussian, 5);
  const auto m = sample_matrix(spec, 4);
  EXPECT_EQ(m.entries(0, 0), CounterRng(5, StreamDomain::kDiagonal, 4).normals(0)[0]);
  spec.diag_dist = DiagDist::kZero;
  EXPECT_EQ(sample_matrix(spec, 4).entries(0, 0), 0.0);
  spec.pair_dist = PairDist::kRademacher;
  spec.diag_dist = DiagDist::kSameAsOffDiagMarginal;
  EXPECT_EQ(std::abs(sample_matrix(spec, 4).entries(0, 0)), 1.0);
}

TEST(SampleMatrix, DeterministicPerDraw) {
  const auto spec = EnsembleSpec::make(40, 0.5, PairDist::kGaussian, DiagDist::kStandardGaussian, 99);
  const auto a = sample_matrix(spec, 3);
  const auto b = sample_matrix(spec, 3);
  const auto c = sample_matrix(spec, 4);
  EXPECT_EQ(std::memcmp(a.entries.data(), b.entries.data(), sizeof(double) * 1600), 0);
  EXPECT_NE(a.entries, c.entries);
  EXPECT_EQ(a.draw_index, 3u);
}

TEST(SampleMatrix, PairsComeFromOneSamplerCall) {
  const auto spec = EnsembleSpec::make(6, -0.4, PairDist::kGaussian, DiagDist::kZero, 8);
  const auto m = sample_matrix(spec, 2);
  const CounterRng r(8, StreamDomain::kOffDiagonalPairs, 2);
  for (int i = 0; i < 6; ++i) {
    EXPECT_EQ(m.entries(i, i), 0.0);
    for (int j = i + 1; j < 6; ++j) {
      const auto [a, b] = sample_pair(-0.4, PairDist::kGaussian, r, static_cast<std::uint64_t>(i * 6 + j));
      EXPECT_EQ(m.entries(i, j), a);
      EXPECT_EQ(m.entries(j, i), b);
    }
  }
}

TEST(SampleMatrix, PairCorrelationAtRhoHalf) {
  const auto spec = EnsembleSpec::make(200, 0.5, PairDist::kGaussian, DiagDist::kStandardGaussian, 1);
  const auto m = sample_matrix(spec, 0);
  double acc = 0.0;
  for (int i = 0; i < 200; ++i)
    for (int j = 0; j < 200; ++j)
      if (i != j) acc += m.entries(i, j) * m.entries(j, i);
  EXPECT_NEAR(acc / (200.0 * 199.0), 0.5, 0.02);
}

TEST(MomentAudit, EmptyInputIsAnError) {
  EXPECT_THROW(moment_audit({}), ArgumentError);
}

TEST(MomentAudit, GaussianFourthMomentNearThree) {
  const auto spec = EnsembleSpec::make(150, 0.5, PairDist::kGaussian, DiagDist::kStandardGaussian, 2);
  std::vector<MatrixSample> s{sample_matrix(spec, 0), sample_matrix(spec, 1)};
  const auto r = moment_audit(s);
  EXPECT_EQ(r.pairs, 2u * 150u * 149u / 2u);
  EXPECT_LE(std::abs(r.fourth_moment.value - 3.0), 4.0 * r.fourth_moment.std_error);
  EXPECT_FALSE(r.any_flagged());
}

TEST(MomentAudit, RademacherFourthMomentExactlyOne) {
  const auto spec = EnsembleSpec::make(80, 0.2, PairDist::kRademacher, DiagDist::kStandardGaussian, 3);
  std::vector<MatrixSample> s{sample_matrix(spec, 0)};
  const auto r = moment_audit(s);
  EXPECT_EQ(r.fourth_moment.value, 1.0);
  EXPECT_EQ(r.variance.value, 1.0);
  EXPECT_FALSE(r.fourth_moment.flagged);
}

TEST(MomentAudit, NegativeCorrelationRecovered) {
  const auto spec = EnsembleSpec::make(200, -0.5, PairDist::kGaussian, DiagDist::kStandardGaussian, 4);
  std::vector<MatrixSample> s{sample_matrix(spec, 0), sample_matrix(spec, 1), sample_matrix(spec, 2)};
  const auto r = moment_audit(s);
  EXPECT_LE(std::abs(r.pair_correlation.value + 0.5), 4.0 * r.pair_correlation.std_error);
  EXPECT_FALSE(r.pair_correlation.flagged);
}

TEST(MomentAudit, FlagsWrongTarget) {
  // Correlation 0.5 audited against a spec claiming 0.
  const auto real = EnsembleSpec::make(200, 0.5, PairDist::kGaussian, DiagDist::kStandardGaussian, 4);
  auto m = sample_matrix(real, 0);
  m.spec.rho = 0.0;
  std::vector<MatrixSample> s{m};
  EXPECT_TRUE(moment_audit(s).pair_correlation.flagged);
}

}  // namespace
}  // namespace elliptic
