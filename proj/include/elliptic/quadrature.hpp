// Copyright 2026 The elliptic Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "elliptic/error.hpp"

namespace elliptic::quadrature {

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(int order) : nodes(static_cast<std::size_t>(order)),
                                      weights(static_cast<std::size_t>(order)) {
    if (order < 1) throw ArgumentError("GaussLegendre: order must be >= 1");
    const int m = (order + 1) / 2;
    for (int i = 0; i < m; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0, p1 = 0.0;
        for (int k = 1; k <= order; ++k) {
          const double p2 = p1;
          p1 = p0;
          p0 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p2) / k;
        }
        dp = order * (x * p0 - p1) / (x * x - 1.0);
        const double dx = p0 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      // Refresh the derivative at the converged node.
      {
        double p0 = 1.0, p1 = 0.0;
        for (int k = 1; k <= order; ++k) {
          const double p2 = p1;
          p1 = p0;
          p0 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p2) / k;
        }
        dp = order * (x * p0 - p1) / (x * x - 1.0);
      }
      const double w = 2.0 / ((1.0 - x * x) * dp * dp);
      nodes[static_cast<std::size_t>(i)] = -x;
      nodes[static_cast<std::size_t>(order - 1 - i)] = x;
      weights[static_cast<std::size_t>(i)] = w;
      weights[static_cast<std::size_t>(order - 1 - i)] = w;
    }
    if (order % 2 == 1) nodes[static_cast<std::size_t>(order / 2)] = 0.0;
  }

  std::size_t size() const { return nodes.size(); }

  template <typename F>
  double integrate(F&& f, double a, double b) const {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(mid + half * nodes[i]);
    return acc * half;
  }
};

using Panel = std::pair<double, double>;

/// Panels covering [a, b] whose widths halve toward `focus` (clamped into
/// [a, b]); the panel touching the focus has width ~ 2^-levels of its side.
inline std::vector<Panel> graded_panels(double a, double b, double focus, int levels) {
  std::vector<Panel> out;
  if (!(b > a)) return out;
  focus = std::clamp(focus, a, b);
  auto grade = [&](double far, double near) {
    // Panels from `far` toward `near`, each half the distance of the last.
    const double len = near - far;
    if (len == 0.0) return;
    double lo = far;
    double scale = 0.5;
    for (int k = 0; k < levels; ++k) {
      const double hi = near - len * scale;
      out.emplace_back(std::min(lo, hi), std::max(lo, hi));
      lo = hi;
      scale *= 0.5;
    }
    out.emplace_back(std::min(lo, near), std::max(lo, near));
  };
  grade(a, focus);
  grade(b, focus);
  std::sort(out.begin(), out.end());
  return out;
}

template <typename F>
double integrate_panels(F&& f, const std::vector<Panel>& panels, const GaussLegendre& rule) {
  double acc = 0.0;
  for (const auto& [lo, hi] : panels) {
    if (hi > lo) acc += rule.integrate(f, lo, hi);
  }
  return acc;
}

}  // namespace elliptic::quadrature
