// Copyright 2026 The elliptic Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "elliptic/ensemble.hpp"
#include "elliptic/error.hpp"
#include "elliptic/quadrature.hpp"
#include "elliptic/spectral.hpp"

namespace elliptic {

//---------------------------------------------------------------------------//
/*!
 * The limit law: uniform measure on the ellipse
 * x^2/(1+rho)^2 + y^2/(1-rho)^2 <= 1, density 1/(pi (1 - rho^2)).
 */
class EllipticLaw {
 public:
  explicit EllipticLaw(double rho) : rho_(rho) { validate_rho(rho); }

  double rho() const { return rho_; }
  double semi_axis_x() const { return 1.0 + rho_; }
  double semi_axis_y() const { return 1.0 - rho_; }
  double density_value() const { return 1.0 / (std::numbers::pi * (1.0 - rho_ * rho_)); }
  double area() const { return std::numbers::pi * semi_axis_x() * semi_axis_y(); }

 private:
  double rho_;
};

inline bool ellipse_contains(const EllipticLaw& law, double x, double y, double inflation = 1.0) {
  if (!(inflation >= 1.0)) throw ArgumentError("ellipse_contains: inflation must be >= 1");
  const double u = x / (law.semi_axis_x() * inflation);
  const double v = y / (law.semi_axis_y() * inflation);
  return u * u + v * v <= 1.0;
}

inline double elliptic_density(const EllipticLaw& law, double x, double y) {
  return ellipse_contains(law, x, y) ? law.density_value() : 0.0;
}

//---------------------------------------------------------------------------//
// Coverage
//---------------------------------------------------------------------------//

struct CoverageReport {
  double fraction_inside = 0.0;
  /// Mass in quadrants I..IV (x>0,y>0), (x<0,y>0), (x<0,y<0), (x>0,y<0).
  /// Points on an axis are split evenly between the adjacent quadrants.
  std::array<double, 4> quadrant_masses{};
};

inline CoverageReport coverage_report(std::span<const Complex> points, const EllipticLaw& law,
                                      double inflation = 1.05) {
  if (points.empty()) throw ArgumentError("coverage_report: empty spectrum");
  std::size_t inside = 0;
  // Quarter-units keep the tally exact and order independent.
  std::array<std::uint64_t, 4> quarters{};
  for (const auto& p : points) {
    if (ellipse_contains(law, p.real(), p.imag(), inflation)) ++inside;
    const double x = p.real(), y = p.imag();
    const int xs = (x > 0) - (x < 0);
    const int ys = (y > 0) - (y < 0);
    const std::array<int, 4> qx{1, -1, -1, 1};
    const std::array<int, 4> qy{1, 1, -1, -1};
    for (std::size_t q = 0; q < 4; ++q) {
      const std::uint64_t wx = xs == 0 ? 1 : (xs == qx[q] ? 2 : 0);
      const std::uint64_t wy = ys == 0 ? 1 : (ys == qy[q] ? 2 : 0);
      quarters[q] += wx * wy;
    }
  }
  const double total = static_cast<double>(points.size());
  CoverageReport r;
  r.fraction_inside = static_cast<double>(inside) / total;
  for (std::size_t q = 0; q < 4; ++q) {
    r.quadrant_masses[q] = static_cast<double>(quarters[q]) / (4.0 * total);
  }
  return r;
}

inline CoverageReport coverage_report(const ComplexSpectrum& spec, const EllipticLaw& law,
                                      double inflation = 1.05) {
  return coverage_report(std::span<const Complex>(spec.values), law, inflation);
}

//---------------------------------------------------------------------------//
// Histograms
//---------------------------------------------------------------------------//

struct Bounds {
  double x_lo = -1.6, x_hi = 1.6, y_lo = -1.1, y_hi = 1.1;

  /// [-1.6, 1.6] x [-1.1, 1.1] for rho >= 0, transposed for rho < 0 so the
  /// long axis of the ellipse stays inside.
  static Bounds default_for(double rho) {
    if (rho >= 0.0) return {};
    return {-1.1, 1.1, -1.6, 1.6};
  }
};

namespace detail {

/// Bin edges lo..hi; mirror-exact when lo == -hi.
inline std::vector<double> bin_edges(double lo, double hi, int bins) {
  std::vector<double> e(static_cast<std::size_t>(bins) + 1);
  for (int k = 0; k <= bins; ++k) {
    e[static_cast<std::size_t>(k)] = (lo * (bins - k) + hi * k) / bins;
  }
  e.front() = lo;
  e.back() = hi;
  return e;
}

struct AxisHit {
  int first = -1;   ///< -1: outside
  int second = -1;  ///< set when the value sits exactly on an interior edge
};

inline AxisHit locate(const std::vector<double>& edges, double v) {
  const int bins = static_cast<int>(edges.size()) - 1;
  if (!(v >= edges.front() && v <= edges.back())) return {};
  const auto it = std::upper_bound(edges.begin(), edges.end(), v);
  int k = static_cast<int>(it - edges.begin()) - 1;
  if (k >= bins) return {bins - 1, -1};
  if (k > 0 && v == edges[static_cast<std::size_t>(k)]) return {k - 1, k};
  return {k, -1};
}

}  // namespace detail

//---------------------------------------------------------------------------//
/*!
 * Binned empirical measure on a rectangle. Cells plus the overflow cell hold
 * total mass 1. A point lying exactly on an interior edge is shared between
 * the neighbouring cells.
 */
class SpectralHistogram {
 public:
  SpectralHistogram(Bounds bounds, int nx, int ny)
      : bounds_(bounds), nx_(nx), ny_(ny),
        x_edges_(detail::bin_edges(bounds.x_lo, bounds.x_hi, nx)),
        y_edges_(detail::bin_edges(bounds.y_lo, bounds.y_hi, ny)),
        quarters_(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny), 0) {}

  void add(Complex p) {
    ++n_points_;
    const auto hx = detail::locate(x_edges_, p.real());
    const auto hy = detail::locate(y_edges_, p.imag());
    if (hx.first < 0 || hy.first < 0) {
      overflow_ += 4;
      return;
    }
    const std::uint64_t wx = hx.second < 0 ? 2 : 1;
    const std::uint64_t wy = hy.second < 0 ? 2 : 1;
    for (int ix : {hx.first, hx.second}) {
      if (ix < 0) continue;
      for (int iy : {hy.first, hy.second}) {
        if (iy < 0) continue;
        quarters_[index(ix, iy)] += wx * wy;
      }
    }
  }

  const Bounds& bounds() const { return bounds_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::size_t n_points() const { return n_points_; }
  const std::vector<double>& x_edges() const { return x_edges_; }
  const std::vector<double>& y_edges() const { return y_edges_; }

  double mass(int ix, int iy) const { return normalize(quarters_[index(ix, iy)]); }
  double overflow_mass() const { return normalize(overflow_); }
  bool has_overflow() const { return overflow_ > 0; }

  double total_mass() const {
    double acc = overflow_mass();
    for (int iy = 0; iy < ny_; ++iy)
      for (int ix = 0; ix < nx_; ++ix) acc += mass(ix, iy);
    return acc;
  }

 private:
  std::size_t index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * static_cast<std::size_t>(nx_) +
           static_cast<std::size_t>(ix);
  }
  double normalize(std::uint64_t q) const {
    return n_points_ == 0 ? 0.0 : static_cast<double>(q) / (4.0 * static_cast<double>(n_points_));
  }

  Bounds bounds_;
  int nx_, ny_;
  std::vector<double> x_edges_, y_edges_;
  std::vector<std::uint64_t> quarters_;
  std::uint64_t overflow_ = 0;
  std::size_t n_points_ = 0;
};

inline SpectralHistogram histogram2d(std::span<const Complex> points, Bounds bounds, int nx,
                                     int ny) {
  if (nx < 1 || ny < 1) throw ArgumentError("histogram2d: need at least one bin per axis");
  if (!(bounds.x_hi > bounds.x_lo) || !(bounds.y_hi > bounds.y_lo)) {
    throw ArgumentError("histogram2d: empty bounds");
  }
  SpectralHistogram h(bounds, nx, ny);
  for (const auto& p : points) h.add(p);
  return h;
}

/// Midpoint rule with sub x sub points for the law's mass in a rectangle.
inline double cell_mass(const EllipticLaw& law, double x0, double x1, double y0, double y1,
                        int sub = 4) {
  const double dx = (x1 - x0) / sub;
  const double dy = (y1 - y0) / sub;
  double acc = 0.0;
  for (int i = 0; i < sub; ++i) {
    for (int j = 0; j < sub; ++j) {
      acc += elliptic_density(law, x0 + (i + 0.5) * dx, y0 + (j + 0.5) * dy);
    }
  }
  return acc * dx * dy;
}

/// max over cells of |empirical mass - law mass|.
inline double discrepancy(const SpectralHistogram& h, const EllipticLaw& law) {
  double worst = 0.0;
  const auto& xe = h.x_edges();
  const auto& ye = h.y_edges();
  for (int iy = 0; iy < h.ny(); ++iy) {
    for (int ix = 0; ix < h.nx(); ++ix) {
      const double expected =
          cell_mass(law, xe[static_cast<std::size_t>(ix)], xe[static_cast<std::size_t>(ix) + 1],
                    ye[static_cast<std::size_t>(iy)], ye[static_cast<std::size_t>(iy) + 1]);
      worst = std::max(worst, std::abs(h.mass(ix, iy) - expected));
    }
  }
  return worst;
}

//---------------------------------------------------------------------------//
// Logarithmic potentials
//---------------------------------------------------------------------------//

/// U(z) = -(1/n) sum log|lambda_i - z| computed two ways.
struct EmpiricalPotential {
  double via_eigenvalues = 0.0;
  double via_singular_values = 0.0;
  bool infinite = false;  ///< a singular value was exactly zero

  double value() const { return via_singular_values; }
  double path_difference() const { return std::abs(via_eigenvalues - via_singular_values); }
};

inline EmpiricalPotential log_potential_empirical(const ComplexSpectrum& eig,
                                                  const SingularSpectrum& sv) {
  const double n = static_cast<double>(sv.size());
  EmpiricalPotential out;
  out.via_singular_values = -log_determinant(sv) / n;
  out.via_eigenvalues = -log_determinant_from_eigenvalues(eig, sv.z) / n;
  out.infinite = std::isinf(out.via_singular_values);
  return out;
}

inline EmpiricalPotential log_potential_empirical(const MatrixSample& m, Complex z) {
  return log_potential_empirical(eigenvalues(m), singular_values(m, z));
}

/// Empirical vs limit vs reference potential at one shift.
struct PotentialReport {
  Complex z;
  double u_empirical = 0.0;
  double u_limit = 0.0;
  double u_reference = 0.0;
  bool empirical_infinite = false;

  double limit_residual() const { return std::abs(u_limit - u_reference); }
  double empirical_residual() const { return std::abs(u_empirical - u_reference); }
};

//---------------------------------------------------------------------------//
/*!
 * U(z) = -int log|z - w| g(w) dA(w) for the uniform law on the ellipse.
 *
 * Uses the map w = ((1+rho) r cos t, (1-rho) r sin t), under which the law
 * becomes r dr dt / pi on the unit disk. The integrand is singular only where
 * the level ellipse of radius r passes through z, so both the r and the t
 * panels are graded geometrically toward z's elliptic coordinates.
 */
inline double reference_potential(const EllipticLaw& law, Complex z) {
  static const quadrature::GaussLegendre rule(16);
  const double a = law.semi_axis_x();
  const double b = law.semi_axis_y();
  const double zu = z.real() / a;
  const double zv = z.imag() / b;
  const double rz = std::hypot(zu, zv);
  const double tz = std::atan2(zv, zu);

  auto inner = [&](double r) {
    const double gap = std::max(std::abs(r - rz), 1e-15);
    const int levels = std::clamp(static_cast<int>(std::log2(std::numbers::pi / gap)) + 3, 1, 52);
    const auto panels = quadrature::graded_panels(tz - std::numbers::pi, tz + std::numbers::pi,
                                                  tz, levels);
    return quadrature::integrate_panels(
        [&](double t) {
          const Complex w{a * r * std::cos(t), b * r * std::sin(t)};
          return std::log(std::abs(z - w));
        },
        panels, rule);
  };

  const int r_levels = rz <= 1.5 ? 42 : 4;
  const auto r_panels = quadrature::graded_panels(0.0, 1.0, rz, r_levels);
  const double outer =
      quadrature::integrate_panels([&](double r) { return r * inner(r); }, r_panels, rule);
  return -outer / std::numbers::pi;
}

//---------------------------------------------------------------------------//
// Singular-value diagnostics
//---------------------------------------------------------------------------//

struct LogMomentDiagnostics {
  double moment_p = 0.0;          ///< (1/n) sum s_i^p
  double tail_p_above_t = 0.0;    ///< (1/n) sum_{s_i > t} s_i^p
  double log_tail_above_t = 0.0;  ///< (1/n) sum_{s_i > t} log s_i
  double moment_neg_q = 0.0;      ///< (1/n) sum s_i^{-q}; +inf if some s_i == 0
  bool neg_moment_infinite = false;
};

inline LogMomentDiagnostics log_moment_diagnostics(const SingularSpectrum& sv, double p, double q,
                                                   double t) {
  if (!(p > 0.0)) throw ArgumentError("log_moment_diagnostics: p must be > 0");
  if (!(q > 0.0 && q < 1.0)) throw ArgumentError("log_moment_diagnostics: q must be in (0,1)");
  if (!(t > 0.0)) throw ArgumentError("log_moment_diagnostics: t must be > 0");
  if (sv.values.empty()) throw ArgumentError("log_moment_diagnostics: empty spectrum");
  LogMomentDiagnostics d;
  for (double s : sv.values) {
    const double sp = std::pow(s, p);
    d.moment_p += sp;
    if (s > t) {
      d.tail_p_above_t += sp;
      d.log_tail_above_t += std::log(s);
    }
    if (s == 0.0) {
      d.neg_moment_infinite = true;
    } else {
      d.moment_neg_q += std::pow(s, -q);
    }
  }
  const double n = static_cast<double>(sv.size());
  d.moment_p /= n;
  d.tail_p_above_t /= n;
  d.log_tail_above_t /= n;
  d.moment_neg_q = d.neg_moment_infinite ? std::numeric_limits<double>::infinity()
                                         : d.moment_neg_q / n;
  return d;
}

struct ProfileCheck {
  bool holds = true;
  int worst_index = 0;           ///< i minimizing s_{n-i} - c i/n (0 if range empty)
  double worst_margin = std::numeric_limits<double>::infinity();
};

/// s_{n-i} >= c i/n for every integer i in [n^{1-gamma}, n-1] (s_1 largest).
inline ProfileCheck sv_profile_check(const SingularSpectrum& sv, double c = 0.01,
                                     double gamma = 0.1) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ArgumentError("sv_profile_check: gamma must be in (0,1)");
  const int n = static_cast<int>(sv.size());
  ProfileCheck r;
  const int first = static_cast<int>(std::ceil(std::pow(static_cast<double>(n), 1.0 - gamma)));
  for (int i = std::max(first, 1); i <= n - 1; ++i) {
    // s_{n-i} in 1-based order is values[n-i-1].
    const double s = sv.values[static_cast<std::size_t>(n - i - 1)];
    const double margin = s - c * static_cast<double>(i) / n;
    if (margin < r.worst_margin) {
      r.worst_margin = margin;
      r.worst_index = i;
    }
  }
  r.holds = !(r.worst_margin < 0.0);
  return r;
}

struct LargestSvCheck {
  bool holds = true;
  double ratio = 0.0;  ///< s_1(X) / sqrt(n)
  double bound = 0.0;  ///< sqrt(2(1+rho)) + sqrt(2(1-rho)) + margin
};

inline double largest_sv_bound(double rho, double margin) {
  return std::sqrt(2.0 * (1.0 + rho)) + std::sqrt(2.0 * (1.0 - rho)) + margin;
}

inline LargestSvCheck largest_sv_check(const MatrixSample& m, double margin) {
  if (!(margin > 0.0)) throw ArgumentError("largest_sv_check: margin must be > 0");
  LargestSvCheck r;
  const auto sv = singular_values(m, Complex{0.0, 0.0});
  r.ratio = sv.values.empty() ? 0.0 : sv.values.front();
  r.bound = largest_sv_bound(m.spec.rho, margin);
  r.holds = r.ratio <= r.bound;
  return r;
}

}  // namespace elliptic
