// Copyright 2026 The elliptic Authors.
// SPDX-License-Identifier: Apache-2.0

// Limiting Stieltjes-transform system of the Hermitized elliptic ensemble.
//
// For alpha in the upper half-plane the limit s of (1/2n) Tr (V(z) - alpha)^{-1}
// and the off-diagonal block traces t, u solve
//
//   1 + alpha s + s^2 = -(rho/2) t^2 - (z/2) t - (rho/2) u^2 - (conj z/2) u
//   alpha t = -s t - rho s u - conj(z) s
//   alpha u = -s u - rho s t - z s
//
// The last two equations are linear in (t, u) and give t, u in closed form
// as functions of s. Since z t + rho t^2 = conj(z) u + rho u^2 on solutions,
// the first equation collapses to the scalar equation
//
//   Phi(s) = 1 + alpha s + s^2 + rho t(s)^2 + z t(s) = 0,
//
// which is solved by Newton continuation from large Im alpha.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "elliptic/empirics.hpp"
#include "elliptic/ensemble.hpp"
#include "elliptic/error.hpp"
#include "elliptic/parallel.hpp"

namespace elliptic {

struct SolverOptions {
  double tol = 1e-12;
  int max_iter = 200;
  double ladder_factor = 0.8;  ///< ratio between consecutive continuation rungs
  double damping = 0.5;        ///< step shrink factor on residual increase
  double guard = 1e-14;        ///< |alpha + s| and |Delta| floor
};

struct StieltjesTriple {
  Complex alpha;
  Complex z;
  double rho = 0.0;
  Complex s;
  Complex t;
  Complex u;
  std::array<double, 3> residuals{};  ///< |raw equation 1|, |2|, |3|
  int iterations = 0;
};

namespace detail {

inline std::string format_point(Complex alpha, Complex z) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "alpha=(%.6g,%.6g) z=(%.6g,%.6g)", alpha.real(), alpha.imag(),
                z.real(), z.imag());
  return buf;
}

struct Closure {
  Complex t;
  Complex dt;  ///< dt/ds
  bool singular = false;
};

/// t(s) = [rho z s^2 - conj(z) s (alpha+s)] / [(alpha+s)^2 - rho^2 s^2].
inline Closure off_diagonal_trace(Complex s, Complex alpha, Complex z, double rho, double guard) {
  const Complex a = alpha + s;
  const Complex d = a * a - rho * rho * s * s;
  if (std::abs(a) < guard || std::abs(d) < guard * std::abs(a)) return {{}, {}, true};
  const Complex zc = std::conj(z);
  const Complex num = rho * z * s * s - zc * s * a;
  const Complex dnum = 2.0 * rho * z * s - zc * (a + s);
  const Complex dden = 2.0 * a - 2.0 * rho * rho * s;
  return {num / d, (dnum * d - num * dden) / (d * d), false};
}

struct Residual {
  Complex phi;
  Complex dphi;
  Complex t;
  bool singular = false;
};

inline Residual reduced_residual(Complex s, Complex alpha, Complex z, double rho, double guard) {
  const auto c = off_diagonal_trace(s, alpha, z, rho, guard);
  if (c.singular) return {{}, {}, {}, true};
  const Complex phi = 1.0 + alpha * s + s * s + rho * c.t * c.t + z * c.t;
  const Complex dphi = alpha + 2.0 * s + 2.0 * rho * c.t * c.dt + z * c.dt;
  return {phi, dphi, c.t, false};
}

}  // namespace detail

/// Absolute residuals of the three unreduced equations at (s, t, u).
inline std::array<double, 3> system_residuals(Complex alpha, Complex z, double rho, Complex s,
                                              Complex t, Complex u) {
  const Complex zc = std::conj(z);
  const Complex r1 = 1.0 + alpha * s + s * s + 0.5 * rho * t * t + 0.5 * z * t +
                     0.5 * rho * u * u + 0.5 * zc * u;
  const Complex r2 = alpha * t + s * t + rho * s * u + zc * s;
  const Complex r3 = alpha * u + s * u + rho * s * t + z * s;
  return {std::abs(r1), std::abs(r2), std::abs(r3)};
}

namespace detail {

/// Damped Newton on Phi from `s0` at fixed alpha. Steps leaving the upper
/// half-plane or increasing |Phi| are shortened by opts.damping.
inline StieltjesTriple newton_at(Complex alpha, Complex z, double rho, Complex s0,
                                 const SolverOptions& opts) {
  Complex s = s0;
  auto r = reduced_residual(s, alpha, z, rho, opts.guard);
  if (r.singular) throw NumericalError("singular closure at start point", format_point(alpha, z));
  int iter = 0;
  for (; iter < opts.max_iter && std::abs(r.phi) > opts.tol; ++iter) {
    if (r.dphi == Complex{0.0, 0.0}) {
      throw NumericalError("zero derivative in Newton iteration", format_point(alpha, z));
    }
    const Complex step = -r.phi / r.dphi;
    double lambda = 1.0;
    bool accepted = false;
    for (int k = 0; k < 60; ++k, lambda *= opts.damping) {
      const Complex trial = s + lambda * step;
      if (!(trial.imag() > 0.0)) continue;
      const auto rt = reduced_residual(trial, alpha, z, rho, opts.guard);
      if (rt.singular) continue;
      if (std::abs(rt.phi) < std::abs(r.phi)) {
        s = trial;
        r = rt;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;  // stagnated at round-off; judged below
  }

  StieltjesTriple out;
  out.alpha = alpha;
  out.z = z;
  out.rho = rho;
  out.s = s;
  out.t = r.t;
  const auto cu = off_diagonal_trace(s, alpha, std::conj(z), rho, opts.guard);
  out.u = cu.t;
  out.residuals = system_residuals(alpha, z, rho, out.s, out.t, out.u);
  out.iterations = iter;
  return out;
}

inline bool converged(const StieltjesTriple& t, double tol) {
  return std::isfinite(t.s.real()) && std::isfinite(t.s.imag()) &&
         std::max({t.residuals[0], t.residuals[1], t.residuals[2]}) <= tol;
}

/// Rungs strictly between v_from and v_to (v_from > v_to), spaced by `factor`.
inline std::vector<double> intermediate_rungs(double v_from, double v_to, double factor) {
  std::vector<double> out;
  for (double v = v_from * factor; v > v_to; v *= factor) out.push_back(v);
  return out;
}

inline double continuation_top(Complex alpha, Complex z) {
  return std::max(10.0, 4.0 * (1.0 + std::abs(z) + std::abs(alpha.real())));
}

/// Follows the root from Im alpha = v_from to v_to at fixed Re alpha.
inline StieltjesTriple continue_down(double x, double v_from, double v_to, Complex s_start,
                                     Complex z, double rho, const SolverOptions& opts) {
  std::vector<std::pair<double, Complex>> trail;
  Complex s = s_start;
  auto rungs = intermediate_rungs(v_from, v_to, opts.ladder_factor);
  rungs.push_back(v_to);
  StieltjesTriple last;
  for (double v : rungs) {
    const Complex alpha{x, v};
    try {
      last = newton_at(alpha, z, rho, s, opts);
    } catch (const NumericalError& e) {
      std::vector<std::string> trace;
      for (const auto& [tv, ts] : trail) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "v=%.6g s=(%.12g,%.12g)", tv, ts.real(), ts.imag());
        trace.emplace_back(buf);
      }
      throw NumericalError(e.message(), format_point(alpha, z), std::move(trace));
    }
    if (!converged(last, opts.tol)) {
      std::vector<std::string> trace;
      for (const auto& [tv, ts] : trail) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "v=%.6g s=(%.12g,%.12g)", tv, ts.real(), ts.imag());
        trace.emplace_back(buf);
      }
      char msg[128];
      std::snprintf(msg, sizeof msg, "Newton did not reach tol (residual %.3g after %d iterations)",
                    std::max({last.residuals[0], last.residuals[1], last.residuals[2]}),
                    last.iterations);
      throw NumericalError(msg, format_point(alpha, z), std::move(trace));
    }
    s = last.s;
    trail.emplace_back(v, s);
  }
  if (last.s.imag() < -opts.tol) {
    throw BranchError("root left the upper half-plane", format_point(last.alpha, z));
  }
  return last;
}

}  // namespace detail

//---------------------------------------------------------------------------//
/*!
 * Solves the limiting system at one (alpha, z). The root is tracked from
 * Im alpha large, where s ~ -1/alpha is the unique decaying solution, down a
 * geometric ladder to the requested Im alpha.
 */
inline StieltjesTriple solve_point(Complex alpha, Complex z, double rho,
                                   const SolverOptions& opts = {}) {
  if (!(alpha.imag() > 0.0)) throw ArgumentError("solve_point: Im alpha must be > 0");
  validate_rho(rho);
  if (!(opts.tol > 0.0)) throw ArgumentError("solve_point: tol must be > 0");
  const double top = std::max(detail::continuation_top(alpha, z), alpha.imag());
  const Complex start_alpha{alpha.real(), top};
  auto first = detail::newton_at(start_alpha, z, rho, -1.0 / start_alpha, opts);
  if (!detail::converged(first, opts.tol)) {
    throw NumericalError("no convergence at top of continuation ladder",
                         detail::format_point(start_alpha, z));
  }
  if (top == alpha.imag()) return first;
  return detail::continue_down(alpha.real(), top, alpha.imag(), first.s, z, rho, opts);
}

/// Geometric ladder v_max, v_max*factor, ... ending exactly at v_min.
inline std::vector<double> geometric_ladder(double v_max = 1.0, double v_min = 1e-4,
                                            double factor = 0.8) {
  if (!(v_max > v_min && v_min > 0.0 && factor > 0.0 && factor < 1.0)) {
    throw ArgumentError("geometric_ladder: need v_max > v_min > 0 and factor in (0,1)");
  }
  std::vector<double> out;
  for (double v = v_max; v > v_min * (1.0 + 1e-9); v *= factor) out.push_back(v);
  out.push_back(v_min);
  return out;
}

/// Solutions on a grid of Re alpha values, at every rung of a v-ladder.
struct GridSolution {
  Complex z;
  double rho = 0.0;
  std::vector<double> x;
  std::vector<double> v;
  std::vector<StieltjesTriple> triples;  ///< x-major: triples[ix * v.size() + iv]

  const StieltjesTriple& at(std::size_t ix, std::size_t iv) const {
    return triples[ix * v.size() + iv];
  }
};

inline GridSolution solve_grid(Complex z, double rho, std::span<const double> x_grid,
                               std::span<const double> v_ladder, const SolverOptions& opts = {},
                               unsigned threads = 1) {
  validate_rho(rho);
  if (v_ladder.empty()) throw ArgumentError("solve_grid: empty v ladder");
  for (std::size_t i = 1; i < v_ladder.size(); ++i) {
    if (!(v_ladder[i] < v_ladder[i - 1])) {
      throw ArgumentError("solve_grid: v ladder must be strictly decreasing");
    }
  }
  if (!(v_ladder.back() > 0.0)) throw ArgumentError("solve_grid: v ladder must stay positive");
  for (std::size_t i = 1; i < x_grid.size(); ++i) {
    if (!(x_grid[i] > x_grid[i - 1])) throw ArgumentError("solve_grid: x grid must be increasing");
  }

  GridSolution out;
  out.z = z;
  out.rho = rho;
  out.x.assign(x_grid.begin(), x_grid.end());
  out.v.assign(v_ladder.begin(), v_ladder.end());
  const std::size_t nv = v_ladder.size();
  out.triples.resize(x_grid.size() * nv);

  parallel_for(x_grid.size(), threads, [&](std::size_t ix) {
    const double x = x_grid[ix];
    try {
      auto triple = solve_point(Complex{x, v_ladder[0]}, z, rho, opts);
      out.triples[ix * nv] = triple;
      for (std::size_t iv = 1; iv < nv; ++iv) {
        triple = detail::continue_down(x, v_ladder[iv - 1], v_ladder[iv], triple.s, z, rho, opts);
        out.triples[ix * nv + iv] = triple;
      }
    } catch (const BranchError&) {
      throw;
    } catch (const NumericalError& e) {
      char where[96];
      std::snprintf(where, sizeof where, "x=%.6g ", x);
      throw NumericalError(e.message(), where + e.location(), e.trace());
    }
  });
  return out;
}

//---------------------------------------------------------------------------//
// Stieltjes inversion
//---------------------------------------------------------------------------//

/// Density f_F(x) = Im s(x + i0+) / pi of the symmetrized law F, on the
/// solution's full x grid.
struct InvertedDensity {
  std::vector<double> x;
  std::vector<double> f;
  std::vector<bool> low_confidence;
};

inline constexpr double kExtrapolationDisagreement = 1e-2;

/// Linear Richardson extrapolation to v = 0 from the two smallest rungs.
inline InvertedDensity stieltjes_inversion(const GridSolution& sol) {
  if (sol.v.size() < 2) throw ArgumentError("stieltjes_inversion: need at least two ladder rungs");
  const std::size_t nv = sol.v.size();
  const double v1 = sol.v[nv - 2];
  const double v2 = sol.v[nv - 1];
  InvertedDensity out;
  out.x = sol.x;
  out.f.resize(sol.x.size());
  out.low_confidence.resize(sol.x.size());
  for (std::size_t ix = 0; ix < sol.x.size(); ++ix) {
    const double f1 = sol.at(ix, nv - 2).s.imag() / std::numbers::pi;
    const double f2 = sol.at(ix, nv - 1).s.imag() / std::numbers::pi;
    const double f0 = (v1 * f2 - v2 * f1) / (v1 - v2);
    out.f[ix] = std::max(0.0, f0);
    out.low_confidence[ix] = std::abs(f1 - f2) > kExtrapolationDisagreement;
  }
  return out;
}

/// Density of nu_z (the singular-value law) on x >= 0: twice the density of
/// its symmetrization.
struct DensityCurve {
  Complex z;
  double rho = 0.0;
  std::vector<double> grid;
  std::vector<double> density;
  std::vector<bool> low_confidence;
  double total_mass = 0.0;

  std::size_t low_confidence_count() const {
    return static_cast<std::size_t>(std::count(low_confidence.begin(), low_confidence.end(), true));
  }
};

inline double trapezoid(std::span<const double> x, std::span<const double> f) {
  double acc = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) acc += 0.5 * (x[i] - x[i - 1]) * (f[i] + f[i - 1]);
  return acc;
}

inline DensityCurve invert_density(const GridSolution& sol) {
  const auto inv = stieltjes_inversion(sol);
  DensityCurve c;
  c.z = sol.z;
  c.rho = sol.rho;
  for (std::size_t i = 0; i < inv.x.size(); ++i) {
    if (inv.x[i] < 0.0) continue;
    c.grid.push_back(inv.x[i]);
    c.density.push_back(2.0 * inv.f[i]);
    c.low_confidence.push_back(inv.low_confidence[i]);
  }
  c.total_mass = trapezoid(c.grid, c.density);
  return c;
}

//---------------------------------------------------------------------------//
// Limiting logarithmic potential
//---------------------------------------------------------------------------//

struct LimitPotential {
  double value = 0.0;
  double first_cell = 0.0;  ///< contribution of [0, x_1]
  bool flagged = false;     ///< first cell carries more than 10% of |value|
};

/// U(z) = -int_0^inf log x nu_z(dx). Trapezoid rule on the grid, except on
/// [0, x_1] where the density is taken linear and the log integrated exactly.
inline LimitPotential limit_log_potential(const DensityCurve& curve) {
  const auto& x = curve.grid;
  const auto& f = curve.density;
  if (x.size() < 2) throw ArgumentError("limit_log_potential: need at least two grid points");
  if (x.front() != 0.0) throw ArgumentError("limit_log_potential: grid must start at x = 0");
  if (std::abs(curve.total_mass - 1.0) > 1e-2) {
    throw PreconditionError("limit_log_potential: density mass " +
                            std::to_string(curve.total_mass) + " is not within 1e-2 of 1");
  }
  const double h = x[1];
  // int_0^h log(x) (f0 + (f1 - f0) x / h) dx
  const double first = f[0] * (h * std::log(h) - h) +
                       (f[1] - f[0]) / h * (0.5 * h * h * std::log(h) - 0.25 * h * h);
  double rest = 0.0;
  for (std::size_t i = 2; i < x.size(); ++i) {
    rest += 0.5 * (x[i] - x[i - 1]) * (std::log(x[i]) * f[i] + std::log(x[i - 1]) * f[i - 1]);
  }
  LimitPotential out;
  out.first_cell = -first;
  out.value = -(first + rest);
  out.flagged = std::abs(out.first_cell) > 0.1 * std::abs(out.value);
  return out;
}

//---------------------------------------------------------------------------//
// Identification of the limit with the elliptic law
//---------------------------------------------------------------------------//

struct LimitCurveOptions {
  double dx = 0.0025;
  double x_margin = 2.5;  ///< grid runs over [0, x_margin + |z|]
  double v_max = 1.0;
  double v_min = 1e-4;
  SolverOptions solver{};
  unsigned threads = 1;
};

inline std::vector<double> uniform_grid(double lo, double hi, double dx) {
  if (!(dx > 0.0) || !(hi >= lo)) throw ArgumentError("uniform_grid: bad range or step");
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / dx + 1e-9)) + 1;
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i) g[i] = lo + static_cast<double>(i) * dx;
  return g;
}

inline GridSolution limit_grid(Complex z, double rho, const LimitCurveOptions& opt = {}) {
  const auto xs = uniform_grid(0.0, opt.x_margin + std::abs(z), opt.dx);
  const auto ladder = geometric_ladder(opt.v_max, opt.v_min, opt.solver.ladder_factor);
  return solve_grid(z, rho, xs, ladder, opt.solver, opt.threads);
}

inline DensityCurve limit_density(Complex z, double rho, const LimitCurveOptions& opt = {}) {
  return invert_density(limit_grid(z, rho, opt));
}

struct ConsistencyRow {
  Complex z;
  double u_limit = 0.0;
  double u_reference = 0.0;
  double abs_diff = 0.0;
  double mass = 0.0;
  bool first_cell_flagged = false;
};

/// Limit-system potential vs the uniform-ellipse potential at each z.
inline std::vector<ConsistencyRow> elliptic_consistency(std::span<const Complex> z_list, double rho,
                                                        const LimitCurveOptions& opt = {}) {
  const EllipticLaw law(rho);
  std::vector<ConsistencyRow> rows;
  rows.reserve(z_list.size());
  for (const auto& z : z_list) {
    const auto curve = limit_density(z, rho, opt);
    const auto lim = limit_log_potential(curve);
    ConsistencyRow r;
    r.z = z;
    r.u_limit = lim.value;
    r.u_reference = reference_potential(law, z);
    r.abs_diff = std::abs(r.u_limit - r.u_reference);
    r.mass = curve.total_mass;
    r.first_cell_flagged = lim.flagged;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace elliptic
