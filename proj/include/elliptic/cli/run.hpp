// Copyright 2026 The elliptic Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "elliptic/cli/config.hpp"
#include "elliptic/elliptic.hpp"

#ifndef ELLIPTIC_GIT_REV
#define ELLIPTIC_GIT_REV "unknown"
#endif

namespace elliptic::cli {

inline std::string artifact_version() {
  return std::string(kVersion) + "+" + ELLIPTIC_GIT_REV;
}

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

inline File open_output(const std::filesystem::path& p) {
  File f(std::fopen(p.string().c_str(), "wb"));
  if (!f) throw ConfigError("out: cannot write " + p.string());
  return f;
}

/// Shortest text that round-trips the double.
inline std::string num(double v) {
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& p, const std::string& hash, const char* header)
      : file_(open_output(p)) {
    std::fprintf(file_.get(), "# cfg=%s\n", hash.c_str());
    if (header != nullptr) std::fprintf(file_.get(), "%s\n", header);
  }

  template <typename... T>
  void row(const T&... cells) {
    std::string line;
    ((line += cell(cells), line += ','), ...);
    line.back() = '\n';
    std::fputs(line.c_str(), file_.get());
  }

 private:
  static std::string cell(double v) { return num(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(bool v) { return v ? "1" : "0"; }
  static std::string cell(const std::string& v) { return v; }

  File file_;
};

inline void write_json(const std::filesystem::path& p, const Json& j) {
  auto f = open_output(p);
  const std::string text = j.dump(2) + "\n";
  std::fputs(text.c_str(), f.get());
}

inline Json complex_json(Complex v) { return Json::array({v.real(), v.imag()}); }

inline std::string trial_location(std::uint32_t draw, const std::string& inner) {
  return "trial=" + std::to_string(draw) + (inner.empty() ? "" : " " + inner);
}

/// Runs body(k) for every trial k, tagging numerical failures with the trial.
template <typename Body>
void for_trials(const RunConfig& c, Body&& body) {
  parallel_for(static_cast<std::size_t>(c.trials), c.threads, [&](std::size_t k) {
    const auto draw = c.draw + static_cast<std::uint32_t>(k);
    try {
      body(k, draw);
    } catch (const NumericalError& e) {
      throw NumericalError(e.message(), trial_location(draw, e.location()), e.trace());
    }
  });
}

inline LimitCurveOptions limit_options(const RunConfig& c) {
  LimitCurveOptions o;
  o.dx = c.dx;
  o.x_margin = c.x_max ? *c.x_max - std::abs(c.z) : 2.5;
  o.v_min = c.v_min;
  o.solver.tol = c.tol;
  o.threads = c.threads;
  return o;
}

}  // namespace detail

/// Files plus the JSON report of one run.
struct RunResult {
  int exit_code = 0;
  Json report;
  std::vector<std::filesystem::path> files;
};

class Runner {
 public:
  explicit Runner(RunConfig c)
      : c_(std::move(c)), hash_(config_hash(c_)), dir_(c_.out) {}

  RunResult run() {
    RunResult r;
    Json payload;
    try {
      std::filesystem::create_directories(dir_);
      switch (c_.command) {
        case Command::kSample: payload = sample(); break;
        case Command::kSpectrum: payload = spectrum(); break;
        case Command::kEllipse: payload = ellipse(); break;
        case Command::kLimit: payload = limit(); break;
        case Command::kLsv: payload = lsv(); break;
        case Command::kPotential: payload = potential(); break;
        case Command::kAudit: payload = audit(); break;
      }
    } catch (const ConfigError& e) {
      r.exit_code = 2;
      payload = {{"error", {{"kind", "config"}, {"message", e.what()}}}};
    } catch (const NumericalError& e) {
      r.exit_code = 3;
      payload = {{"error",
                  {{"kind", "numerical"},
                   {"message", e.message()},
                   {"location", e.location()},
                   {"trace", e.trace()}}}};
    } catch (const Error& e) {
      r.exit_code = 3;
      payload = {{"error", {{"kind", "failure"}, {"message", e.what()}}}};
    } catch (const std::filesystem::filesystem_error& e) {
      r.exit_code = 2;
      payload = {{"error", {{"kind", "config"}, {"message", std::string("out: ") + e.what()}}}};
    }

    r.report = envelope(std::move(payload));
    r.files = files_;
    try {
      const auto path = dir_ / (std::string(to_string(c_.command)) + ".json");
      detail::write_json(path, r.report);
      r.files.push_back(path);
    } catch (const ConfigError&) {
      if (r.exit_code == 0) r.exit_code = 2;
    }
    return r;
  }

 private:
  Json envelope(Json payload) const {
    Json j;
    j["cfg_hash"] = hash_;
    j["version"] = artifact_version();
    j["command"] = std::string(to_string(c_.command));
    j["config"] = to_json(c_, false);
    j["seed"] = c_.ensemble.seed;
    j["rho"] = c_.ensemble.rho;
    j["n"] = c_.ensemble.n;
    j["trials"] = c_.trials;
    j["payload"] = std::move(payload);
    return j;
  }

  detail::CsvWriter csv(const std::string& name, const char* header) {
    files_.push_back(dir_ / name);
    return detail::CsvWriter(files_.back(), hash_, header);
  }

  Json sample() {
    const auto m = sample_matrix(c_.ensemble, c_.draw);
    auto w = csv("sample_matrix.csv", nullptr);
    const auto n = m.entries.rows();
    std::string line;
    for (Eigen::Index i = 0; i < n; ++i) {
      line.clear();
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j) line += ',';
        line += detail::num(m.entries(i, j));
      }
      w.row(line);
    }
    return {{"draw", c_.draw}, {"fingerprint", elliptic::detail::fingerprint(m.entries)}};
  }

  Json spectrum() {
    const auto m = sample_matrix(c_.ensemble, c_.draw);
    const auto eig = eigenvalues(m);
    const auto sv = singular_values(m, c_.z);
    {
      auto w = csv("spectrum_eigenvalues.csv", "re,im");
      for (const auto& l : eig.values) w.row(l.real(), l.imag());
    }
    {
      auto w = csv("spectrum_singular_values.csv", "s");
      for (double s : sv.values) w.row(s);
    }
    const auto pot = log_potential_empirical(eig, sv);
    return {{"draw", c_.draw},
            {"z", detail::complex_json(c_.z)},
            {"s_max", sv.values.front()},
            {"s_min", sv.values.back()},
            {"u_empirical", pot.infinite ? Json(nullptr) : Json(pot.value())},
            {"potential_path_difference", pot.path_difference()}};
  }

  Json ellipse() {
    std::vector<ComplexSpectrum> spectra(static_cast<std::size_t>(c_.trials));
    detail::for_trials(c_, [&](std::size_t k, std::uint32_t draw) {
      spectra[k] = eigenvalues(sample_matrix(c_.ensemble, draw));
    });
    std::vector<Complex> pooled;
    pooled.reserve(spectra.size() * static_cast<std::size_t>(c_.ensemble.n));
    for (const auto& s : spectra) pooled.insert(pooled.end(), s.values.begin(), s.values.end());

    const EllipticLaw law(c_.ensemble.rho);
    const auto cov = coverage_report(pooled, law, c_.inflation);
    Bounds b = Bounds::default_for(c_.ensemble.rho);
    if (c_.bounds) b = {(*c_.bounds)[0], (*c_.bounds)[1], (*c_.bounds)[2], (*c_.bounds)[3]};
    const auto hist = histogram2d(pooled, b, c_.bins, c_.bins);
    {
      auto w = csv("ellipse_histogram.csv", "x_lo,x_hi,y_lo,y_hi,mass");
      for (int ix = 0; ix < hist.nx(); ++ix) {
        for (int iy = 0; iy < hist.ny(); ++iy) {
          w.row(hist.x_edges()[static_cast<std::size_t>(ix)],
                hist.x_edges()[static_cast<std::size_t>(ix) + 1],
                hist.y_edges()[static_cast<std::size_t>(iy)],
                hist.y_edges()[static_cast<std::size_t>(iy) + 1], hist.mass(ix, iy));
        }
      }
    }
    return {{"fraction_inside", cov.fraction_inside},
            {"quadrant_masses", cov.quadrant_masses},
            {"discrepancy", discrepancy(hist, law)},
            {"overflow_mass", hist.overflow_mass()},
            {"points", pooled.size()}};
  }

  Json limit() {
    const auto opt = detail::limit_options(c_);
    const auto sol = limit_grid(c_.z, c_.ensemble.rho, opt);
    {
      auto w = csv("limit_grid.csv", "x,v,re_s,im_s,re_t,im_t,re_u,im_u,res1,res2,res3");
      for (std::size_t ix = 0; ix < sol.x.size(); ++ix) {
        for (std::size_t iv = 0; iv < sol.v.size(); ++iv) {
          const auto& t = sol.at(ix, iv);
          w.row(sol.x[ix], sol.v[iv], t.s.real(), t.s.imag(), t.t.real(), t.t.imag(), t.u.real(),
                t.u.imag(), t.residuals[0], t.residuals[1], t.residuals[2]);
        }
      }
    }
    const auto curve = invert_density(sol);
    {
      auto w = csv("limit_density.csv", "x,f");
      for (std::size_t i = 0; i < curve.grid.size(); ++i) w.row(curve.grid[i], curve.density[i]);
    }
    Json out = {{"z", detail::complex_json(c_.z)},
                {"total_mass", curve.total_mass},
                {"density_at_zero", curve.density.front()},
                {"low_confidence_points", curve.low_confidence_count()},
                {"u_reference", reference_potential(EllipticLaw(c_.ensemble.rho), c_.z)}};
    if (std::abs(curve.total_mass - 1.0) <= 1e-2) {
      const auto lim = limit_log_potential(curve);
      out["u_limit"] = lim.value;
      out["first_cell_flagged"] = lim.flagged;
    } else {
      out["u_limit"] = nullptr;
    }
    return out;
  }

  Json lsv() {
    const auto batch = least_singular_mc(c_.ensemble, c_.z, c_.trials, c_.K, c_.threads);
    {
      auto w = csv("lsv_batch.csv", "trial,scaled_min,norm_ok");
      for (std::size_t k = 0; k < batch.scaled_minima.size(); ++k) {
        w.row(batch.trial_ids[k], batch.scaled_minima[k], static_cast<bool>(batch.norm_ok[k]));
      }
    }
    Json out = {{"z", detail::complex_json(c_.z)},
                {"K", c_.K},
                {"failed", batch.failed},
                {"norm_exceedances", batch.norm_exceedances}};
    if (!batch.scaled_minima.empty()) {
      out["median_scaled_min"] = median(batch.scaled_minima);
      out["tail_at_epsilon"] = empirical_tail(batch, c_.epsilon);
    }
    if (batch.scaled_minima.size() >= 100) {
      const auto est = levy_concentration(batch.scaled_minima, c_.epsilon);
      const auto path = dir_ / "lsv_concentration.json";
      detail::write_json(path, {{"cfg_hash", hash_},
                                {"epsilon", est.epsilon},
                                {"estimate", est.estimate},
                                {"samples", est.samples}});
      files_.push_back(path);
      out["concentration"] = est.estimate;
    }
    return out;
  }

  Json potential() {
    std::vector<EmpiricalPotential> pots(static_cast<std::size_t>(c_.trials));
    detail::for_trials(c_, [&](std::size_t k, std::uint32_t draw) {
      pots[k] = log_potential_empirical(sample_matrix(c_.ensemble, draw), c_.z);
    });
    double sum = 0.0;
    double worst_path = 0.0;
    int finite = 0;
    {
      auto w = csv("potential_trials.csv", "trial,u_eigenvalues,u_singular_values");
      for (std::size_t k = 0; k < pots.size(); ++k) {
        w.row(static_cast<int>(c_.draw + k), pots[k].via_eigenvalues, pots[k].via_singular_values);
        if (pots[k].infinite) continue;
        sum += pots[k].value();
        worst_path = std::max(worst_path, pots[k].path_difference());
        ++finite;
      }
    }
    const auto curve = limit_density(c_.z, c_.ensemble.rho, detail::limit_options(c_));
    const auto lim = limit_log_potential(curve);
    PotentialReport rep;
    rep.z = c_.z;
    rep.u_empirical = finite ? sum / finite : std::nan("");
    rep.u_limit = lim.value;
    rep.u_reference = reference_potential(EllipticLaw(c_.ensemble.rho), c_.z);
    rep.empirical_infinite = finite < c_.trials;
    return {{"z", detail::complex_json(c_.z)},
            {"u_empirical", finite ? Json(rep.u_empirical) : Json(nullptr)},
            {"u_limit", rep.u_limit},
            {"u_reference", rep.u_reference},
            {"empirical_infinite", rep.empirical_infinite},
            {"limit_residual", rep.limit_residual()},
            {"empirical_residual", finite ? Json(rep.empirical_residual()) : Json(nullptr)},
            {"max_path_difference", worst_path},
            {"first_cell_flagged", lim.flagged}};
  }

  Json audit() {
    std::vector<MatrixSample> samples;
    samples.reserve(static_cast<std::size_t>(c_.trials));
    for (int k = 0; k < c_.trials; ++k) {
      samples.push_back(sample_matrix(c_.ensemble, c_.draw + static_cast<std::uint32_t>(k)));
    }
    const auto rep = moment_audit(samples);
    auto est = [](const MomentEstimate& e) {
      return Json{{"value", e.value}, {"std_error", e.std_error}, {"target", e.target},
                  {"flagged", e.flagged}};
    };
    return {{"pairs", rep.pairs},
            {"mean", est(rep.mean)},
            {"variance", est(rep.variance)},
            {"pair_correlation", est(rep.pair_correlation)},
            {"fourth_moment", est(rep.fourth_moment)},
            {"any_flagged", rep.any_flagged()}};
  }

  RunConfig c_;
  std::string hash_;
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> files_;
};

/// Executes the configured command. Wall time goes to `log`, never into files.
inline RunResult run(const RunConfig& config, std::ostream* log = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  auto r = Runner(config).run();
  if (log != nullptr) {
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    *log << to_string(config.command) << ": exit " << r.exit_code << ", wall " << dt.count()
         << " s\n";
  }
  return r;
}

}  // namespace elliptic::cli
