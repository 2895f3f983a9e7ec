// Copyright 2026 The elliptic Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "elliptic/ensemble.hpp"
#include "elliptic/error.hpp"
#include "elliptic/parallel.hpp"

namespace elliptic::cli {

using Json = nlohmann::json;

enum class Command { kSample, kSpectrum, kEllipse, kLimit, kLsv, kPotential, kAudit };

inline constexpr std::array<std::string_view, 7> kCommandNames = {
    "sample", "spectrum", "ellipse", "limit", "lsv", "potential", "audit"};

inline std::string_view to_string(Command c) { return kCommandNames[static_cast<std::size_t>(c)]; }

inline std::optional<Command> parse_command(std::string_view s) {
  for (std::size_t i = 0; i < kCommandNames.size(); ++i) {
    if (kCommandNames[i] == s) return static_cast<Command>(i);
  }
  return std::nullopt;
}

/// Everything a run depends on. `threads` and `out` do not affect results and
/// are left out of the config hash.
struct RunConfig {
  Command command = Command::kEllipse;
  EnsembleSpec ensemble = EnsembleSpec::make(200, 0.5);
  std::complex<double> z{0.0, 0.0};
  int trials = 1;
  std::uint32_t draw = 0;  ///< first draw index
  unsigned threads = default_threads();
  std::string out = ".";

  double tol = 1e-12;
  double inflation = 1.05;
  int bins = 8;
  std::optional<std::array<double, 4>> bounds;  ///< x_lo, x_hi, y_lo, y_hi
  double K = 2.0;
  double epsilon = 0.1;
  std::optional<double> x_max;  ///< default 2.5 + |z|
  double dx = 0.0025;
  double v_min = 1e-4;
  double margin = 0.3;

  bool operator==(const RunConfig&) const = default;
};

inline Json to_json(const RunConfig& c, bool include_runtime = true) {
  Json j;
  j["command"] = std::string(to_string(c.command));
  j["n"] = c.ensemble.n;
  j["rho"] = c.ensemble.rho;
  j["pair"] = std::string(to_string(c.ensemble.pair_dist));
  j["diag"] = std::string(to_string(c.ensemble.diag_dist));
  j["seed"] = c.ensemble.seed;
  j["z"] = {c.z.real(), c.z.imag()};
  j["trials"] = c.trials;
  j["draw"] = c.draw;
  j["tol"] = c.tol;
  j["inflation"] = c.inflation;
  j["bins"] = c.bins;
  j["bounds"] = c.bounds ? Json(*c.bounds) : Json(nullptr);
  j["K"] = c.K;
  j["epsilon"] = c.epsilon;
  j["x_max"] = c.x_max ? Json(*c.x_max) : Json(nullptr);
  j["dx"] = c.dx;
  j["v_min"] = c.v_min;
  j["margin"] = c.margin;
  if (include_runtime) {
    j["threads"] = c.threads;
    j["out"] = c.out;
  }
  return j;
}

/// FNV-1a over the canonical (key-sorted) JSON of the result-affecting fields.
inline std::string config_hash(const RunConfig& c) {
  const std::string text = to_json(c, false).dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace detail {

template <typename T>
T get_as(const Json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string(key) + ": wrong type");
  }
}

inline std::complex<double> parse_complex(std::string_view text, const char* key) {
  const auto comma = text.find(',');
  const std::string re(text.substr(0, comma));
  const std::string im = comma == std::string_view::npos ? "0" : std::string(text.substr(comma + 1));
  char* end = nullptr;
  const double r = std::strtod(re.c_str(), &end);
  if (re.empty() || *end != '\0') throw ConfigError(std::string(key) + ": expected RE,IM");
  const double i = std::strtod(im.c_str(), &end);
  if (im.empty() || *end != '\0') throw ConfigError(std::string(key) + ": expected RE,IM");
  return {r, i};
}

inline std::array<double, 4> parse_bounds(std::string_view text) {
  std::array<double, 4> b{};
  std::size_t pos = 0;
  for (int k = 0; k < 4; ++k) {
    const auto comma = text.find(',', pos);
    if ((k < 3) == (comma == std::string_view::npos)) {
      throw ConfigError("bounds: expected X_LO,X_HI,Y_LO,Y_HI");
    }
    const std::string item(text.substr(pos, comma == std::string_view::npos ? text.npos : comma - pos));
    char* end = nullptr;
    b[static_cast<std::size_t>(k)] = std::strtod(item.c_str(), &end);
    if (item.empty() || *end != '\0') throw ConfigError("bounds: expected X_LO,X_HI,Y_LO,Y_HI");
    pos = comma + 1;
  }
  return b;
}

}  // namespace detail

/// Rejects anything the owning module would reject, naming the key.
inline void validate(const RunConfig& c) {
  if (c.ensemble.n < 1) throw ConfigError("n: must be >= 1");
  validate_rho(c.ensemble.rho);
  if (!std::isfinite(c.z.real()) || !std::isfinite(c.z.imag())) throw ConfigError("z: not finite");
  if (c.trials < 1) throw ConfigError("trials: must be >= 1");
  if (c.threads < 1) throw ConfigError("threads: must be >= 1");
  if (!(c.tol > 0.0)) throw ConfigError("tol: must be > 0");
  if (!(c.inflation >= 1.0)) throw ConfigError("inflation: must be >= 1");
  if (c.bins < 1) throw ConfigError("bins: must be >= 1");
  if (c.bounds) {
    const auto& b = *c.bounds;
    if (!(b[1] > b[0]) || !(b[3] > b[2])) throw ConfigError("bounds: need x_lo < x_hi, y_lo < y_hi");
  }
  if (!(c.K > 1.0)) throw ConfigError("K: must be > 1");
  if (!(c.epsilon > 0.0)) throw ConfigError("epsilon: must be > 0");
  if (c.x_max && !(*c.x_max > 0.0)) throw ConfigError("x_max: must be > 0");
  if (!(c.dx > 0.0)) throw ConfigError("dx: must be > 0");
  if (!(c.v_min > 0.0 && c.v_min < 1.0)) throw ConfigError("v_min: must lie in (0, 1)");
  if (!(c.margin > 0.0)) throw ConfigError("margin: must be > 0");
}

/// Strict: unknown keys are errors. Missing keys keep their defaults.
inline RunConfig from_json(const Json& j, RunConfig c = {}) {
  static const std::set<std::string> known = {
      "command", "n",   "rho",    "pair",    "diag",  "seed",  "z",     "trials", "draw",
      "tol",     "inflation", "bins", "bounds", "K", "epsilon", "x_max", "dx", "v_min",
      "margin",  "threads", "out"};
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError(key + ": unknown key");
  }
  using detail::get_as;
  if (j.contains("command")) {
    const auto cmd = parse_command(get_as<std::string>(j, "command"));
    if (!cmd) throw ConfigError("command: unknown command");
    c.command = *cmd;
  }
  if (j.contains("n")) c.ensemble.n = get_as<int>(j, "n");
  if (j.contains("rho")) c.ensemble.rho = get_as<double>(j, "rho");
  if (j.contains("pair")) {
    const auto p = parse_pair_dist(get_as<std::string>(j, "pair"));
    if (!p) throw ConfigError("pair: expected gaussian or rademacher");
    c.ensemble.pair_dist = *p;
  }
  if (j.contains("diag")) {
    const auto d = parse_diag_dist(get_as<std::string>(j, "diag"));
    if (!d) throw ConfigError("diag: expected standard_gaussian, zero or same_as_offdiag_marginal");
    c.ensemble.diag_dist = *d;
  }
  if (j.contains("seed")) c.ensemble.seed = get_as<std::uint64_t>(j, "seed");
  if (j.contains("z")) {
    const auto v = get_as<std::vector<double>>(j, "z");
    if (v.size() != 2) throw ConfigError("z: expected [re, im]");
    c.z = {v[0], v[1]};
  }
  if (j.contains("trials")) c.trials = get_as<int>(j, "trials");
  if (j.contains("draw")) c.draw = get_as<std::uint32_t>(j, "draw");
  if (j.contains("tol")) c.tol = get_as<double>(j, "tol");
  if (j.contains("inflation")) c.inflation = get_as<double>(j, "inflation");
  if (j.contains("bins")) c.bins = get_as<int>(j, "bins");
  if (j.contains("bounds")) {
    if (j.at("bounds").is_null()) {
      c.bounds.reset();
    } else {
      const auto v = get_as<std::vector<double>>(j, "bounds");
      if (v.size() != 4) throw ConfigError("bounds: expected 4 numbers");
      c.bounds = std::array<double, 4>{v[0], v[1], v[2], v[3]};
    }
  }
  if (j.contains("K")) c.K = get_as<double>(j, "K");
  if (j.contains("epsilon")) c.epsilon = get_as<double>(j, "epsilon");
  if (j.contains("x_max")) {
    if (j.at("x_max").is_null()) {
      c.x_max.reset();
    } else {
      c.x_max = get_as<double>(j, "x_max");
    }
  }
  if (j.contains("dx")) c.dx = get_as<double>(j, "dx");
  if (j.contains("v_min")) c.v_min = get_as<double>(j, "v_min");
  if (j.contains("margin")) c.margin = get_as<double>(j, "margin");
  if (j.contains("threads")) c.threads = get_as<unsigned>(j, "threads");
  if (j.contains("out")) c.out = get_as<std::string>(j, "out");
  return c;
}

/// Outcome of command-line parsing: either a config to run or an exit code
/// (help output, or 2 on error) with the text to print.
struct ParseResult {
  std::optional<RunConfig> config;
  int exit_code = 0;
  std::string message;
};

/*!
 * Parses `elliptic COMMAND [flags]`. A --config file is applied first and
 * explicit flags override it; ELLIPTIC_SEED overrides both.
 */
inline ParseResult parse_config(const std::vector<std::string>& args,
                                const char* seed_env = std::getenv("ELLIPTIC_SEED")) {
  const RunConfig defaults;
  CLI::App app{"Elliptic-law simulation and verification toolkit", "elliptic"};
  app.set_help_flag("-h,--help", "Print help and exit");

  std::string command, config_path, pair, diag, z_text, bounds_text;
  int n = defaults.ensemble.n;
  double rho = defaults.ensemble.rho;
  std::uint64_t seed = defaults.ensemble.seed;
  RunConfig flags = defaults;
  double x_max = 0.0;

  const std::string commands = "sample|spectrum|ellipse|limit|lsv|potential|audit";
  app.add_option("command", command, commands);
  app.add_option("--config", config_path, "JSON config file (strict keys)");
  app.add_option("--n", n, "Matrix dimension")->capture_default_str();
  app.add_option("--rho", rho, "Pair correlation, |rho| < 1")->capture_default_str();
  app.add_option("--pair", pair, "gaussian|rademacher (default gaussian)");
  app.add_option("--diag", diag,
                 "standard_gaussian|zero|same_as_offdiag_marginal (default standard_gaussian)");
  app.add_option("--seed", seed, "RNG seed; ELLIPTIC_SEED overrides")->capture_default_str();
  app.add_option("--z", z_text, "Shift RE,IM (default 0,0)");
  app.add_option("--trials", flags.trials, "Number of matrices")->capture_default_str();
  app.add_option("--draw", flags.draw, "First draw index")->capture_default_str();
  app.add_option("--threads", flags.threads, "Worker threads (default: all cores)");
  app.add_option("--out", flags.out, "Output directory")->capture_default_str();
  app.add_option("--tol", flags.tol, "Limit-system tolerance")->capture_default_str();
  app.add_option("--inflation", flags.inflation, "Ellipse inflation")->capture_default_str();
  app.add_option("--bins", flags.bins, "Histogram bins per axis")->capture_default_str();
  app.add_option("--bounds", bounds_text, "Histogram box X_LO,X_HI,Y_LO,Y_HI (default fits the ellipse)");
  app.add_option("--K", flags.K, "Norm constant for lsv, > 1")->capture_default_str();
  app.add_option("--epsilon", flags.epsilon, "Small-ball radius")->capture_default_str();
  app.add_option("--x-max", x_max, "Limit grid end (default 2.5 + |z|)");
  app.add_option("--dx", flags.dx, "Limit grid step")->capture_default_str();
  app.add_option("--v-min", flags.v_min, "Smallest ladder rung")->capture_default_str();
  app.add_option("--margin", flags.margin, "Largest singular value margin")->capture_default_str();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    return {std::nullopt, 0, app.help()};
  } catch (const CLI::ParseError& e) {
    return {std::nullopt, 2, std::string("config error: ") + e.what()};
  }

  try {
    RunConfig c = defaults;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ConfigError("config: cannot open " + config_path);
      Json j;
      try {
        j = Json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
      }
      c = from_json(j, c);
    }
    auto given = [&](const char* name) { return app.count(name) > 0; };
    if (!command.empty()) {
      const auto cmd = parse_command(command);
      if (!cmd) throw ConfigError("command: unknown command '" + command + "'");
      c.command = *cmd;
    } else if (config_path.empty()) {
      throw ConfigError("command: missing (one of " + commands + ")");
    }
    if (given("--n")) c.ensemble.n = n;
    if (given("--rho")) c.ensemble.rho = rho;
    if (given("--pair")) {
      const auto p = parse_pair_dist(pair);
      if (!p) throw ConfigError("pair: expected gaussian or rademacher");
      c.ensemble.pair_dist = *p;
    }
    if (given("--diag")) {
      const auto d = parse_diag_dist(diag);
      if (!d) throw ConfigError("diag: expected standard_gaussian, zero or same_as_offdiag_marginal");
      c.ensemble.diag_dist = *d;
    }
    if (given("--seed")) c.ensemble.seed = seed;
    if (given("--z")) c.z = detail::parse_complex(z_text, "z");
    if (given("--trials")) c.trials = flags.trials;
    if (given("--draw")) c.draw = flags.draw;
    if (given("--threads")) c.threads = flags.threads;
    if (given("--out")) c.out = flags.out;
    if (given("--tol")) c.tol = flags.tol;
    if (given("--inflation")) c.inflation = flags.inflation;
    if (given("--bins")) c.bins = flags.bins;
    if (given("--bounds")) c.bounds = detail::parse_bounds(bounds_text);
    if (given("--K")) c.K = flags.K;
    if (given("--epsilon")) c.epsilon = flags.epsilon;
    if (given("--x-max")) c.x_max = x_max;
    if (given("--dx")) c.dx = flags.dx;
    if (given("--v-min")) c.v_min = flags.v_min;
    if (given("--margin")) c.margin = flags.margin;
    if (seed_env != nullptr && *seed_env != '\0') {
      char* end = nullptr;
      const unsigned long long s = std::strtoull(seed_env, &end, 10);
      if (*end != '\0') throw ConfigError("ELLIPTIC_SEED: not an unsigned integer");
      c.ensemble.seed = s;
    }
    validate(c);
    return {c, 0, {}};
  } catch (const ConfigError& e) {
    return {std::nullopt, 2, std::string("config error: ") + e.what()};
  }
}

}  // namespace elliptic::cli
