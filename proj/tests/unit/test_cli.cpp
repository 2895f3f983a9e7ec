// Copyright 2026 The elliptic Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "elliptic/cli/run.hpp"

namespace elliptic::cli {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("elliptic_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RunConfig parsed(const std::vector<std::string>& args) {
  const auto r = parse_config(args, nullptr);
  EXPECT_EQ(r.exit_code, 0) << r.message;
  return r.config.value_or(RunConfig{});
}

TEST(Parse, ExampleCommandLine) {
  const auto c = parsed({"lsv", "--n", "200", "--rho", "0.5", "--z", "1,0", "--trials", "50",
                         "--pair", "rademacher", "--seed", "42"});
  EXPECT_EQ(c.command, Command::kLsv);
  EXPECT_EQ(c.ensemble.n, 200);
  EXPECT_EQ(c.ensemble.rho, 0.5);
  EXPECT_EQ(c.z, (Complex{1, 0}));
  EXPECT_EQ(c.trials, 50);
  EXPECT_EQ(c.ensemble.pair_dist, PairDist::kRademacher);
  EXPECT_EQ(c.ensemble.seed, 42u);
}

TEST(Parse, RhoOutOfRangeNamesTheKey) {
  const auto r = parse_config({"ellipse", "--rho", "1.0"}, nullptr);
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_FALSE(r.config);
  EXPECT_NE(r.message.find("rho"), std::string::npos);
}

TEST(Parse, UnknownFlag) {
  EXPECT_EQ(parse_config({"ellipse", "--bogus", "1"}, nullptr).exit_code, 2);
  EXPECT_EQ(parse_config({"nosuch"}, nullptr).exit_code, 2);
  EXPECT_EQ(parse_config({}, nullptr).exit_code, 2);
}

TEST(Parse, HelpExitsZero) {
  const auto r = parse_config({"--help"}, nullptr);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_FALSE(r.config);
  EXPECT_NE(r.message.find("--rho"), std::string::npos);
}

TEST(Parse, UnknownJsonKeyIsRejected) {
  const auto dir = scratch("badkey");
  fs::create_directories(dir);
  std::ofstream(dir / "c.json") << R"({"command": "ellipse", "rhoo": 0.2})";
  const auto r = parse_config({"--config", (dir / "c.json").string()}, nullptr);
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.message.find("rhoo"), std::string::npos);
}

TEST(Parse, JsonRoundTrip) {
  auto c = parsed({"potential", "--n", "37", "--rho", "-0.25", "--z", "0.5,-1.5", "--bounds",
                   "-2,2,-1,1", "--x-max", "4", "--tol", "1e-10", "--seed", "7"});
  c.threads = 3;
  c.out = "somewhere";
  EXPECT_EQ(from_json(to_json(c)), c);
  const auto dir = scratch("roundtrip");
  fs::create_directories(dir);
  std::ofstream(dir / "c.json") << to_json(c).dump();
  EXPECT_EQ(parsed({"--config", (dir / "c.json").string()}), c);
}

TEST(Parse, FlagsOverrideConfigFile) {
  const auto dir = scratch("override");
  fs::create_directories(dir);
  std::ofstream(dir / "c.json") << R"({"command": "ellipse", "n": 50, "rho": 0.2})";
  const auto c = parsed({"--config", (dir / "c.json").string(), "--rho", "0.3"});
  EXPECT_EQ(c.ensemble.n, 50);
  EXPECT_EQ(c.ensemble.rho, 0.3);
}

TEST(Parse, SeedEnvironmentWins) {
  const auto r = parse_config({"sample", "--seed", "5"}, "123");
  ASSERT_TRUE(r.config);
  EXPECT_EQ(r.config->ensemble.seed, 123u);
  EXPECT_EQ(parse_config({"sample"}, "12x").exit_code, 2);
}

TEST(Parse, HashIgnoresRuntimeKnobs) {
  auto a = parsed({"ellipse", "--n", "30"});
  auto b = a;
  b.threads = a.threads + 1;
  b.out = "elsewhere";
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.ensemble.seed += 1;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
}

std::vector<std::pair<std::string, std::string>> run_into(RunConfig c, const fs::path& dir) {
  c.out = dir.string();
  const auto r = run(c);
  EXPECT_EQ(r.exit_code, 0) << r.report.dump();
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : r.files) out.emplace_back(f.filename().string(), slurp(f));
  return out;
}

TEST(Run, ArtifactsAreByteIdenticalAcrossThreadCounts) {
  for (const char* cmd : {"sample", "spectrum", "ellipse", "lsv", "audit"}) {
    auto c = parsed({cmd, "--n", "40", "--rho", "0.5", "--trials", "6", "--z", "0.5,0.25"});
    c.threads = 1;
    const auto a = run_into(c, scratch(std::string(cmd) + "_a"));
    c.threads = 4;
    const auto b = run_into(c, scratch(std::string(cmd) + "_b"));
    ASSERT_EQ(a.size(), b.size()) << cmd;
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].first, b[i].first);
      EXPECT_EQ(a[i].second, b[i].second) << cmd << ": " << a[i].first;
    }
  }
}

TEST(Run, CsvFilesCarryTheConfigHash) {
  const auto c = parsed({"spectrum", "--n", "10"});
  const auto files = run_into(c, scratch("hash"));
  const std::string tag = "# cfg=" + config_hash(c) + "\n";
  for (const auto& [name, body] : files) {
    if (name.ends_with(".csv")) {
      EXPECT_EQ(body.rfind(tag, 0), 0u) << name;
    } else {
      EXPECT_EQ(Json::parse(body)["cfg_hash"], config_hash(c)) << name;
    }
  }
}

TEST(Run, PotentialAtOrigin) {
  auto c = parsed({"potential", "--n", "400", "--rho", "0", "--trials", "2"});
  c.out = scratch("potential").string();
  const auto r = run(c);
  ASSERT_EQ(r.exit_code, 0) << r.report.dump();
  const auto& p = r.report["payload"];
  EXPECT_NEAR(p["u_empirical"].get<double>(), 0.5, 0.05);
  EXPECT_NEAR(p["u_limit"].get<double>(), 0.5, 2e-2);
  EXPECT_NEAR(p["u_reference"].get<double>(), 0.5, 1e-8);
}

TEST(Run, LimitDensityPeak) {
  auto c = parsed({"limit", "--rho", "0", "--z", "0,0"});
  c.out = scratch("limit").string();
  const auto r = run(c);
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_NEAR(r.report["payload"]["density_at_zero"].get<double>(), 2.0 / std::numbers::pi, 1e-3);
  EXPECT_NEAR(r.report["payload"]["total_mass"].get<double>(), 1.0, 1e-3);
}

TEST(Run, SolverFailureExitsThreeWithLocation) {
  auto c = parsed({"limit", "--rho", "0.5", "--z", "0.5,0", "--tol", "1e-300", "--dx", "0.5"});
  c.out = scratch("fail").string();
  const auto r = run(c);
  EXPECT_EQ(r.exit_code, 3);
  const auto& e = r.report["payload"]["error"];
  EXPECT_EQ(e["kind"], "numerical");
  EXPECT_NE(e["location"].get<std::string>().find("alpha="), std::string::npos);
  EXPECT_TRUE(fs::exists(fs::path(c.out) / "limit.json"));
}

TEST(Binary, ExitCodes) {
#ifndef ELLIPTIC_CLI_PATH
  GTEST_SKIP() << "built without the command-line tool";
#else
  const char* exe = ELLIPTIC_CLI_PATH;
  const auto dir = scratch("binary");
  const std::string base = std::string("\"") + exe + "\" ";
  const std::string quiet = " >/dev/null 2>&1";
  auto status = [](int raw) { return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1; };
  EXPECT_EQ(status(std::system((base + "ellipse --rho 1.0" + quiet).c_str())), 2);
  EXPECT_EQ(status(std::system((base + "ellipse --nope 3" + quiet).c_str())), 2);
  EXPECT_EQ(status(std::system((base + "sample --n 5 --out \"" + dir.string() + "\"" + quiet).c_str())), 0);
  EXPECT_TRUE(fs::exists(dir / "sample_matrix.csv"));
  EXPECT_EQ(status(std::system((base + "limit --tol 1e-300 --dx 0.5 --out \"" + dir.string() + "\"" + quiet).c_str())), 3);
#endif
}

}  // namespace
}  // namespace elliptic::cli
