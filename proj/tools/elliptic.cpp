// Copyright 2026 The elliptic Authors.
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <unistd.h>

#include "elliptic/cli/run.hpp"

namespace {

// OpenBLAS reads its environment once at load time, so a missing setting can
// only be fixed by restarting the process. Decompositions must stay
// single-threaded, and the auto-detected Cooperlake kernels of some OpenBLAS
// builds hang in dhseqr.
void pin_blas_environment(char** argv) {
#if defined(ELLIPTIC_HAVE_LAPACK) && defined(__x86_64__)
  if (std::getenv("ELLIPTIC_BLAS_PINNED") != nullptr) return;
  bool changed = false;
  if (std::getenv("OPENBLAS_NUM_THREADS") == nullptr) {
    setenv("OPENBLAS_NUM_THREADS", "1", 1);
    changed = true;
  }
  if (std::getenv("OPENBLAS_CORETYPE") == nullptr && __builtin_cpu_supports("avx2")) {
    setenv("OPENBLAS_CORETYPE", "Haswell", 1);
    changed = true;
  }
  if (!changed) return;
  setenv("ELLIPTIC_BLAS_PINNED", "1", 1);
  execv("/proc/self/exe", argv);
  // exec failed: carry on with the inherited environment.
#else
  (void)argv;
#endif
}

}  // namespace

int main(int argc, char** argv) {
  pin_blas_environment(argv);
  const std::vector<std::string> args(argv + 1, argv + argc);
  const auto parsed = elliptic::cli::parse_config(args);
  if (!parsed.config) {
    (parsed.exit_code == 0 ? std::cout : std::cerr) << parsed.message << '\n';
    return parsed.exit_code;
  }
  const auto result = elliptic::cli::run(*parsed.config, &std::cerr);
  if (result.exit_code != 0) {
    const auto& err = result.report["payload"]["error"];
    std::cerr << "error: " << err.value("message", std::string{});
    if (err.contains("location")) std::cerr << " at " << err["location"].get<std::string>();
    std::cerr << '\n';
  }
  for (const auto& f : result.files) std::cout << f.string() << '\n';
  return result.exit_code;
}
