// Copyright 2026 The elliptic Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace elliptic {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration (ensemble parameters, CLI flags, config files).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A function was called with arguments outside its domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// The input is in the domain but violates a mathematical precondition
/// (e.g. a rank-deficient matrix handed to the distance identity).
class PreconditionError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

/// An iterative or dense solver failed. Carries a free-form location string
/// (matrix fingerprint, (alpha, z) point, trial index) and an optional trace.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, std::string location,
                 std::vector<std::string> trace = {})
      : Error(what + " [" + location + "]"),
        message_(what),
        location_(std::move(location)),
        trace_(std::move(trace)) {}

  /// what() without the location suffix.
  const std::string& message() const noexcept { return message_; }
  const std::string& location() const noexcept { return location_; }
  const std::vector<std::string>& trace() const noexcept { return trace_; }

 private:
  std::string message_;
  std::string location_;
  std::vector<std::string> trace_;
};

/// Newton converged, but to a root off the Nevanlinna sheet (Im s < 0).
class BranchError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace elliptic
