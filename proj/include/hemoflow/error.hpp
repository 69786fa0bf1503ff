// Copyright 2026 The Hemoflow Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef HEMOFLOW_ERROR_HPP
#define HEMOFLOW_ERROR_HPP

#include <stdexcept>
#include <string>

namespace hemoflow {

enum class ErrorKind {
  InvalidArgument,
  InsufficientData,
  FitFailure,
  Extrapolation,
  InvalidRange,
  Parse,
  Io,
  Geometry,
  DegenerateGeometry,
  Labeling,
  EmptySection,
  CountMismatch,
  NonMonotone,
  InfeasibleSequence,
  OutOfBounds,
  Validation,
};

// Every library failure is reported through this one exception type; the
// kind decides the C status code and the CLI exit code.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  // True for failures of a numerical procedure (as opposed to bad input).
  bool is_numerical() const noexcept {
    return kind_ == ErrorKind::FitFailure || kind_ == ErrorKind::DegenerateGeometry;
  }

private:
  ErrorKind kind_;
};

const char* to_string(ErrorKind kind) noexcept;

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond)
    throw Error(kind, what);
}

} // namespace hemoflow

#endif
