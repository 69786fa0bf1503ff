// Copyright 2026 The Hemoflow Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hemoflow/error.hpp"

namespace hemoflow {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
  case ErrorKind::InvalidArgument: return "invalid argument";
  case ErrorKind::InsufficientData: return "insufficient data";
  case ErrorKind::FitFailure: return "fit failure";
  case ErrorKind::Extrapolation: return "extrapolation";
  case ErrorKind::InvalidRange: return "invalid range";
  case ErrorKind::Parse: return "parse error";
  case ErrorKind::Io: return "i/o error";
  case ErrorKind::Geometry: return "geometry error";
  case ErrorKind::DegenerateGeometry: return "degenerate geometry";
  case ErrorKind::Labeling: return "labeling error";
  case ErrorKind::EmptySection: return "empty section";
  case ErrorKind::CountMismatch: return "count mismatch";
  case ErrorKind::NonMonotone: return "non-monotone times";
  case ErrorKind::InfeasibleSequence: return "infeasible sequence";
  case ErrorKind::OutOfBounds: return "out of bounds";
  case ErrorKind::Validation: return "validation error";
  }
  return "error";
}

} // namespace hemoflow
