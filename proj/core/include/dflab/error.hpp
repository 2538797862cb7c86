// Copyright 2026 The df_lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dflab {

/// Argument outside the domain of a closed form (time out of range, bad shape).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Bad configuration, malformed input file or unknown option.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integration or training produced a non-finite value.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, std::ptrdiff_t step = -1)
      : std::runtime_error(step >= 0 ? what + " (step " + std::to_string(step) + ")" : what),
        step_(step) {}

  /// Index of the failing integration/optimizer step, -1 when not applicable.
  std::ptrdiff_t step() const noexcept { return step_; }

 private:
  std::ptrdiff_t step_;
};

}  // namespace dflab
