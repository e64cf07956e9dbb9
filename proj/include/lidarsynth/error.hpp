// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lidarsynth Authors

#pragma once

#include <stdexcept>
#include <string>

namespace lidarsynth {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument or precondition violated by the caller (bad shapes, invalid config).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed or unreadable input data (files, configs, cubes).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or divergence during numeric work.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace lidarsynth
