// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace jpp {

/// Root of the project's exception hierarchy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user-supplied configuration (maps to exit code 1).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Missing or malformed dataset content (maps to exit code 2).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Tensor or map dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// The procedural generator could not produce a valid sample.
class GenerationError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace jpp
