/*
 * trivid - video pipeline co-design toolkit
 *
 * Copyright 2026 The trivid Authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace trivid {

// Base class for all library errors. The CLI maps subclasses to process
// exit codes: ConfigError -> 2, IoError -> 3, everything else -> 4.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Filesystem failures: missing files, short reads, unwritable outputs.
class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed on-disk content: bad magic, bad version, inconsistent headers.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Invalid run configuration: unknown keys, wrong types, out-of-range values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Violated API precondition or invariant.
class ContractError : public Error {
 public:
  using Error::Error;
};

// A metric was requested on inputs where it is undefined (e.g. zero GT boxes).
class UndefinedMetricError : public ContractError {
 public:
  using ContractError::ContractError;
};

// A sampled frame selection kept too few frames to evaluate tracking.
class DegenerateSelectionError : public ContractError {
 public:
  using ContractError::ContractError;
};

// Pattern library construction found no eligible kernels.
class EmptyLibraryError : public ContractError {
 public:
  using ContractError::ContractError;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractError(message);
}

}  // namespace trivid
