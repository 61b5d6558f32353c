// Copyright (c) blt contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace blt {

// Numeric values are part of the C ABI (blt_status); do not renumber.
enum class ErrorCode : int {
  invalid_argument = 1,
  domain = 2,
  resource = 3,
  timeout = 4,
  convergence = 5,
  io = 6,
  contract = 7,
  schema = 8,
  internal = 9,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(ErrorCode::invalid_argument, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorCode::domain, what) {}
};

class ResourceError : public Error {
 public:
  explicit ResourceError(const std::string& what) : Error(ErrorCode::resource, what) {}
};

class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& what) : Error(ErrorCode::convergence, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::io, what) {}
};

class ContractViolation : public Error {
 public:
  explicit ContractViolation(const std::string& what) : Error(ErrorCode::contract, what) {}
};

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& what) : Error(ErrorCode::schema, what) {}
};

/// Raised when a rejection loop exhausts its attempt budget. Carries how far
/// it got so callers can report partial statistics.
class TimeoutError : public Error {
 public:
  TimeoutError(const std::string& what, std::size_t accepted, std::size_t attempts)
      : Error(ErrorCode::timeout, what), accepted_(accepted), attempts_(attempts) {}
  std::size_t accepted() const noexcept { return accepted_; }
  std::size_t attempts() const noexcept { return attempts_; }

 private:
  std::size_t accepted_;
  std::size_t attempts_;
};

inline const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::domain: return "domain";
    case ErrorCode::resource: return "resource";
    case ErrorCode::timeout: return "timeout";
    case ErrorCode::convergence: return "convergence";
    case ErrorCode::io: return "io";
    case ErrorCode::contract: return "contract";
    case ErrorCode::schema: return "schema";
    case ErrorCode::internal: return "internal";
  }
  return "unknown";
}

}  // namespace blt
