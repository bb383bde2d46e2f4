// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kgtool {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data (triple/alias/gold/trajectory files). Carries the
/// 1-based line number when one is known, 0 otherwise.
class DataError : public Error {
 public:
  DataError(const std::string& what, std::size_t line = 0);

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Caller supplied an argument outside an operation's contract.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace kgtool
