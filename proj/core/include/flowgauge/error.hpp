#pragma once

#include <stdexcept>
#include <string>

namespace flowgauge {

/// Caller passed arguments that violate an operation's preconditions.
class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

/// Input data is unreadable or inconsistent (bad file, missing ids, ...).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace flowgauge
