#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace polarsep {

// Error taxonomy mirrors the CLI exit-code contract:
//   0 success, 2 usage/config, 3 I/O, 4 numeric/singularity.

// Rejected input: precondition violated by the caller (shape mismatch,
// out-of-range parameter, malformed stack, ...).
class InvalidInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid or contradictory configuration (bad JSON, unknown keys,
// ranges that cannot produce valid samples).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File system / codec failures.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerically singular problem; carries the offending image columns
// when the failure is per-column (near-normal-incidence inversion).
class SingularityError : public std::runtime_error {
 public:
  explicit SingularityError(const std::string& msg) : std::runtime_error(msg) {}
  SingularityError(const std::string& msg, std::vector<int> columns)
      : std::runtime_error(msg), columns_(std::move(columns)) {}

  const std::vector<int>& columns() const { return columns_; }

 private:
  std::vector<int> columns_;
};

}  // namespace polarsep
