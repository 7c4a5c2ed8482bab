#pragma once

#include <stdexcept>
#include <string>

namespace qpms {

/// Invalid physical or numerical configuration (grid guards, waist limits...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller broke an operation precondition (mismatched grids, bad indices).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Scenario document failed schema validation. `path` is a JSON pointer.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace qpms
