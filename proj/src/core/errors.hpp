#pragma once

#include <stdexcept>
#include <string>

namespace depthfuse {

// Precondition on a numeric argument violated (non-positive depth,
// probability outside (0,1), out-of-bounds sample coordinate).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Invalid experiment or pipeline configuration. `field` names the
// offending config key when known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what),
        field_(std::move(field)),
        message_(what) {}

  const std::string& field() const noexcept { return field_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::string field_;
  std::string message_;
};

// Input data violates an evaluation precondition (e.g. non-positive ground truth).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace depthfuse
