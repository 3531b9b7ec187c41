#pragma once

#include <stdexcept>
#include <string>

namespace intend {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad settings, flags, or environment (missing endpoint, fraction out of
// range, unknown template id).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Broken input data: unreadable files, malformed JSON lines, records that
// violate a corpus invariant.
class DataError : public Error {
 public:
  using Error::Error;
};

// A corpus record that parsed but violates a declared invariant. The message
// names the offending pair_id/testimony_id and the rule that failed.
class ValidationError : public DataError {
 public:
  using DataError::DataError;
};

// Completion backend failures: exhausted retries, protocol errors, timeouts.
class BackendError : public Error {
 public:
  using Error::Error;
};

}  // namespace intend
