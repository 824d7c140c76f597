#pragma once

#include <stdexcept>
#include <string>

namespace proxy_market {

/// Invalid configuration or argument values. The CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Syntactically malformed config input.
class ParseError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// File-system failure. The CLI maps this to exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// API call sequence violated, e.g. learn() with no pending act().
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace proxy_market
