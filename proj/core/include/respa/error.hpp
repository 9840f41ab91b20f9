#pragma once

#include <stdexcept>
#include <string>

namespace respa {

// Base class for every error the library raises on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input file (checkpoint, IDX corpus, config, adversarial set).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Operand or model shapes do not match.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration value or a reference that does not resolve.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A command needs an artifact another command has not produced yet.
class DependencyError : public Error {
 public:
  using Error::Error;
};

// Refusing to replace an existing, different output without --force.
class OutputConflictError : public Error {
 public:
  using Error::Error;
};

// An internal invariant broke: perturbation budget violated, training
// diverged, or state that should be impossible by construction.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace respa
