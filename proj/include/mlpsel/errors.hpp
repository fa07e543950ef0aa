#pragma once

#include <stdexcept>
#include <string>

namespace mlpsel {

/// Input that violates an operation's precondition (shapes, ranges).
class InvalidInput : public std::invalid_argument {
 public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

/// Inconsistent configuration, e.g. an empty constraint set.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Every optimizer start was abandoned.
class OptimizationFailure : public std::runtime_error {
 public:
  explicit OptimizationFailure(const std::string& what) : std::runtime_error(what) {}
};

/// A true hidden unit has no matching unit in the candidate parameter.
class UnmatchableParameter : public std::runtime_error {
 public:
  explicit UnmatchableParameter(const std::string& what) : std::runtime_error(what) {}
};

/// A group of matched units has zero total output weight.
class DegenerateSplit : public std::runtime_error {
 public:
  explicit DegenerateSplit(const std::string& what) : std::runtime_error(what) {}
};

/// Normalization by a zero distance (parameter lies on the true fiber).
class FiberPointError : public std::runtime_error {
 public:
  explicit FiberPointError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mlpsel
