#pragma once

#include <stdexcept>
#include <string>

namespace platoon {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An action outside 1..R, or a profile whose shape disagrees with the population.
class InvalidProfile : public Error {
 public:
  using Error::Error;
};

/// An operation was asked to evaluate a pricing term the active policy does not levy.
class PolicyError : public Error {
 public:
  using Error::Error;
};

/// Exhaustive enumeration would exceed the caller's guard.
class SizeError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Scenario schema violation, addressed by a dotted field path such as "game.beta".
class ScenarioError : public Error {
 public:
  ScenarioError(std::string field, const std::string& message)
      : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace platoon
