#pragma once

#include <stdexcept>
#include <string>

namespace stefanlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// A configuration file or value is malformed. `field` names the offending key.
class ConfigError : public Error {
public:
  ConfigError(std::string field, const std::string& what)
      : Error(what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

/// The implicit step could not be completed.
class SolverError : public Error {
public:
  enum class Kind { max_iterations, nonfinite_value };

  SolverError(Kind kind, const std::string& what, double time = -1.0)
      : Error(what), kind_(kind), time_(time) {}

  Kind kind() const noexcept { return kind_; }
  /// Simulation time of the failing step, or a negative value when unknown.
  double time() const noexcept { return time_; }

private:
  Kind kind_;
  double time_;
};

/// A space-time cylinder contains too few grid samples.
class EmptyCylinder : public Error {
public:
  using Error::Error;
};

} // namespace stefanlab
