#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mcf {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: wrong dimensions, out-of-range parameters.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A point that cannot be normalized onto the model quadric.
class DegeneratePointError : public Error {
 public:
  using Error::Error;
};

/// arccosh/arccos argument outside the principal domain beyond tolerance.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Degenerate induced metric or non-finite geometry at a grid node.
class GeometryError : public Error {
 public:
  GeometryError(const std::string& what, std::size_t node)
      : Error(what + " (node " + std::to_string(node) + ")"), node_(node) {}
  std::size_t node() const { return node_; }

 private:
  std::size_t node_;
};

/// f_sigma evaluated where a|H|^2 + beta_eps c <= 0.
class PinchingViolation : public Error {
 public:
  using Error::Error;
};

/// A flow step whose stages produced an invalid state; the caller retries with a smaller step.
class StepRejected : public Error {
 public:
  using Error::Error;
};

/// Distance monitor preconditions failed (c >= 0, probe point on the surface).
class MonitorInvalid : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace mcf
