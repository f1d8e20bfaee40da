#pragma once

#include <stdexcept>
#include <string>

namespace sharp {

/// Base of every error thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside an operation's domain (empty input, t outside [0,1], ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Edge payload violates its type invariants.
class MalformedEdgeError : public Error {
 public:
  using Error::Error;
};

/// Geometry too degenerate for the requested computation.
class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

/// Input data inconsistent with its schema or with a paired input.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// File contents could not be parsed. Carries the offending line or byte offset.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t location)
      : Error(what), location_(location) {}

  std::size_t location() const noexcept { return location_; }

 private:
  std::size_t location_;
};

}  // namespace sharp
