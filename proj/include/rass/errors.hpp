#pragma once

#include <stdexcept>
#include <string>

namespace rass {

// Base of every error raised by the library. Callers that only care about
// "the input is broken" vs "the math said no" catch Error vs InfeasibleError.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class ValueError : public Error {
 public:
  using Error::Error;
};

class SemanticError : public Error {
 public:
  using Error::Error;
};

class EmptySpaceError : public Error {
 public:
  using Error::Error;
};

class MissingDataError : public Error {
 public:
  using Error::Error;
};

class EnergyUnavailable : public Error {
 public:
  using Error::Error;
};

class PolicyIncompleteError : public Error {
 public:
  using Error::Error;
};

class UnknownEngineError : public Error {
 public:
  using Error::Error;
};

/// Raised when no decision variable satisfies every constraint. Carries the
/// label of the constraint that rejected the most candidates.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& constraint, const std::string& what)
      : Error(what), constraint_(constraint) {}

  const std::string& constraint() const noexcept { return constraint_; }

 private:
  std::string constraint_;
};

}  // namespace rass
