#pragma once

#include <stdexcept>
#include <string>

namespace rvrw {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// configuration / validation failures (CLI exit code 1)
class ValidationError : public Error {
 public:
  using Error::Error;
};

class SymmetryViolation : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DominanceViolation : public ValidationError {
 public:
  DominanceViolation(const std::string& msg, int walk, int vertex)
      : ValidationError(msg), walk_(walk), vertex_(vertex) {}
  int walk() const { return walk_; }
  int vertex() const { return vertex_; }

 private:
  int walk_;
  int vertex_;
};

class EmptyVertexSet : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DuplicateVertexInSet : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InvalidSize : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InvalidParameter : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class StepRejected : public Error {
 public:
  using Error::Error;
};

class SizeGuard : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

class NotInterior : public Error {
 public:
  using Error::Error;
};

class NotApplicable : public Error {
 public:
  using Error::Error;
};

class MixedSigns : public Error {
 public:
  using Error::Error;
};

class RegimeBoundary : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace rvrw
