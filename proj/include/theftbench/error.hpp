#pragma once

#include <stdexcept>
#include <string>

namespace theftbench {

// Base for every error raised by the library. The CLI maps the three
// categories below onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable/unwritable files.
class IoError : public Error {
 public:
  using Error::Error;
};

// Inputs that violate a contract: bad formats, schemas, sizes, domains,
// incompatible architectures, invalid plans.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class FormatError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class SchemaError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class SizeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ArchitectureError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Non-finite values encountered during computation.
class NumericError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace theftbench
