#pragma once

#include <stdexcept>
#include <string>

namespace cqr {

// Base for everything thrown by this library. The CLI maps the two
// subfamilies to distinct exit codes: DataError -> 2, NumericError -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(size_t line, const std::string& reason)
      : DataError("parse error at line " + std::to_string(line) + ": " + reason),
        line_(line) {}
  size_t line() const { return line_; }

 private:
  size_t line_;
};

class MissingField : public DataError {
 public:
  MissingField(const std::string& name, size_t line)
      : DataError("missing field \"" + name + "\" at line " + std::to_string(line)),
        name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class EmptyInput : public DataError {
 public:
  using DataError::DataError;
};

class UnknownTag : public DataError {
 public:
  using DataError::DataError;
};

class EmptyTagSet : public DataError {
 public:
  using DataError::DataError;
};

class EmptyCandidateSet : public DataError {
 public:
  using DataError::DataError;
};

class DegenerateInput : public DataError {
 public:
  using DataError::DataError;
};

class TruthNotInCandidates : public DataError {
 public:
  using DataError::DataError;
};

class DegenerateCandidateSet : public DataError {
 public:
  using DataError::DataError;
};

class ShapeMismatch : public DataError {
 public:
  using DataError::DataError;
};

class Divergence : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace cqr
