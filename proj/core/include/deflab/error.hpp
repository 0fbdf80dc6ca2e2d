#pragma once

#include <stdexcept>
#include <string>

namespace deflab {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: wrong shapes, broken tree invariants, bad measures.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input (rational strings, JSON schema violations).
class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Conditioning on an atom that carries no probability mass.
class NullAtomError : public Error {
 public:
  explicit NullAtomError(int node)
      : Error("conditioning on null atom (node " + std::to_string(node) + ")"), node_(node) {}
  int node() const { return node_; }

 private:
  int node_;
};

/// A precondition on the market (completeness, NA1, normalization) is violated.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace deflab
