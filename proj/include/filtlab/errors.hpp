#pragma once

#include <stdexcept>
#include <string>

namespace filtlab {

// Shape or type mismatch between inputs (non-square matrix, size mismatch,
// mixed group kinds, ...).
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A conditional measure was requested on a block of zero mass.
class DegenerateBlockError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Argument outside the mathematical domain of an operation (eps <= 0,
// unnormalized measure, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Enumeration or materialization cap exceeded.
class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace filtlab
