#pragma once

#include <stdexcept>

namespace fedasm {

/// An operation refused an instance or argument that violates its stated
/// precondition (wrong instance shape, class too small, regularity failure).
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A sampling step asked for more members than its source set holds.
class SamplingInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fedasm
