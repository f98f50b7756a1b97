#pragma once

#include <stdexcept>
#include <string>

namespace rough {

// Bad arguments (out-of-range parameters, shape mismatches) are reported with
// std::invalid_argument. The types below cover the remaining failure classes.

/// A partition sequence violates a structural requirement such as nestedness.
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The operation is only defined for a narrower class of partitions.
class UnsupportedPartition : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Factorization or root-finding could not reach the required accuracy.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A sample has no spread (zero variance) or otherwise carries no information.
class DegenerateSample : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ciesielski-type bounds need a complete refining sequence (a > 0).
class NotCompleteRefining : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rough
