#pragma once

#include <stdexcept>
#include <string>

namespace omas {

// Argument outside the mathematical domain of an operation (n = 0, x ∉ [0,1], ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Caller broke a structural precondition (asymmetric matrix, size mismatch).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A theorem's stated hypothesis does not hold for the given inputs.
class HypothesisViolation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Internal state reached a configuration the algorithms never produce.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace omas
