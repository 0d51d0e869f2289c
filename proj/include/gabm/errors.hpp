#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gabm {

/// Raised when a quantity is evaluated outside the set where it is defined
/// (non-positive radicand, singular matrix, chart boundary, ...). The
/// offending point is carried along so callers can report it.
class DomainError : public std::domain_error {
 public:
  DomainError(const std::string& what, std::vector<double> witness = {})
      : std::domain_error(what), witness_(std::move(witness)) {}

  const std::vector<double>& witness() const noexcept { return witness_; }

 private:
  std::vector<double> witness_;
};

/// Raised when an operation is called with arguments that violate its
/// precondition (wrong dimension, bad parameter combination, failed spot check).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace gabm
