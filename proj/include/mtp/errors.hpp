#pragma once

#include <stdexcept>
#include <string>

namespace mtp {

/// A precondition on the inputs was violated. The CLI maps this to exit 2.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A sample budget, scan budget or memory cap ran out before the operation
/// could reach its target, or an estimator degenerated. The CLI maps this to
/// exit 3.
class EstimatorFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BudgetExceeded : public EstimatorFailure {
 public:
  using EstimatorFailure::EstimatorFailure;
};

}  // namespace mtp
