#ifndef KSAMPLE_ERRORS_HPP_
#define KSAMPLE_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace ksample {

// Invalid prompt, action or label id.
class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Precondition on an argument value violated (k = 0, p out of range, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Operation not valid for the object's current configuration, e.g. asking
// for labels on an environment that has none.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// An exact computation would exceed its enumeration budget.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ksample

#endif  // KSAMPLE_ERRORS_HPP_
