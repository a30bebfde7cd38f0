#pragma once

#include <stdexcept>
#include <string>

namespace navlab {

/// A caller broke an operation's precondition (shape mismatch, step after done, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Invalid configuration, world file, or checkpoint contents.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A loss or parameter became non-finite during training.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace navlab
