#pragma once

#include <stdexcept>
#include <string>

namespace tesp {

// Dimension mismatch between operands.
struct shape_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Invalid scalar argument or probability vector.
struct parameter_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Operand outside the domain of an operation (not T-SPD, non-finite, ...).
struct domain_error : std::domain_error {
  using std::domain_error::domain_error;
};

// Explicit block-circulant assembly would exceed its entry budget.
struct budget_error : std::length_error {
  using std::length_error::length_error;
};

// A method preset cannot be built for the given operands.
struct preset_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Not enough recorded iterations to estimate a rate.
struct insufficient_data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace tesp
