#pragma once

#include <stdexcept>
#include <string>

namespace timdnn {

// Cell/block/row index outside the configured array.
struct AddressError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

// Tensor or layer geometry that cannot be evaluated.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Bad or missing configuration constant.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Input values the hardware cannot represent (e.g. activation overflow).
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// The workload cannot be placed on the accelerator.
struct MappingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Monte Carlo samples violated the adjacent-code assumption of the
// sensing-error model.
struct ModelViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace timdnn
