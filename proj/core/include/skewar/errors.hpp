#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace skewar {

// Bad arguments: dimensions, non-SPD inputs, out-of-range scalars.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Base for failures that happen while computing on otherwise valid inputs.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A factorization or positivity check failed inside an algorithm.
//   quantity: short name of the offending object ("S", "V", "Psi", ...)
//   index:    iteration or step index where it happened (0-based)
class DegeneracyError : public NumericalError {
 public:
  DegeneracyError(std::string quantity, std::size_t index, const std::string& detail = {})
      : NumericalError("numerical degeneracy in " + quantity + " at index " +
                       std::to_string(index) + (detail.empty() ? "" : ": " + detail)),
        quantity_(std::move(quantity)),
        index_(index) {}

  const std::string& quantity() const noexcept { return quantity_; }
  std::size_t index() const noexcept { return index_; }

 private:
  std::string quantity_;
  std::size_t index_;
};

// Simulated trajectory blew up (non-finite values).
class DivergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Wraps an error raised while processing measurement `step` (1-based k).
class StepError : public NumericalError {
 public:
  StepError(std::size_t step, const std::string& what)
      : NumericalError("step " + std::to_string(step) + ": " + what), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace skewar
