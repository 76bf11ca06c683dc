#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ictmc {

/// Malformed or inconsistent user input (bad files, mismatched spaces,
/// negative times, unknown state names...).
class InputError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when I + delta*Q would not be a transition operator.
class StepTooLarge : public std::domain_error {
public:
  StepTooLarge(double delta, double max_delta)
      : std::domain_error("step " + std::to_string(delta) +
                          " exceeds the admissible maximum " +
                          std::to_string(max_delta)),
        delta_(delta), max_delta_(max_delta) {}

  double delta() const noexcept { return delta_; }
  double max_delta() const noexcept { return max_delta_; }

private:
  double delta_;
  double max_delta_;
};

class TooManyVertices : public std::length_error {
public:
  TooManyVertices(std::size_t free_coordinates, std::size_t limit)
      : std::length_error("row has " + std::to_string(free_coordinates) +
                          " free coordinates, vertex enumeration is limited to " +
                          std::to_string(limit)),
        free_(free_coordinates) {}

  std::size_t free_coordinates() const noexcept { return free_; }

private:
  std::size_t free_;
};

/// Generator recovery needs a bound on the difference quotients.
class DiagnosticRequired : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

} // namespace ictmc
