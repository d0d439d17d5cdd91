// Error types shared across the gridspin library.
#pragma once

#include <stdexcept>
#include <string>

namespace gridspin {

// Scenario file could not be read, parsed, or failed validation.
class ScenarioError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Local electrical demand exceeds total generation capability at some
// timestep. Signals a mis-specified scenario rather than a program bug.
class InfeasibleError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// A walk start value lies outside its [lower, upper] clamp range.
class BoundsError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Normalization requested over a group with no positive value.
class DegenerateError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace gridspin
