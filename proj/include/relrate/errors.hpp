#pragma once

#include <stdexcept>
#include <string>

namespace relrate {

// Raised when an input object is malformed: wrong sizes, weights that do not
// sum to one, probabilities outside (0,1], ill-shaped trees, bad scenario files.
struct validation_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Raised when an operation is applied outside its mathematical domain, e.g.
// the log relation on an outcome with a zero coordinate, or an insurance scan
// against a claim that is never strictly exceeded.
struct domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

// Raised when an iterative routine cannot certify its result to the requested
// tolerance within its iteration budget.
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when a market admits unbounded growth and no growth-optimal
// portfolio exists.
struct viability_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace relrate
