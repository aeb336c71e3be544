#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace relrate {

// Ratio with the boundary conventions used throughout the library:
//   y > 0        -> x / y
//   y = 0, x > 0 -> +infinity
//   y = 0, x = 0 -> 1
// Negative inputs are a caller bug; they are rejected by the callers that
// validate outcomes, not here.
double safe_div(double x, double y);

// A finite probability space with strictly positive atom weights.
// Atoms of weight zero are rejected: they would make preference statements
// depend on payoffs that can never be observed.
class FiniteSpace {
  public:
    explicit FiniteSpace(std::vector<double> weights,
                         std::vector<std::string> labels = {});

    std::size_t size() const { return w_.size(); }
    const std::vector<double>& weights() const { return w_; }
    double weight(std::size_t i) const { return w_[i]; }
    const std::vector<std::string>& labels() const { return labels_; }

    // E[f]; validates the size of f.
    double expectation(const std::vector<double>& f) const;

  private:
    std::vector<double> w_;
    std::vector<std::string> labels_;
};

// A nonnegative payoff, one coordinate per atom.
using Outcome = std::vector<double>;

// Throws validation_error if f has the wrong size, a negative coordinate, or
// a non-finite coordinate. With strictly_positive set, zero coordinates are
// rejected as well.
void check_outcome(const FiniteSpace& space, const Outcome& f,
                   bool strictly_positive = false);

}  // namespace relrate
