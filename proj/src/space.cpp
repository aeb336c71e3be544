#include "relrate/space.hpp"

#include <cmath>
#include <limits>

#include "relrate/errors.hpp"

namespace relrate {

double safe_div(double x, double y) {
    if (y > 0.0) return x / y;
    if (x > 0.0) return std::numeric_limits<double>::infinity();
    return 1.0;
}

FiniteSpace::FiniteSpace(std::vector<double> weights,
                         std::vector<std::string> labels)
    : w_(std::move(weights)), labels_(std::move(labels)) {
    if (w_.empty()) throw validation_error("FiniteSpace: no atoms");
    if (!labels_.empty() && labels_.size() != w_.size())
        throw validation_error("FiniteSpace: label count does not match atom count");
    double total = 0.0;
    for (double w : w_) {
        if (!std::isfinite(w) || w <= 0.0)
            throw validation_error("FiniteSpace: atom weights must be strictly positive");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw validation_error("FiniteSpace: atom weights must sum to one");
}

double FiniteSpace::expectation(const std::vector<double>& f) const {
    if (f.size() != w_.size())
        throw validation_error("expectation: payoff size does not match atom count");
    double s = 0.0;
    for (std::size_t i = 0; i < w_.size(); ++i) s += w_[i] * f[i];
    return s;
}

void check_outcome(const FiniteSpace& space, const Outcome& f,
                   bool strictly_positive) {
    if (f.size() != space.size())
        throw validation_error("outcome: size does not match atom count");
    for (double v : f) {
        if (!std::isfinite(v) || v < 0.0)
            throw validation_error("outcome: coordinates must be finite and nonnegative");
        if (strictly_positive && v == 0.0)
            throw validation_error("outcome: coordinates must be strictly positive");
    }
}

}  // namespace relrate
