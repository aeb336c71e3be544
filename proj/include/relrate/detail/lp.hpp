#pragma once

#include <vector>

namespace relrate::detail {

enum class LpStatus { optimal, unbounded, infeasible };

struct LpResult {
    LpStatus status;
    double value = 0.0;
    std::vector<double> x;
};

// max c.x subject to A x <= b, x >= 0. Dense two-phase simplex with Bland's
// rule; intended for the small systems arising from portfolio constraint
// sets and payoff polytopes, not for large programs.
LpResult lp_maximize(const std::vector<double>& c,
                     const std::vector<std::vector<double>>& A,
                     const std::vector<double>& b);

}  // namespace relrate::detail
