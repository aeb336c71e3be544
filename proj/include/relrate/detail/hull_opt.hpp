#pragma once

#include <vector>

namespace relrate::detail {

// Maximizes sum_i w[i] * log((Y lambda)[i]) over the probability simplex in
// lambda, where column k of Y holds the i-th payoff of candidate k. Rows with
// w[i] == 0 are ignored. Every row with w[i] > 0 must have a positive entry.
//
// The returned certificate is relative:
//   max_k sum_i w[i] Y[i][k] / y[i]  <=  (sum_i w[i]) * (1 + certificate)
// and the iteration stops once certificate <= tol.
struct HullOptResult {
    std::vector<double> lambda;
    std::vector<double> y;  // Y lambda
    double certificate;
    int iterations;
};

HullOptResult maximize_log_over_hull(const std::vector<std::vector<double>>& Y,
                                     const std::vector<double>& w, double tol,
                                     int max_iter);

}  // namespace relrate::detail
