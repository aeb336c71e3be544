#include "relrate/detail/lp.hpp"

#include <cmath>
#include <limits>

#include "relrate/errors.hpp"

namespace relrate::detail {

namespace {

constexpr double kPivotTol = 1e-9;

// Tableau simplex on rows[0..m) with objective in obj; basis[i] is the basic
// column of row i. Returns false when the objective is unbounded.
bool run_simplex(std::vector<std::vector<double>>& rows, std::vector<double>& rhs,
                 std::vector<double>& obj, double& obj_val,
                 std::vector<int>& basis, int ncols) {
    const int m = static_cast<int>(rows.size());
    for (;;) {
        // Bland: entering column = lowest index with positive reduced cost.
        int enter = -1;
        for (int j = 0; j < ncols; ++j) {
            if (obj[j] > kPivotTol) { enter = j; break; }
        }
        if (enter < 0) return true;

        int leave = -1;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m; ++i) {
            if (rows[i][enter] > kPivotTol) {
                double ratio = rhs[i] / rows[i][enter];
                if (ratio < best_ratio - kPivotTol ||
                    (ratio < best_ratio + kPivotTol && leave >= 0 &&
                     basis[i] < basis[leave])) {
                    best_ratio = ratio;
                    leave = i;
                }
            }
        }
        if (leave < 0) return false;  // unbounded

        double piv = rows[leave][enter];
        for (int j = 0; j < ncols; ++j) rows[leave][j] /= piv;
        rhs[leave] /= piv;
        rows[leave][enter] = 1.0;
        for (int i = 0; i < m; ++i) {
            if (i == leave) continue;
            double f = rows[i][enter];
            if (f == 0.0) continue;
            for (int j = 0; j < ncols; ++j) rows[i][j] -= f * rows[leave][j];
            rhs[i] -= f * rhs[leave];
            rows[i][enter] = 0.0;
        }
        double f = obj[enter];
        if (f != 0.0) {
            for (int j = 0; j < ncols; ++j) obj[j] -= f * rows[leave][j];
            obj_val -= f * rhs[leave];
            obj[enter] = 0.0;
        }
        basis[leave] = enter;
    }
}

}  // namespace

LpResult lp_maximize(const std::vector<double>& c,
                     const std::vector<std::vector<double>>& A,
                     const std::vector<double>& b) {
    const int n = static_cast<int>(c.size());
    const int m = static_cast<int>(A.size());
    if (static_cast<int>(b.size()) != m)
        throw validation_error("lp_maximize: row count mismatch");
    for (const auto& row : A)
        if (static_cast<int>(row.size()) != n)
            throw validation_error("lp_maximize: column count mismatch");

    // Columns: n structural, m slacks, then one artificial per negative row.
    int n_art = 0;
    for (double v : b)
        if (v < 0.0) ++n_art;
    const int ncols = n + m + n_art;

    std::vector<std::vector<double>> rows(m, std::vector<double>(ncols, 0.0));
    std::vector<double> rhs(m);
    std::vector<int> basis(m);
    int art = n + m;
    for (int i = 0; i < m; ++i) {
        double sgn = (b[i] < 0.0) ? -1.0 : 1.0;
        for (int j = 0; j < n; ++j) rows[i][j] = sgn * A[i][j];
        rows[i][n + i] = sgn;  // slack
        rhs[i] = sgn * b[i];
        if (b[i] < 0.0) {
            rows[i][art] = 1.0;
            basis[i] = art;
            ++art;
        } else {
            basis[i] = n + i;
        }
    }

    if (n_art > 0) {
        // Phase 1: maximize -sum(artificials), i.e. drive them to zero.
        std::vector<double> obj(ncols, 0.0);
        double obj_val = 0.0;
        for (int j = n + m; j < ncols; ++j) obj[j] = -1.0;
        for (int i = 0; i < m; ++i) {
            if (basis[i] >= n + m) {  // price out the artificial basis
                for (int j = 0; j < ncols; ++j) obj[j] += rows[i][j];
                obj_val += rhs[i];
            }
        }
        if (!run_simplex(rows, rhs, obj, obj_val, basis, ncols))
            throw numerical_error("lp_maximize: phase 1 unbounded");
        // obj_val tracks the negated phase-1 objective, so it stays >= 0 and
        // reaches ~0 exactly when the artificials can be driven out.
        if (obj_val > 1e-7) return {LpStatus::infeasible, 0.0, {}};
        // Pivot any artificial still in the basis out on a structural column.
        for (int i = 0; i < m; ++i) {
            if (basis[i] < n + m) continue;
            int enter = -1;
            for (int j = 0; j < n + m; ++j)
                if (std::abs(rows[i][j]) > kPivotTol) { enter = j; break; }
            if (enter < 0) continue;  // redundant row
            double piv = rows[i][enter];
            for (int j = 0; j < ncols; ++j) rows[i][j] /= piv;
            rhs[i] /= piv;
            for (int k = 0; k < m; ++k) {
                if (k == i) continue;
                double f = rows[k][enter];
                if (f == 0.0) continue;
                for (int j = 0; j < ncols; ++j) rows[k][j] -= f * rows[i][j];
                rhs[k] -= f * rhs[i];
            }
            basis[i] = enter;
        }
    }

    // Phase 2 on the original objective; artificial columns are frozen.
    std::vector<double> obj(ncols, 0.0);
    double obj_val = 0.0;
    for (int j = 0; j < n; ++j) obj[j] = c[j];
    for (int i = 0; i < m; ++i) {
        if (obj[basis[i]] != 0.0) {
            double f = obj[basis[i]];
            for (int j = 0; j < ncols; ++j) obj[j] -= f * rows[i][j];
            obj_val -= f * rhs[i];
        }
    }
    for (int j = n + m; j < ncols; ++j) obj[j] = -std::abs(obj[j]) - 1.0;  // never re-enter

    if (!run_simplex(rows, rhs, obj, obj_val, basis, ncols))
        return {LpStatus::unbounded, 0.0, {}};

    LpResult res{LpStatus::optimal, -obj_val, std::vector<double>(n, 0.0)};
    for (int i = 0; i < m; ++i)
        if (basis[i] < n) res.x[basis[i]] = rhs[i];
    // obj_val tracks the negated objective shift; recompute value directly.
    res.value = 0.0;
    for (int j = 0; j < n; ++j) res.value += c[j] * res.x[j];
    return res;
}

}  // namespace relrate::detail
