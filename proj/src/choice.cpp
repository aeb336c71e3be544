#include "relrate/choice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "relrate/detail/hull_opt.hpp"
#include "relrate/detail/lp.hpp"
#include "relrate/errors.hpp"

namespace relrate {

namespace {

constexpr double kFeasTol = 1e-9;
constexpr std::size_t kEnumBudget = 200000;

// Solves M x = rhs for square M by Gaussian elimination with partial
// pivoting. Returns false when M is singular to working precision.
bool solve_square(std::vector<std::vector<double>> M, std::vector<double> rhs,
                  std::vector<double>& out) {
    const std::size_t n = M.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        double best = std::abs(M[col][col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(M[r][col]) > best) { best = std::abs(M[r][col]); piv = r; }
        }
        if (best < 1e-12) return false;
        std::swap(M[col], M[piv]);
        std::swap(rhs[col], rhs[piv]);
        for (std::size_t r = col + 1; r < n; ++r) {
            double f = M[r][col] / M[col][col];
            if (f == 0.0) continue;
            for (std::size_t j = col; j < n; ++j) M[r][j] -= f * M[col][j];
            rhs[r] -= f * rhs[col];
        }
    }
    out.assign(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double s = rhs[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= M[i][j] * out[j];
        out[i] = s / M[i][i];
    }
    return true;
}

std::uint64_t binomial_capped(std::size_t n, std::size_t k, std::uint64_t cap) {
    if (k > n) return 0;
    std::uint64_t r = 1;
    for (std::size_t i = 0; i < k; ++i) {
        r = r * (n - i) / (i + 1);
        if (r > cap) return cap + 1;
    }
    return r;
}

void project_to_simplex(std::vector<double>& v) {
    std::vector<double> u = v;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cum = 0.0, tau = 0.0;
    std::size_t rho = 0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        cum += u[k];
        double t = (cum - 1.0) / static_cast<double>(k + 1);
        if (u[k] - t > 0.0) { rho = k + 1; tau = t; }
    }
    (void)rho;
    for (double& x : v) x = std::max(0.0, x - tau);
}

}  // namespace

// ---------------------------------------------------------------------------
// Polytope

Polytope Polytope::from_vertices(std::vector<Outcome> vertices) {
    if (vertices.empty())
        throw validation_error("Polytope: vertex list is empty");
    const std::size_t d = vertices.front().size();
    if (d == 0) throw validation_error("Polytope: zero-dimensional vertices");
    std::vector<Outcome> kept;
    for (const Outcome& v : vertices) {
        if (v.size() != d)
            throw validation_error("Polytope: inconsistent vertex dimensions");
        for (double x : v)
            if (!std::isfinite(x))
                throw validation_error("Polytope: vertex coordinates must be finite");
        bool dup = false;
        for (const Outcome& u : kept) {
            double dev = 0.0;
            for (std::size_t j = 0; j < d; ++j)
                dev = std::max(dev, std::abs(u[j] - v[j]));
            if (dev <= 1e-12) { dup = true; break; }
        }
        if (!dup) kept.push_back(v);
    }
    Polytope p;
    p.dim_ = d;
    p.nonneg_ = false;
    p.has_rows_ = false;
    p.verts_ = std::move(kept);
    p.verts_ready_ = true;
    return p;
}

Polytope Polytope::from_halfspaces(std::size_t dim, std::vector<HalfSpace> rows,
                                   bool nonnegative) {
    if (dim == 0) throw validation_error("Polytope: dimension must be positive");
    for (const HalfSpace& h : rows) {
        if (h.a.size() != dim)
            throw validation_error("Polytope: halfspace dimension mismatch");
        if (!std::isfinite(h.b))
            throw validation_error("Polytope: halfspace bound must be finite");
        for (double x : h.a)
            if (!std::isfinite(x))
                throw validation_error("Polytope: halfspace normal must be finite");
    }
    Polytope p;
    p.dim_ = dim;
    p.nonneg_ = nonnegative;
    p.has_rows_ = true;
    p.rows_ = std::move(rows);
    return p;
}

Polytope Polytope::full_simplex(std::vector<double> mu) {
    if (mu.empty()) throw validation_error("full_simplex: empty price vector");
    for (double m : mu)
        if (!std::isfinite(m) || m <= 0.0)
            throw validation_error("full_simplex: prices must be strictly positive");
    std::vector<Outcome> verts;
    verts.push_back(Outcome(mu.size(), 0.0));
    for (std::size_t i = 0; i < mu.size(); ++i) {
        Outcome v(mu.size(), 0.0);
        v[i] = 1.0 / mu[i];
        verts.push_back(std::move(v));
    }
    Polytope p = from_vertices(std::move(verts));
    p.has_rows_ = true;
    p.nonneg_ = true;
    p.rows_ = {HalfSpace{std::move(mu), 1.0}};
    return p;
}

const std::vector<Outcome>& Polytope::vertices() const {
    if (verts_ready_) return verts_;

    // Effective constraint rows: user rows plus coordinate bounds.
    std::vector<const HalfSpace*> all;
    std::vector<HalfSpace> coord;
    if (nonneg_) {
        for (std::size_t j = 0; j < dim_; ++j) {
            HalfSpace h{std::vector<double>(dim_, 0.0), 0.0};
            h.a[j] = -1.0;
            coord.push_back(std::move(h));
        }
    }
    for (const HalfSpace& h : rows_) all.push_back(&h);
    for (const HalfSpace& h : coord) all.push_back(&h);

    // Boundedness probe per coordinate direction (free variables are split
    // into positive and negative parts for the LP).
    const std::size_t lp_dim = nonneg_ ? dim_ : 2 * dim_;
    std::vector<std::vector<double>> A;
    std::vector<double> b;
    for (const HalfSpace* h : all) {
        std::vector<double> row(lp_dim, 0.0);
        for (std::size_t j = 0; j < dim_; ++j) {
            row[j] = h->a[j];
            if (!nonneg_) row[dim_ + j] = -h->a[j];
        }
        A.push_back(std::move(row));
        b.push_back(h->b);
    }
    for (std::size_t j = 0; j < dim_; ++j) {
        for (int sgn = 0; sgn < (nonneg_ ? 1 : 2); ++sgn) {
            std::vector<double> c(lp_dim, 0.0);
            c[j] = (sgn == 0) ? 1.0 : -1.0;
            if (!nonneg_) c[dim_ + j] = -c[j];
            auto res = detail::lp_maximize(c, A, b);
            if (res.status == detail::LpStatus::infeasible)
                throw validation_error("Polytope: constraint set is empty");
            if (res.status == detail::LpStatus::unbounded)
                throw validation_error("Polytope: constraint set is unbounded");
        }
    }

    const std::size_t nrows = all.size();
    if (binomial_capped(nrows, dim_, kEnumBudget) > kEnumBudget)
        throw validation_error("Polytope: vertex enumeration budget exceeded");

    std::vector<Outcome> found;
    std::vector<std::size_t> pick(dim_);
    std::vector<std::size_t> idx;
    // Iterate over all dim_-subsets of rows.
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start,
                                                            std::size_t depth) {
        if (depth == dim_) {
            std::vector<std::vector<double>> M(dim_, std::vector<double>(dim_));
            std::vector<double> rhs(dim_);
            for (std::size_t r = 0; r < dim_; ++r) {
                M[r] = all[pick[r]]->a;
                rhs[r] = all[pick[r]]->b;
            }
            std::vector<double> x;
            if (!solve_square(std::move(M), std::move(rhs), x)) return;
            for (const HalfSpace* h : all) {
                double s = 0.0;
                for (std::size_t j = 0; j < dim_; ++j) s += h->a[j] * x[j];
                if (s > h->b + kFeasTol) return;
            }
            for (const Outcome& u : found) {
                double dev = 0.0;
                for (std::size_t j = 0; j < dim_; ++j)
                    dev = std::max(dev, std::abs(u[j] - x[j]));
                if (dev <= 1e-9) return;
            }
            found.push_back(std::move(x));
            return;
        }
        for (std::size_t i = start; i + (dim_ - depth) <= nrows; ++i) {
            pick[depth] = i;
            rec(i + 1, depth + 1);
        }
    };
    rec(0, 0);

    if (found.empty())
        throw validation_error("Polytope: no vertices found (empty set?)");
    verts_ = std::move(found);
    verts_ready_ = true;
    return verts_;
}

bool Polytope::contains(const std::vector<double>& x, double tol) const {
    if (x.size() != dim_)
        throw validation_error("Polytope::contains: dimension mismatch");
    if (has_rows_) {
        if (nonneg_)
            for (double v : x)
                if (v < -tol) return false;
        for (const HalfSpace& h : rows_) {
            double s = 0.0;
            for (std::size_t j = 0; j < dim_; ++j) s += h.a[j] * x[j];
            if (s > h.b + tol) return false;
        }
        return true;
    }
    // Feasibility of x in conv(verts): lambda >= 0, sum lambda = 1,
    // V lambda = x, all as inequality pairs; objective irrelevant.
    const auto& V = vertices();
    const std::size_t m = V.size();
    std::vector<std::vector<double>> A;
    std::vector<double> b;
    auto add_eq = [&](std::vector<double> row, double val) {
        std::vector<double> neg(row.size());
        for (std::size_t k = 0; k < row.size(); ++k) neg[k] = -row[k];
        A.push_back(std::move(row));
        b.push_back(val + tol);
        A.push_back(std::move(neg));
        b.push_back(-(val - tol));
    };
    for (std::size_t j = 0; j < dim_; ++j) {
        std::vector<double> row(m);
        for (std::size_t k = 0; k < m; ++k) row[k] = V[k][j];
        add_eq(std::move(row), x[j]);
    }
    add_eq(std::vector<double>(m, 1.0), 1.0);
    auto res = detail::lp_maximize(std::vector<double>(m, 0.0), A, b);
    return res.status == detail::LpStatus::optimal;
}

// ---------------------------------------------------------------------------
// Hull optimizer

namespace detail {

HullOptResult maximize_log_over_hull(const std::vector<std::vector<double>>& Y,
                                     const std::vector<double>& w, double tol,
                                     int max_iter) {
    const std::size_t n = Y.size();
    if (n == 0 || w.size() != n)
        throw validation_error("hull optimizer: shape mismatch");
    const std::size_t m = Y.front().size();
    if (m == 0) throw validation_error("hull optimizer: no candidates");
    double W = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (Y[i].size() != m)
            throw validation_error("hull optimizer: ragged payoff matrix");
        if (w[i] < 0.0)
            throw validation_error("hull optimizer: negative weight");
        if (w[i] > 0.0) {
            bool pos = false;
            for (double v : Y[i])
                if (v > 0.0) { pos = true; break; }
            if (!pos)
                throw validation_error(
                    "hull optimizer: weighted row with no positive payoff");
        }
        W += w[i];
    }
    if (W <= 0.0) throw validation_error("hull optimizer: zero total weight");

    std::vector<double> lambda(m, 1.0 / static_cast<double>(m));
    std::vector<double> y(n), grad(m), cand(m), ycand(n);

    auto apply = [&](const std::vector<double>& lam, std::vector<double>& out) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k < m; ++k) s += Y[i][k] * lam[k];
            out[i] = s;
        }
    };
    auto objective = [&](const std::vector<double>& yy) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (w[i] == 0.0) continue;
            if (yy[i] <= 0.0) return -std::numeric_limits<double>::infinity();
            s += w[i] * std::log(yy[i]);
        }
        return s;
    };

    apply(lambda, y);
    double G = objective(y);
    double step = 1.0;
    int it = 0;
    int stalls = 0;
    int newton_left = 40;
    double cert = std::numeric_limits<double>::infinity();
    double cert_mark = std::numeric_limits<double>::infinity();

    // Equality-constrained Newton step on the active support. First-order
    // steps cannot certify tight tolerances on ill-conditioned faces; this
    // sharpens a near-optimal point quadratically.
    auto newton_refine = [&](double gmax) -> bool {
        double lmax = 0.0;
        for (double v : lambda) lmax = std::max(lmax, v);
        std::vector<std::size_t> S;
        for (std::size_t k = 0; k < m; ++k)
            if (lambda[k] > 1e-13 * lmax || grad[k] >= gmax * (1.0 - 1e-9))
                S.push_back(k);
        const std::size_t s = S.size();
        if (s < 2 || s > 64) return false;

        // KKT system for max sum w_i log(Y lam) with e'lam fixed:
        // [H e; e' 0] [d; nu] = [-g_S; 0].
        std::vector<std::vector<double>> M(s + 1, std::vector<double>(s + 2, 0.0));
        for (std::size_t a = 0; a < s; ++a) {
            for (std::size_t b = a; b < s; ++b) {
                double hab = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (w[i] == 0.0) continue;
                    hab -= w[i] * Y[i][S[a]] * Y[i][S[b]] / (y[i] * y[i]);
                }
                M[a][b] = M[b][a] = hab;
            }
            M[a][s] = 1.0;
            M[s][a] = 1.0;
            M[a][s + 1] = -grad[S[a]];
        }
        for (std::size_t col = 0; col <= s; ++col) {
            std::size_t piv = col;
            for (std::size_t r = col + 1; r <= s; ++r)
                if (std::abs(M[r][col]) > std::abs(M[piv][col])) piv = r;
            if (std::abs(M[piv][col]) < 1e-300) return false;
            std::swap(M[piv], M[col]);
            for (std::size_t r = 0; r <= s; ++r) {
                if (r == col) continue;
                double f = M[r][col] / M[col][col];
                if (f == 0.0) continue;
                for (std::size_t cc = col; cc <= s + 1; ++cc)
                    M[r][cc] -= f * M[col][cc];
            }
        }
        std::vector<double> d(s);
        for (std::size_t a = 0; a < s; ++a) d[a] = M[a][s + 1] / M[a][a];

        double alpha = 1.0;
        for (std::size_t a = 0; a < s; ++a) {
            if (d[a] >= 0.0) continue;
            if (lambda[S[a]] <= 0.0) d[a] = 0.0;  // cannot leave the orthant
            else alpha = std::min(alpha, -0.995 * lambda[S[a]] / d[a]);
        }
        if (!(alpha > 0.0)) return false;

        for (int half = 0; half < 2; ++half) {
            std::fill(cand.begin(), cand.end(), 0.0);
            double tot = 0.0;
            for (std::size_t a = 0; a < s; ++a) {
                cand[S[a]] = std::max(lambda[S[a]] + alpha * d[a], 0.0);
                tot += cand[S[a]];
            }
            if (tot <= 0.0) return false;
            for (double& v : cand) v /= tot;
            apply(cand, ycand);
            double Gc = objective(ycand);
            // accept float-level wobble: the step also drops tail mass
            if (Gc >= G - 1e-12 * (1.0 + std::abs(G))) {
                lambda = cand;
                y = ycand;
                G = std::max(G, Gc);
                stalls = 0;
                return true;
            }
            alpha *= 0.5;
        }
        return false;
    };

    for (; it < max_iter; ++it) {
        double gmax = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                if (w[i] > 0.0) s += w[i] * Y[i][k] / y[i];
            grad[k] = s;
            gmax = std::max(gmax, s);
        }
        cert = gmax / W - 1.0;
        if (cert <= tol) break;

        if (cert < 1e-3 && newton_left > 0 && newton_refine(gmax)) {
            --newton_left;
            continue;
        }

        // Projected gradient step with backtracking.
        bool moved = false;
        for (int bt = 0; bt < 60; ++bt) {
            for (std::size_t k = 0; k < m; ++k)
                cand[k] = lambda[k] + step * grad[k] / W;
            project_to_simplex(cand);
            double dir = 0.0;
            for (std::size_t k = 0; k < m; ++k)
                dir += grad[k] * (cand[k] - lambda[k]);
            apply(cand, ycand);
            double Gc = objective(ycand);
            if (Gc >= G + 1e-4 * std::max(dir, 0.0) && Gc > G) {
                lambda = cand;
                y = ycand;
                G = Gc;
                step = std::min(step * 1.3, 1e6);
                moved = true;
                stalls = 0;
                break;
            }
            step *= 0.5;
        }
        if (!moved) {
            // Multiplicative step: monotone for this objective in exact
            // arithmetic, and its float-level fixed point pins the
            // certificate down to rounding noise, so take it ungated.
            for (std::size_t k = 0; k < m; ++k)
                cand[k] = lambda[k] * grad[k] / W;
            double tot = std::accumulate(cand.begin(), cand.end(), 0.0);
            if (tot <= 0.0) break;
            for (double& v : cand) v /= tot;
            if (cand == lambda) break;  // fixed point at float resolution
            apply(cand, ycand);
            double Gc = objective(ycand);
            if (!std::isfinite(Gc)) break;
            stalls = (Gc > G) ? 0 : stalls + 1;
            lambda = cand;
            y = ycand;
            if (Gc > G) G = Gc;
            step = 1.0;
            if (stalls > 64) {
                // The objective is below float resolution; keep going only
                // while the certificate itself still shrinks geometrically.
                if (cert < 0.5 * cert_mark) {
                    cert_mark = cert;
                    stalls = 0;
                } else {
                    break;
                }
            }
        }
    }
    return {std::move(lambda), std::move(y), cert, it};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// log_optimal

LogOptimalResult log_optimal(const FiniteSpace& space, const Polytope& set,
                             double tol, int max_iter) {
    if (set.dim() != space.size())
        throw validation_error("log_optimal: set dimension does not match space");
    const auto& V = set.vertices();
    const std::size_t n = space.size();
    const std::size_t m = V.size();

    std::vector<std::size_t> zero_coords;
    std::vector<bool> forced(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        double mx = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            if (V[k][i] < -kFeasTol)
                throw validation_error("log_optimal: choice set has negative payoffs");
            mx = std::max(mx, V[k][i]);
        }
        if (mx <= 0.0) {
            forced[i] = true;
            zero_coords.push_back(i);
        }
    }
    double Ws = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (!forced[i]) Ws += space.weight(i);
    if (Ws <= 0.0)
        throw validation_error("log_optimal: every payoff coordinate is forced to zero");

    std::vector<std::vector<double>> Y;
    std::vector<double> w;
    for (std::size_t i = 0; i < n; ++i) {
        if (forced[i]) continue;
        std::vector<double> row(m);
        for (std::size_t k = 0; k < m; ++k) row[k] = std::max(V[k][i], 0.0);
        Y.push_back(std::move(row));
        w.push_back(space.weight(i));
    }

    auto sol = detail::maximize_log_over_hull(Y, w, tol / Ws, max_iter);
    double cert = Ws * sol.certificate;
    if (cert > tol)
        throw numerical_error("log_optimal: could not certify optimum to tolerance");

    Outcome f_hat(n, 0.0);
    std::size_t r = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (!forced[i]) f_hat[i] = sol.y[r++];
    return {std::move(f_hat), cert, sol.iterations, std::move(zero_coords)};
}

// ---------------------------------------------------------------------------
// simplex_classify

SimplexClassification simplex_classify(const std::vector<double>& mu,
                                       const Outcome& f, double tol) {
    if (mu.size() != f.size())
        throw validation_error("simplex_classify: size mismatch");
    for (double m : mu)
        if (!std::isfinite(m) || m <= 0.0)
            throw validation_error("simplex_classify: prices must be strictly positive");
    double a = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!std::isfinite(f[i]) || f[i] < 0.0)
            throw validation_error("simplex_classify: payoff must be nonnegative");
        a += mu[i] * f[i];
    }
    SimplexClassification out{SimplexPosition::interior, a, {}};
    if (a > 1.0 + tol) out.position = SimplexPosition::exterior;
    else if (a >= 1.0 - tol) out.position = SimplexPosition::maximal;
    if (a > tol) {
        out.maximal_representative.resize(f.size());
        for (std::size_t i = 0; i < f.size(); ++i)
            out.maximal_representative[i] = f[i] / a;
    }
    return out;
}

// ---------------------------------------------------------------------------
// probability recovery

ChoiceOracle oracle_from_space(const FiniteSpace& space, double tol) {
    return [space, tol](const std::vector<double>& mu) {
        Polytope B = Polytope::full_simplex(mu);
        return log_optimal(space, B, tol, 400000).f_hat;
    };
}

RecoveryResult recover_probability(const ChoiceOracle& oracle, std::size_t n_atoms,
                                   int n_regeneration, std::uint64_t seed,
                                   double tol) {
    if (n_atoms == 0)
        throw validation_error("recover_probability: need at least one atom");
    RecoveryResult out{true, {}, 0.0, ""};

    std::vector<double> uniform(n_atoms, 1.0 / static_cast<double>(n_atoms));
    Outcome g = oracle(uniform);
    if (g.size() != n_atoms) {
        out.consistent = false;
        out.violation = "oracle returned a payoff of the wrong dimension";
        return out;
    }
    double spent = 0.0;
    for (double v : g) spent += v / static_cast<double>(n_atoms);
    if (std::abs(spent - 1.0) > 1e-6) {
        out.consistent = false;
        out.violation = "chosen payoff does not exhaust the uniform budget";
        return out;
    }
    std::vector<double> p(n_atoms);
    double tot = 0.0;
    for (std::size_t i = 0; i < n_atoms; ++i) {
        p[i] = g[i] / static_cast<double>(n_atoms);
        if (p[i] <= 0.0) {
            out.consistent = false;
            out.violation = "recovered probability has a non-positive atom";
            return out;
        }
        tot += p[i];
    }
    for (double& v : p) v /= tot;
    out.probability = p;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> logu(-std::log(3.0), std::log(3.0));
    for (int k = 0; k < n_regeneration; ++k) {
        std::vector<double> mu(n_atoms);
        for (double& v : mu) v = std::exp(logu(rng));
        Outcome got = oracle(mu);
        if (got.size() != n_atoms) {
            out.consistent = false;
            out.violation = "oracle returned a payoff of the wrong dimension";
            return out;
        }
        double err = 0.0;
        for (std::size_t i = 0; i < n_atoms; ++i) {
            double pred = p[i] / mu[i];
            err = std::max(err, std::abs(got[i] - pred) / std::max(1.0, pred));
        }
        out.max_regeneration_error = std::max(out.max_regeneration_error, err);
        if (err > tol) {
            std::ostringstream os;
            os << "regenerated budget set " << k
               << " disagrees with the recovered probability (error " << err << ")";
            out.consistent = false;
            out.violation = os.str();
            return out;
        }
    }
    return out;
}

double log_rel(const FiniteSpace& space, const Outcome& f, const Outcome& g) {
    check_outcome(space, f);
    check_outcome(space, g);
    for (std::size_t i = 0; i < space.size(); ++i)
        if (f[i] <= 0.0 || g[i] <= 0.0)
            throw domain_error("log_rel: defined only for strictly positive payoffs");
    double s = 0.0;
    for (std::size_t i = 0; i < space.size(); ++i)
        s += space.weight(i) * (std::log(f[i]) - std::log(g[i]));
    return s;
}

}  // namespace relrate
