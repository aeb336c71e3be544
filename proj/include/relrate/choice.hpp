#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "relrate/space.hpp"

namespace relrate {

struct HalfSpace {
    std::vector<double> a;
    double b;  // constraint a . x <= b
};

// A convex compact choice set of payoffs, given either by its vertices or as
// {x : x >= 0, A x <= b}. Halfspace forms are vertex-enumerated on demand by
// brute force over active sets, so they are meant for small dimensions.
class Polytope {
  public:
    static Polytope from_vertices(std::vector<Outcome> vertices);
    static Polytope from_halfspaces(std::size_t dim, std::vector<HalfSpace> rows,
                                    bool nonnegative = true);
    // {f >= 0 : sum_i mu_i f_i <= 1} with mu strictly positive.
    static Polytope full_simplex(std::vector<double> mu);

    std::size_t dim() const { return dim_; }
    bool has_halfspace_form() const { return has_rows_; }
    const std::vector<HalfSpace>& halfspaces() const { return rows_; }
    bool nonnegative() const { return nonneg_; }

    // Vertices of the set; computed and cached for halfspace forms.
    // Throws validation_error if the set is empty or unbounded, or if the
    // active-set search would exceed the enumeration budget.
    const std::vector<Outcome>& vertices() const;

    // Membership up to tol. Uses the halfspace form when present, otherwise
    // solves a small feasibility program over the vertices.
    bool contains(const std::vector<double>& x, double tol = 1e-9) const;

  private:
    Polytope() = default;
    std::size_t dim_ = 0;
    bool nonneg_ = true;
    bool has_rows_ = false;
    std::vector<HalfSpace> rows_;
    mutable bool verts_ready_ = false;
    mutable std::vector<Outcome> verts_;
};

// Maximizer of E[log f] over a choice set, found by damped projected gradient
// over hull coefficients with a certificate stop: the returned certificate is
// max over vertices v of rel(v | f_hat), which is <= 0 at the exact optimum.
struct LogOptimalResult {
    Outcome f_hat;
    double certificate;      // max_v rel(v | f_hat); solver stops at <= tol
    int iterations;
    std::vector<std::size_t> zero_coordinates;  // atoms where the set forces f = 0
};

LogOptimalResult log_optimal(const FiniteSpace& space, const Polytope& set,
                             double tol = 1e-10, int max_iter = 200000);

enum class SimplexPosition { exterior, interior, maximal };

// Position of f relative to the budget boundary of {g >= 0 : sum mu g <= 1}:
// every nonzero member is a scalar multiple a * m of a boundary-maximal m
// with a = sum_i mu_i f_i.
struct SimplexClassification {
    SimplexPosition position;
    double scale;                    // sum mu f
    Outcome maximal_representative;  // f / scale; empty when f == 0
};

SimplexClassification simplex_classify(const std::vector<double>& mu,
                                       const Outcome& f, double tol = 1e-10);

// A choice oracle answers budget-set queries: given strictly positive prices
// mu it returns the chosen payoff from {f >= 0 : sum mu f <= 1}.
using ChoiceOracle = std::function<Outcome(const std::vector<double>&)>;

// Oracle induced by the preference rule of a known space: the numeric
// log-optimal payoff on the queried budget set.
ChoiceOracle oracle_from_space(const FiniteSpace& space, double tol = 1e-12);

// Recovers the underlying probability from one uniform-price query, then
// replays the oracle on randomly generated budget sets and checks the answers
// against the recovered probability. A mismatch is reported as an axiom
// violation rather than an error.
struct RecoveryResult {
    bool consistent;
    std::vector<double> probability;
    double max_regeneration_error;
    std::string violation;  // empty when consistent
};

RecoveryResult recover_probability(const ChoiceOracle& oracle, std::size_t n_atoms,
                                   int n_regeneration = 20,
                                   std::uint64_t seed = 20260815,
                                   double tol = 1e-8);

// E[log f - log g]; both outcomes must be strictly positive. This completion
// of the preference rule is total and transitive, and weak preference under
// the rate rule implies the same ordering here.
double log_rel(const FiniteSpace& space, const Outcome& f, const Outcome& g);

}  // namespace relrate
