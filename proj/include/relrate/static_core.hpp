#pragma once

#include <cstdint>
#include <vector>

#include "relrate/space.hpp"

namespace relrate {

// Expected relative rate of return of f against g:
//   rel(f | g) = E[ safe_div(f, g) ] - 1, a value in [-1, +infinity].
// g is weakly preferred to f exactly when rel(f | g) <= 0.
double rel(const FiniteSpace& space, const Outcome& f, const Outcome& g);

// True iff f is weakly preferred to g, i.e. rel(g | f) <= 0.
bool prefers(const FiniteSpace& space, const Outcome& f, const Outcome& g);

enum class Comparison { equivalent, first_preferred, second_preferred, incomparable };

// Pairwise verdict. Mutual weak preference forces atomwise equality, so
// `equivalent` is reported only for equal outcomes.
Comparison compare(const FiniteSpace& space, const Outcome& f, const Outcome& g);

// The two-atom families exhibiting the failures of completeness,
// transitivity, and additivity, with their closed-form rates.
// Requires 0 < p < 1. The additive flip is strict only for p <= 1/2.
struct CounterexampleSuite {
    FiniteSpace space;  // atoms of weight p and 1-p

    // Neither of f, g is weakly preferred to the other.
    Outcome incomparable_f, incomparable_g;
    double incomparable_rel_fg;  // rel(f | g) = (1-p)^2 > 0
    double incomparable_rel_gf;  // rel(g | f) = p^2 > 0

    // f ~ g and g ~ h at the preference boundary, yet rel(f | h) > 0.
    Outcome triple_f, triple_g, triple_h;
    double triple_rel_fg;  // 0
    double triple_rel_gh;  // 0
    double triple_rel_fh;  // (1-p) / (2p)

    // rel(f | g) = 0, but adding the sure unit reverses the strict order.
    Outcome flip_f, flip_g;
    double flip_rel_fg;        // 0
    double flip_rel_g1_f1;     // rel(g+1 | f+1) = p(1-p)(p^2+p-1) / ((1+p^2)(1+(1+p)^2))
};

CounterexampleSuite counterexample_suite(double p);

// Checks a preference cycle f0, f1, ..., fn with f0 == fn: every consecutive
// pair must satisfy prefers(f_i, f_{i+1}); the conclusion is that all members
// are equal atomwise.
struct ChainReport {
    bool links_ok = true;   // every consecutive pair passed prefers
    int failing_link = -1;  // first i with !prefers(f_i, f_{i+1}), or -1
    bool all_equal = false; // every outcome equals f0 atomwise (tol 1e-12)
    double max_deviation = 0.0;
};

ChainReport chain_check(const FiniteSpace& space, const std::vector<Outcome>& cycle);

// Smallest integer N >= 0 such that adding the indemnity N * g on the event
// {f <= g} makes the insured g strictly preferred to the insured f:
//   rel( g + N g 1_{f<=g} | f + N g 1_{f<=g} ) < 0.
// Throws domain_error when {g < f} is null: the scan then has no negative
// limit and no such N exists.
struct InsuranceResult {
    std::int64_t level;
    double rel_at_level;
};

InsuranceResult insurance_level(const FiniteSpace& space, const Outcome& f,
                                const Outcome& g,
                                std::int64_t max_level = 1000000);

}  // namespace relrate
