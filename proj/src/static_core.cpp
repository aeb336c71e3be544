#include "relrate/static_core.hpp"

#include <cmath>
#include <cstdlib>

#include "relrate/errors.hpp"

namespace relrate {

double rel(const FiniteSpace& space, const Outcome& f, const Outcome& g) {
    check_outcome(space, f);
    check_outcome(space, g);
    double s = 0.0;
    for (std::size_t i = 0; i < space.size(); ++i) {
        double r = safe_div(f[i], g[i]);
        if (std::isinf(r)) return r;
        s += space.weight(i) * r;
    }
    return s - 1.0;
}

bool prefers(const FiniteSpace& space, const Outcome& f, const Outcome& g) {
    return rel(space, g, f) <= 0.0;
}

Comparison compare(const FiniteSpace& space, const Outcome& f, const Outcome& g) {
    bool fg = prefers(space, f, g);
    bool gf = prefers(space, g, f);
    if (fg && gf) return Comparison::equivalent;
    if (fg) return Comparison::first_preferred;
    if (gf) return Comparison::second_preferred;
    return Comparison::incomparable;
}

CounterexampleSuite counterexample_suite(double p) {
    if (!(p > 0.0) || !(p < 1.0))
        throw validation_error("counterexample_suite: p must lie in (0,1)");
    CounterexampleSuite s{FiniteSpace({p, 1.0 - p}),
                          {}, {}, 0, 0, {}, {}, {}, 0, 0, 0, {}, {}, 0, 0};

    s.incomparable_f = {1.0 / p, 1.0 - p};
    s.incomparable_g = {1.0, 1.0};
    s.incomparable_rel_fg = (1.0 - p) * (1.0 - p);
    s.incomparable_rel_gf = p * p;

    s.triple_f = {1.0 / p, 0.0};
    s.triple_g = {1.0, 1.0};
    s.triple_h = {2.0 * p / (1.0 + p), 2.0};
    s.triple_rel_fg = 0.0;
    s.triple_rel_gh = 0.0;
    s.triple_rel_fh = (1.0 - p) / (2.0 * p);

    s.flip_g = {p, 1.0 + p};
    s.flip_f = {p * p, (1.0 + p) * (1.0 + p)};
    s.flip_rel_fg = 0.0;
    s.flip_rel_g1_f1 = p * (1.0 - p) * (p * p + p - 1.0) /
                       ((1.0 + p * p) * (1.0 + (1.0 + p) * (1.0 + p)));
    return s;
}

ChainReport chain_check(const FiniteSpace& space, const std::vector<Outcome>& cycle) {
    if (cycle.size() < 2)
        throw validation_error("chain_check: need at least two outcomes");
    for (const Outcome& f : cycle) check_outcome(space, f);
    const Outcome& first = cycle.front();
    const Outcome& last = cycle.back();
    for (std::size_t i = 0; i < space.size(); ++i)
        if (first[i] != last[i])
            throw validation_error("chain_check: cycle must close (f0 == fn)");

    ChainReport rep;
    for (std::size_t i = 0; i + 1 < cycle.size(); ++i) {
        if (!prefers(space, cycle[i], cycle[i + 1])) {
            rep.links_ok = false;
            rep.failing_link = static_cast<int>(i);
            break;
        }
    }
    double dev = 0.0;
    for (const Outcome& f : cycle)
        for (std::size_t i = 0; i < space.size(); ++i)
            dev = std::max(dev, std::abs(f[i] - first[i]));
    rep.max_deviation = dev;
    rep.all_equal = rep.links_ok && dev <= 1e-12;
    return rep;
}

InsuranceResult insurance_level(const FiniteSpace& space, const Outcome& f,
                                const Outcome& g, std::int64_t max_level) {
    check_outcome(space, f);
    check_outcome(space, g);
    bool damage_possible = false;  // {g < f} non-null
    for (std::size_t i = 0; i < space.size(); ++i)
        if (g[i] < f[i]) damage_possible = true;
    if (!damage_possible)
        throw domain_error(
            "insurance_level: f never exceeds g, insured preference cannot "
            "become strict");

    Outcome fi(space.size()), gi(space.size());
    for (std::int64_t n = 0; n <= max_level; ++n) {
        for (std::size_t i = 0; i < space.size(); ++i) {
            double pay = (f[i] <= g[i]) ? static_cast<double>(n) * g[i] : 0.0;
            fi[i] = f[i] + pay;
            gi[i] = g[i] + pay;
        }
        double r = rel(space, gi, fi);
        // Strictly negative beyond rounding noise: boundary cases where the
        // rate is algebraically zero must not count as an improvement.
        if (r < -1e-12) return {n, r};
    }
    throw numerical_error("insurance_level: no level found below the cap");
}

}  // namespace relrate
