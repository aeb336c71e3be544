#include "relrate/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "relrate/choice.hpp"
#include "relrate/decompose.hpp"
#include "relrate/errors.hpp"
#include "relrate/market.hpp"
#include "relrate/monte_carlo.hpp"
#include "relrate/static_core.hpp"
#include "relrate/tree.hpp"

namespace relrate {
namespace {

using json = nlohmann::ordered_json;

std::string fmt(double x, const char* spec = "%.17g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, x);
    return buf;
}

void expect_keys(const json& obj, const std::vector<std::string>& allowed,
                 const std::string& where) {
    if (!obj.is_object())
        throw validation_error(where + ": expected a JSON object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw validation_error(where + ": unknown key \"" + it.key() + "\"");
    }
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    return it->get<T>();
}

struct Ctx {
    RunReport& rep;
    RunOptions opt;
    std::uint64_t run_index = 0;

    double scale() const { return opt.tol_scale; }
    std::uint64_t seed(std::uint64_t scenario_seed) {
        ++run_index;
        if (opt.seed_override == 0) return scenario_seed;
        return opt.seed_override + 0x9e3779b97f4a7c15ULL * run_index;
    }
    void add(std::string name, bool pass, double value, double tol, std::string detail) {
        rep.checks.push_back({std::move(name), pass, value, tol, std::move(detail)});
    }
    Table& table(const std::string& name, std::vector<std::string> header) {
        for (auto& t : rep.tables)
            if (t.name == name) return t;
        rep.tables.push_back({name, std::move(header), {}});
        return rep.tables.back();
    }
};

// ---------------------------------------------------------------- trees ----

EventTree parse_tree(const json& spec, const std::string& where) {
    expect_keys(spec, {"type", "parents", "probabilities", "depth", "branching"}, where);
    std::string type = get_or<std::string>(spec, "type", "explicit");
    if (type == "explicit") {
        auto parents = spec.at("parents").get<std::vector<int>>();
        auto probs = spec.at("probabilities").get<std::vector<double>>();
        return EventTree::from_parents(parents, probs);
    }
    if (type == "regular") {
        int depth = spec.at("depth").get<int>();
        int branching = spec.at("branching").get<int>();
        std::vector<double> child_probs =
            get_or<std::vector<double>>(spec, "probabilities", {});
        return EventTree::regular(depth, branching, child_probs);
    }
    throw validation_error(where + ": unknown tree type \"" + type + "\"");
}

EventTree random_tree(std::mt19937_64& rng, int max_depth, int max_branching) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<int> parents{-1};
    std::vector<double> probs{1.0};
    std::vector<int> depth{0};
    std::vector<int> frontier{0};
    while (!frontier.empty()) {
        std::vector<int> next;
        for (int node : frontier) {
            if (depth[node] >= max_depth) continue;
            int kids;
            if (node == 0) {
                kids = 2 + static_cast<int>(unit(rng) * (max_branching - 1));
                kids = std::min(kids, max_branching);
            } else {
                double u = unit(rng);
                kids = (u < 0.25) ? 0 : 1 + static_cast<int>(unit(rng) * max_branching);
                kids = std::min(kids, max_branching);
            }
            if (kids == 0) continue;
            std::vector<double> raw(kids);
            double total = 0.0;
            for (auto& r : raw) {
                r = 0.2 + 0.8 * unit(rng);
                total += r;
            }
            for (int c = 0; c < kids; ++c) {
                parents.push_back(node);
                probs.push_back(raw[c] / total);
                depth.push_back(depth[node] + 1);
                next.push_back(static_cast<int>(parents.size()) - 1);
            }
        }
        frontier = std::move(next);
    }
    return EventTree::from_parents(parents, probs);
}

std::vector<double> random_measure(std::mt19937_64& rng, const EventTree& tree) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> q(tree.size(), 0.0);
    double total = 0.0;
    for (std::size_t v = 0; v < tree.size(); ++v) {
        if (unit(rng) < 0.4) {
            q[v] = unit(rng);
            total += q[v];
        }
    }
    if (total <= 0.0) {
        int leaf = tree.leaves()[static_cast<std::size_t>(unit(rng) * tree.leaves().size()) %
                                 tree.leaves().size()];
        q[leaf] = 1.0;
        total = 1.0;
    }
    for (auto& m : q) m /= total;
    return q;
}

// random time: an arbitrary measurable assignment leaf -> time on the path,
// one entry per leaf in tree.leaves() order
std::vector<int> random_time(std::mt19937_64& rng, const EventTree& tree) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<int> T(tree.leaves().size(), 0);
    for (std::size_t i = 0; i < T.size(); ++i) {
        int t = tree.node(tree.leaves()[i]).time;
        T[i] = static_cast<int>(unit(rng) * (t + 1));
        if (T[i] > t) T[i] = t;
    }
    return T;
}

// ---------------------------------------------------------------- static ----

void run_static(const json& sc, Ctx& ctx) {
    expect_keys(sc, {"version", "kind", "name", "p_values", "tolerance"}, "static scenario");
    auto p_values = get_or<std::vector<double>>(sc, "p_values", {0.1, 0.3, 0.5});
    double tol = get_or<double>(sc, "tolerance", 1e-12) * ctx.scale();

    auto& tab = ctx.table("counterexamples", {"p", "quantity", "value", "expected"});
    double worst_pair = 0.0, worst_triple = 0.0, worst_flip = 0.0, worst_inv = 0.0;
    bool shapes_ok = true, insurance_ok = true, chain_ok = true;
    std::string detail;

    for (double p : p_values) {
        CounterexampleSuite s = counterexample_suite(p);
        const FiniteSpace& sp = s.space;

        double r_fg = rel(sp, s.incomparable_f, s.incomparable_g);
        double r_gf = rel(sp, s.incomparable_g, s.incomparable_f);
        worst_pair = std::max(worst_pair, std::abs(r_fg - s.incomparable_rel_fg));
        worst_pair = std::max(worst_pair, std::abs(r_gf - s.incomparable_rel_gf));
        if (compare(sp, s.incomparable_f, s.incomparable_g) != Comparison::incomparable) {
            shapes_ok = false;
            detail = "pair at p=" + fmt(p, "%g") + " not incomparable";
        }
        if (!(r_gf > -r_fg)) {
            shapes_ok = false;
            detail = "strict gap fails at p=" + fmt(p, "%g");
        }
        tab.rows.push_back({fmt(p, "%g"), "rel(f|g)", fmt(r_fg), fmt(s.incomparable_rel_fg)});
        tab.rows.push_back({fmt(p, "%g"), "rel(g|f)", fmt(r_gf), fmt(s.incomparable_rel_gf)});

        double t_fg = rel(sp, s.triple_f, s.triple_g);
        double t_gh = rel(sp, s.triple_g, s.triple_h);
        double t_fh = rel(sp, s.triple_f, s.triple_h);
        worst_triple = std::max({worst_triple, std::abs(t_fg - s.triple_rel_fg),
                                 std::abs(t_gh - s.triple_rel_gh),
                                 std::abs(t_fh - s.triple_rel_fh)});
        if (!(prefers(sp, s.triple_g, s.triple_f) && prefers(sp, s.triple_h, s.triple_g) &&
              t_fh > 0.0)) {
            shapes_ok = false;
            detail = "triple shape fails at p=" + fmt(p, "%g");
        }
        tab.rows.push_back({fmt(p, "%g"), "rel(f|h)", fmt(t_fh), fmt(s.triple_rel_fh)});

        double f_fg = rel(sp, s.flip_f, s.flip_g);
        Outcome f1 = s.flip_f, g1 = s.flip_g;
        for (auto& v : f1) v += 1.0;
        for (auto& v : g1) v += 1.0;
        double f_shift = rel(sp, g1, f1);
        worst_flip = std::max(worst_flip, std::abs(f_fg - s.flip_rel_fg));
        worst_flip = std::max(worst_flip, std::abs(f_shift - s.flip_rel_g1_f1));
        if (!(prefers(sp, s.flip_g, s.flip_f) && f_shift < 0.0)) {
            shapes_ok = false;
            detail = "shift flip fails at p=" + fmt(p, "%g");
        }
        tab.rows.push_back({fmt(p, "%g"), "rel(g+1|f+1)", fmt(f_shift), fmt(s.flip_rel_g1_f1)});

        // numeraire invariance under a strictly positive deflator
        Outcome h = {1.0 + p, 2.0 - p};
        Outcome fh = s.incomparable_f, gh = s.incomparable_g;
        for (std::size_t i = 0; i < fh.size(); ++i) {
            fh[i] /= h[i];
            gh[i] /= h[i];
        }
        worst_inv = std::max(worst_inv, std::abs(rel(sp, fh, gh) - r_fg));

        InsuranceResult ins = insurance_level(sp, s.flip_f, s.flip_g);
        bool minimal = true;
        if (ins.level >= 1) {
            // one indemnity unit fewer must not yet flip the comparison
            Outcome fi = s.flip_f, gi = s.flip_g;
            double n = static_cast<double>(ins.level - 1);
            for (std::size_t i = 0; i < fi.size(); ++i) {
                double add = s.flip_f[i] <= s.flip_g[i] ? n * s.flip_g[i] : 0.0;
                fi[i] += add;
                gi[i] += add;
            }
            minimal = rel(sp, gi, fi) >= -1e-12;
        }
        if (!(ins.rel_at_level < 0.0 && minimal)) {
            insurance_ok = false;
            detail = "insurance level not minimal at p=" + fmt(p, "%g");
        }
        tab.rows.push_back({fmt(p, "%g"), "insurance_level",
                            fmt(static_cast<double>(ins.level), "%g"), "-"});
        tab.rows.push_back({fmt(p, "%g"), "insurance_rel", fmt(ins.rel_at_level), "-"});

        ChainReport closed = chain_check(sp, {s.triple_g, s.triple_g, s.triple_g});
        ChainReport broken = chain_check(sp, {s.incomparable_f, s.incomparable_g,
                                              s.incomparable_f});
        if (!(closed.links_ok && closed.all_equal) || broken.links_ok) {
            chain_ok = false;
            detail = "cycle analysis fails at p=" + fmt(p, "%g");
        }
    }

    ctx.add("static/frozen_values", worst_pair <= tol && worst_triple <= tol &&
            worst_flip <= tol, std::max({worst_pair, worst_triple, worst_flip}), tol,
            "pinned counterexample evaluations");
    ctx.add("static/comparison_shapes", shapes_ok, shapes_ok ? 0.0 : 1.0, 0.0,
            shapes_ok ? "incomparability, intransitivity, shift flip" : detail);
    ctx.add("static/numeraire_invariance", worst_inv <= tol, worst_inv, tol,
            "rel unchanged under strictly positive deflators");
    ctx.add("static/insurance", insurance_ok, insurance_ok ? 0.0 : 1.0, 0.0,
            insurance_ok ? "minimal pooling level makes the pool preferred" : detail);
    ctx.add("static/preference_cycles", chain_ok, chain_ok ? 0.0 : 1.0, 0.0,
            chain_ok ? "closed preference cycles force equality" : detail);
}

// ---------------------------------------------------------------- choice ----

void run_choice(const json& sc, Ctx& ctx) {
    expect_keys(sc,
                {"version", "kind", "name", "seed", "n_spaces", "atoms_min", "atoms_max",
                 "tolerance", "certificate_tolerance", "recovery_spaces",
                 "recovery_regenerations", "examples"},
                "choice scenario");
    std::uint64_t seed = ctx.seed(get_or<std::uint64_t>(sc, "seed", 91));
    int n_spaces = get_or<int>(sc, "n_spaces", 50);
    int amin = get_or<int>(sc, "atoms_min", 2);
    int amax = get_or<int>(sc, "atoms_max", 8);
    double tol = get_or<double>(sc, "tolerance", 1e-8) * ctx.scale();
    double cert_tol = get_or<double>(sc, "certificate_tolerance", 1e-9) * ctx.scale();
    int n_recovery = get_or<int>(sc, "recovery_spaces", n_spaces);
    int n_regen = get_or<int>(sc, "recovery_regenerations", 20);
    bool examples = get_or<bool>(sc, "examples", true);
    if (amin < 1 || amax < amin) throw validation_error("choice scenario: bad atom range");

    if (examples) {
        double worst = 0.0;
        FiniteSpace sp({0.2, 0.5, 0.3});
        std::vector<double> mu = {0.5, 2.0, 1.25};
        auto res = log_optimal(sp, Polytope::full_simplex(mu), 1e-12);
        for (std::size_t i = 0; i < 3; ++i)
            worst = std::max(worst, std::abs(res.f_hat[i] - sp.weight(i) / mu[i]));

        // unit box: the top corner dominates, so the optimum is all ones
        std::vector<HalfSpace> box;
        for (std::size_t i = 0; i < 3; ++i) {
            HalfSpace h;
            h.a.assign(3, 0.0);
            h.a[i] = 1.0;
            h.b = 1.0;
            box.push_back(h);
        }
        auto res_box = log_optimal(sp, Polytope::from_halfspaces(3, box), 1e-12);
        for (std::size_t i = 0; i < 3; ++i)
            worst = std::max(worst, std::abs(res_box.f_hat[i] - 1.0));

        // collinear vertices: the optimum payoff is unique even when the
        // hull coefficients are not
        FiniteSpace half({0.5, 0.5});
        auto res_tri = log_optimal(
            half, Polytope::from_vertices({{2.0, 0.0}, {0.0, 2.0}, {1.0, 1.0}}), 1e-12);
        for (std::size_t i = 0; i < 2; ++i)
            worst = std::max(worst, std::abs(res_tri.f_hat[i] - 1.0));

        ctx.add("choice/named_examples", worst <= tol, worst, tol,
                "budget simplex, unit box, collinear hull");
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst_opt = 0.0, worst_cert = 0.0, worst_vertex = 0.0;
    bool classify_ok = true;
    for (int k = 0; k < n_spaces; ++k) {
        int n = amin + static_cast<int>(unit(rng) * (amax - amin + 1));
        n = std::min(n, amax);
        std::vector<double> w(n), mu(n);
        double total = 0.0;
        for (auto& x : w) {
            x = 0.05 + 0.95 * unit(rng);
            total += x;
        }
        for (auto& x : w) x /= total;
        for (auto& m : mu) m = std::exp((2.0 * unit(rng) - 1.0) * std::log(3.0));
        FiniteSpace sp(w);
        Polytope simplex = Polytope::full_simplex(mu);
        auto res = log_optimal(sp, simplex, 1e-12);
        for (int i = 0; i < n; ++i)
            worst_opt = std::max(worst_opt,
                                 std::abs(res.f_hat[i] - w[i] / mu[i]) /
                                     std::max(1.0, w[i] / mu[i]));
        worst_cert = std::max(worst_cert, res.certificate);
        for (const auto& v : simplex.vertices()) {
            bool zero = std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
            if (!zero) worst_vertex = std::max(worst_vertex, rel(sp, v, res.f_hat));
        }

        auto cls_max = simplex_classify(mu, res.f_hat);
        if (cls_max.position != SimplexPosition::maximal) classify_ok = false;
        Outcome inner = res.f_hat;
        for (auto& x : inner) x *= 0.5;
        auto cls_in = simplex_classify(mu, inner);
        if (cls_in.position != SimplexPosition::interior) classify_ok = false;
        if (cls_in.position == SimplexPosition::interior) {
            for (int i = 0; i < n; ++i)
                if (std::abs(cls_in.maximal_representative[i] - res.f_hat[i]) > tol)
                    classify_ok = false;
        }
        Outcome outer = res.f_hat;
        for (auto& x : outer) x *= 2.0;
        if (simplex_classify(mu, outer).position != SimplexPosition::exterior)
            classify_ok = false;
    }
    ctx.add("choice/simplex_optima", worst_opt <= tol, worst_opt, tol,
            fmt(static_cast<double>(n_spaces), "%g") + " random spaces, closed form w/mu");
    ctx.add("choice/certificates", worst_cert <= cert_tol && worst_vertex <= cert_tol,
            std::max(worst_cert, worst_vertex), cert_tol,
            "optimality certificates and vertex comparisons");
    ctx.add("choice/classification", classify_ok, classify_ok ? 0.0 : 1.0, 0.0,
            "maximal / interior / exterior positions with representatives");

    double worst_rec = 0.0;
    bool rec_ok = true;
    std::string rec_detail;
    for (int k = 0; k < n_recovery; ++k) {
        int n = amin + static_cast<int>(unit(rng) * (amax - amin + 1));
        n = std::min(n, amax);
        std::vector<double> w(n);
        double total = 0.0;
        for (auto& x : w) {
            x = 0.05 + 0.95 * unit(rng);
            total += x;
        }
        for (auto& x : w) x /= total;
        FiniteSpace sp(w);
        auto rec = recover_probability(oracle_from_space(sp), n, n_regen,
                                       seed + 1000 + k);
        if (!rec.consistent) {
            rec_ok = false;
            rec_detail = rec.violation;
            continue;
        }
        for (int i = 0; i < n; ++i)
            worst_rec = std::max(worst_rec, std::abs(rec.probability[i] - w[i]));
        worst_rec = std::max(worst_rec, rec.max_regeneration_error);
    }
    ctx.add("choice/recovery", rec_ok && worst_rec <= tol, worst_rec, tol,
            rec_ok ? "round trip probability -> oracle -> probability" : rec_detail);

    // oracles that break the axioms must be flagged, not rationalised
    bool viol_ok = true;
    {
        ChoiceOracle greedy = [](const std::vector<double>& mu) {
            std::size_t j = 0;
            for (std::size_t i = 1; i < mu.size(); ++i)
                if (mu[i] < mu[j]) j = i;
            Outcome f(mu.size(), 0.0);
            f[j] = 1.0 / mu[j];
            return f;
        };
        auto rec = recover_probability(greedy, 3, 5, seed + 77);
        if (rec.consistent) viol_ok = false;

        ChoiceOracle barycenter = [](const std::vector<double>& mu) {
            std::size_t n = mu.size();
            Outcome f(n, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                f[i] = 1.0 / (mu[i] * static_cast<double>(n + 1));
            return f;
        };
        auto rec2 = recover_probability(barycenter, 3, 5, seed + 78);
        if (rec2.consistent) viol_ok = false;
    }
    ctx.add("choice/violation_detection", viol_ok, viol_ok ? 0.0 : 1.0, 0.0,
            "greedy and budget-wasting oracles are rejected");
}

// ------------------------------------------------------------- decompose ----

void run_decompose(const json& sc, Ctx& ctx) {
    expect_keys(sc,
                {"version", "kind", "name", "tree", "measure", "random", "perturbation",
                 "adapted_checks", "tolerance", "drift_tolerance"},
                "decompose scenario");
    double tol = get_or<double>(sc, "tolerance", 1e-12) * ctx.scale();
    double drift_tol = get_or<double>(sc, "drift_tolerance", 1e-10) * ctx.scale();
    int adapted_checks = get_or<int>(sc, "adapted_checks", 50);

    bool have_explicit = sc.contains("tree");
    EventTree base = have_explicit ? parse_tree(sc.at("tree"), "decompose tree")
                                   : EventTree::regular(3, 2);
    std::vector<double> base_q;
    if (sc.contains("measure")) {
        base_q = sc.at("measure").get<std::vector<double>>();
    } else {
        std::mt19937_64 mg(4);
        base_q = random_measure(mg, base);
    }
    check_optional_measure(base, base_q);

    CanonicalPair pair = decompose_measure(base, base_q);
    PairReport rep = verify_pair(base, pair.H, pair);
    double worst = std::max({rep.root_l_error, rep.negativity_error,
                             rep.k_monotone_error, rep.k_range_error,
                             rep.lk_identity_error, rep.dh_identity_error,
                             rep.frozen_l_error, rep.dk_at_dead_error,
                             rep.leaf_exhaust_error, rep.pathwise_error});
    ctx.add("decompose/pair_identities", worst <= tol, worst, tol,
            "multiplicative and additive structure of the canonical pair");
    ctx.add("decompose/martingale_drift", rep.martingale_drift <= drift_tol,
            rep.martingale_drift, drift_tol,
            "conditional expectations of the deflator are flat");

    std::vector<double> back = pair_to_measure(base, pair);
    double rt = 0.0;
    for (std::size_t v = 0; v < base.size(); ++v)
        rt = std::max(rt, std::abs(back[v] - base_q[v]));
    ctx.add("decompose/measure_roundtrip", rt <= tol, rt, tol,
            "measure -> pair -> measure is the identity");

    auto& nodes = ctx.table("decompose_nodes",
                            {"node", "parent", "time", "prob", "dH", "H", "M", "Z", "dK",
                             "K", "L"});
    for (std::size_t v = 0; v < base.size(); ++v) {
        const TreeNode& nd = base.node(static_cast<int>(v));
        nodes.rows.push_back({std::to_string(v), std::to_string(nd.parent),
                              std::to_string(nd.time), fmt(nd.prob), fmt(pair.dH[v]),
                              fmt(pair.H[v]), fmt(pair.M[v]), fmt(pair.Z[v]),
                              fmt(pair.dK[v]), fmt(pair.K[v]), fmt(pair.L[v])});
    }

    // sampling identity: E[V_T] equals the optional sum against dH for the
    // projection of arbitrary random times, adapted integrands
    std::mt19937_64 rng(ctx.seed(12));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst_sample = 0.0;
    for (int k = 0; k < adapted_checks; ++k) {
        std::vector<int> T = random_time(rng, base);
        DualProjection proj = dual_optional_projection(base, T);
        std::vector<double> V(base.size());
        for (auto& x : V) x = 2.0 * unit(rng);
        double direct = expectation_at(base, V, T);
        double optional = optional_sum(base, V, proj.dH);
        worst_sample = std::max(worst_sample, std::abs(direct - optional) /
                                                  std::max(1.0, std::abs(direct)));
        double mass = 0.0;
        for (std::size_t v = 0; v < base.size(); ++v)
            mass += base.node(static_cast<int>(v)).prob * proj.dH[v];
        worst_sample = std::max(worst_sample, std::abs(mass - 1.0));
    }
    ctx.add("decompose/sampling_identity", worst_sample <= tol, worst_sample, tol,
            fmt(static_cast<double>(adapted_checks), "%g") + " random times and integrands");

    if (sc.contains("random")) {
        const json& rspec = sc.at("random");
        expect_keys(rspec, {"n_trees", "max_depth", "max_branching", "seed"},
                    "decompose random batch");
        int n_trees = get_or<int>(rspec, "n_trees", 50);
        int max_depth = get_or<int>(rspec, "max_depth", 5);
        int max_branching = get_or<int>(rspec, "max_branching", 3);
        std::mt19937_64 rg(ctx.seed(get_or<std::uint64_t>(rspec, "seed", 2024)));
        double batch_worst = 0.0, batch_drift = 0.0, batch_rt = 0.0;
        for (int k = 0; k < n_trees; ++k) {
            EventTree tr = random_tree(rg, max_depth, max_branching);
            std::vector<double> q;
            if (k % 3 == 2) {
                std::vector<int> T = random_time(rg, tr);
                DualProjection proj = dual_optional_projection(tr, T);
                q.assign(tr.size(), 0.0);
                for (std::size_t v = 0; v < tr.size(); ++v)
                    q[v] = tr.node(static_cast<int>(v)).prob * proj.dH[v];
            } else {
                q = random_measure(rg, tr);
            }
            CanonicalPair pr = decompose_measure(tr, q);
            PairReport prr = verify_pair(tr, pr.H, pr);
            batch_worst = std::max(
                batch_worst,
                std::max({prr.root_l_error, prr.negativity_error, prr.k_monotone_error,
                          prr.k_range_error, prr.lk_identity_error,
                          prr.dh_identity_error, prr.frozen_l_error,
                          prr.dk_at_dead_error, prr.leaf_exhaust_error,
                          prr.pathwise_error}));
            batch_drift = std::max(batch_drift, prr.martingale_drift);
            std::vector<double> rq = pair_to_measure(tr, pr);
            for (std::size_t v = 0; v < tr.size(); ++v)
                batch_rt = std::max(batch_rt, std::abs(rq[v] - q[v]));
        }
        ctx.add("decompose/random_batch", batch_worst <= tol && batch_rt <= tol,
                std::max(batch_worst, batch_rt), tol,
                fmt(static_cast<double>(n_trees), "%g") + " random trees and measures");
        ctx.add("decompose/random_batch_drift", batch_drift <= drift_tol, batch_drift,
                drift_tol, "deflator martingale property over the batch");
    }

    if (sc.contains("perturbation")) {
        const json& pspec = sc.at("perturbation");
        expect_keys(pspec, {"eps", "final_bound"}, "decompose perturbation");
        auto eps = get_or<std::vector<double>>(pspec, "eps", {1e-2, 1e-3, 1e-4});
        double final_bound = get_or<double>(pspec, "final_bound", 1e-3) * ctx.scale();
        auto gaps = perturbation_convergence(base, measure_to_H(base, base_q).H, eps);
        auto& ptab = ctx.table("perturbation", {"eps", "k_gap", "l_gap"});
        bool monotone = true;
        for (std::size_t i = 0; i < eps.size(); ++i) {
            ptab.rows.push_back({fmt(eps[i], "%g"), fmt(gaps[i].k_gap), fmt(gaps[i].l_gap)});
            if (i > 0 && (gaps[i].k_gap > gaps[i - 1].k_gap ||
                          gaps[i].l_gap > gaps[i - 1].l_gap))
                monotone = false;
        }
        double last = std::max(gaps.back().k_gap, gaps.back().l_gap);
        ctx.add("decompose/perturbation", monotone && last <= final_bound, last,
                final_bound, "strict-drift approximations collapse onto the pair");
    }
}

// ---------------------------------------------------------------- market ----

Market random_market(std::mt19937_64& rng, int max_assets, int depth) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int branching = 2 + static_cast<int>(unit(rng) * 2.0);
    branching = std::min(branching, 3);
    std::vector<double> cp(branching);
    double total = 0.0;
    for (auto& c : cp) {
        c = 0.2 + 0.8 * unit(rng);
        total += c;
    }
    for (auto& c : cp) c /= total;
    EventTree tree = EventTree::regular(depth, branching, cp);
    int d = 1 + static_cast<int>(unit(rng) * max_assets);
    d = std::min(d, max_assets);
    std::vector<NodeProcess> prices(d, NodeProcess(tree.size(), 1.0));
    for (std::size_t v = 1; v < tree.size(); ++v) {
        int par = tree.node(static_cast<int>(v)).parent;
        for (int a = 0; a < d; ++a)
            prices[a][v] = prices[a][par] * (0.7 + 0.7 * unit(rng));
    }
    return make_market(tree, prices);
}

void run_market(const json& sc, Ctx& ctx) {
    expect_keys(sc,
                {"version", "kind", "name", "seed", "random", "sweep", "random_times",
                 "node_tolerance", "stream_tolerance", "time_tolerance", "utility_checks"},
                "market scenario");
    std::uint64_t seed = ctx.seed(get_or<std::uint64_t>(sc, "seed", 7));
    double node_tol = get_or<double>(sc, "node_tolerance", 1e-11) * ctx.scale();
    double stream_tol = get_or<double>(sc, "stream_tolerance", 1e-9) * ctx.scale();
    double time_tol = get_or<double>(sc, "time_tolerance", 1e-9) * ctx.scale();
    int n_times = get_or<int>(sc, "random_times", 5);
    int utility_checks = get_or<int>(sc, "utility_checks", 20);

    int n_markets = 5, max_assets = 3, depth = 3;
    if (sc.contains("random")) {
        const json& rspec = sc.at("random");
        expect_keys(rspec, {"n_markets", "max_assets", "depth"}, "market random batch");
        n_markets = get_or<int>(rspec, "n_markets", n_markets);
        max_assets = get_or<int>(rspec, "max_assets", max_assets);
        depth = get_or<int>(rspec, "depth", depth);
    }
    int sweep_random = 100, sweep_cap = 10000;
    if (sc.contains("sweep")) {
        const json& sspec = sc.at("sweep");
        expect_keys(sspec, {"n_random", "cap"}, "market sweep");
        sweep_random = get_or<int>(sspec, "n_random", sweep_random);
        sweep_cap = get_or<int>(sspec, "cap", sweep_cap);
    }

    std::mt19937_64 rng(seed);
    double worst_cert = 0.0, worst_sweep = -1.0, worst_budget = 0.0, worst_time = 0.0;
    bool times_pass = true, utility_ok = true;
    double worst_utility = 0.0;
    auto& mtab = ctx.table("market_summary",
                           {"market", "assets", "nodes", "certificate", "sweep_worst",
                            "time_worst"});

    for (int k = 0; k < n_markets; ++k) {
        Market mkt = random_market(rng, max_assets, depth);
        std::vector<double> q = random_measure(rng, mkt.tree);
        ConsumptionPlan plan = optimal_consumption(mkt, q, 1.0, node_tol);
        worst_cert = std::max(worst_cert, plan.growth.worst_certificate);

        SweepResult sweep = consumption_optimality_sweep(
            mkt, plan, q, sweep_random, seed + 31 * (k + 1), sweep_cap);
        worst_sweep = std::max(worst_sweep, sweep.worst_rel);

        // the plan is self-financing and exhausts wealth wherever mass lives:
        // funding wealth recomputed step by step must equal x * x_hat * (1-K)
        // and vanish at leaves that still carry deflator mass
        {
            std::vector<double> w(mkt.tree.size(), 0.0);
            for (std::size_t v = 0; v < mkt.tree.size(); ++v) {
                int par = mkt.tree.node(static_cast<int>(v)).parent;
                double grown = plan.capital;
                if (par >= 0) {
                    double mult = 1.0;
                    for (std::size_t a = 0; a < mkt.prices.size(); ++a)
                        mult += plan.growth.pi.pi[par][a] *
                                (mkt.prices[a][v] / mkt.prices[a][par] - 1.0);
                    grown = w[par] * mult;
                }
                w[v] = grown - plan.dc[v];
                double want = plan.capital * plan.growth.x_hat[v] *
                              (1.0 - plan.pair.K[v]);
                worst_budget = std::max(worst_budget, std::abs(w[v] - want) /
                                                          std::max(1.0, std::abs(want)));
            }
            for (int leaf : mkt.tree.leaves())
                if (plan.pair.L[leaf] > 1e-12)
                    worst_budget = std::max(worst_budget, std::abs(w[leaf]));
        }

        double mkt_time_worst = 0.0;
        for (int t = 0; t < n_times; ++t) {
            std::vector<int> T = random_time(rng, mkt.tree);
            RandomTimeReport rt = random_time_check(mkt, T, 40, seed + 101 * (t + 1),
                                                    time_tol, node_tol);
            if (!rt.pass) times_pass = false;
            mkt_time_worst = std::max(mkt_time_worst, rt.worst_expectation - 1.0);
        }
        worst_time = std::max(worst_time, mkt_time_worst);

        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int u = 0; u < utility_checks; ++u) {
            std::vector<double> F(mkt.tree.size(), 0.0);
            for (std::size_t v = 0; v < mkt.tree.size(); ++v) {
                int par = mkt.tree.node(static_cast<int>(v)).parent;
                double fp = par < 0 ? 0.0 : F[par];
                F[v] = plan.pair.dK[v] > 0.0 ? fp + unit(rng) * (1.0 - fp) : fp;
            }
            double val = utility_functional(mkt.tree, q, F,
                                            [](double x) { return std::sqrt(x); });
            worst_utility = std::max(worst_utility, val);
            if (val > 1.0 + stream_tol) utility_ok = false;
        }
        double at_k = utility_functional(mkt.tree, q, plan.pair.K,
                                         [](double x) { return std::sqrt(x); });
        if (std::abs(at_k - 1.0) > 1e-9 * ctx.scale()) utility_ok = false;

        mtab.rows.push_back({std::to_string(k), std::to_string(mkt.prices.size()),
                             std::to_string(mkt.tree.size()),
                             fmt(plan.growth.worst_certificate), fmt(sweep.worst_rel),
                             fmt(mkt_time_worst)});
    }

    ctx.add("market/growth_certificates", worst_cert <= node_tol, worst_cert, node_tol,
            "per node optimality of the benchmark portfolio");
    ctx.add("market/consumption_sweep", worst_sweep <= stream_tol, worst_sweep, stream_tol,
            "no competing plan beats the canonical consumption stream");
    ctx.add("market/self_financing", worst_budget <= stream_tol, worst_budget, stream_tol,
            "the plan funds itself and leaves nothing on live branches");
    ctx.add("market/random_time_bound", times_pass && worst_time <= time_tol,
            worst_time, time_tol, "sampled wealth ratios stay supermartingale-bounded");
    ctx.add("market/utility_bound", utility_ok, worst_utility, 1.0 + stream_tol,
            "concave utilities of spending rates peak at the canonical clock");

    // a market whose returns dominate cash admits unbounded growth
    bool viability_ok = false;
    try {
        EventTree tr = EventTree::regular(1, 2);
        std::vector<NodeProcess> prices = {{1.0, 1.2, 1.05}};
        Market bad = make_market(tr, prices,
                                 Polytope::from_halfspaces(1, {}, true));
        std::vector<double> q(tr.size(), 0.0);
        q[1] = tr.node(1).prob;
        q[2] = tr.node(2).prob;
        optimal_consumption(bad, q, 1.0, node_tol);
    } catch (const viability_error&) {
        viability_ok = true;
    }
    ctx.add("market/viability_detection", viability_ok, viability_ok ? 0.0 : 1.0, 0.0,
            "free lunches are reported, not optimised");

    // consumption without assets follows the sampling clock exactly
    {
        EventTree tr = EventTree::regular(2, 2);
        std::mt19937_64 mg(seed + 5);
        std::vector<double> q = random_measure(mg, tr);
        Market pure = make_market(tr, std::vector<NodeProcess>{});
        ConsumptionPlan plan = optimal_consumption(pure, q, 1.0, node_tol);
        double dev = 0.0;
        for (std::size_t v = 0; v < tr.size(); ++v)
            dev = std::max(dev, std::abs(plan.dc[v] - plan.pair.dK[v]));
        ctx.add("market/pure_consumption", dev <= stream_tol, dev, stream_tol,
                "with no assets the plan spends along the sampling clock");
    }
}

// -------------------------------------------------------------------- mc ----

void run_mc(const json& sc, Ctx& ctx) {
    expect_keys(sc, {"version", "kind", "name", "runs"}, "mc scenario");
    if (!sc.contains("runs") || !sc.at("runs").is_array())
        throw validation_error("mc scenario: \"runs\" must be an array");

    for (const json& run : sc.at("runs")) {
        expect_keys(run,
                    {"name", "generator", "n_paths", "dt", "horizon", "sigma", "seed",
                     "stop_level", "fractions", "checks", "determinism"},
                    "mc run");
        std::string name = get_or<std::string>(run, "name", "run");
        McConfig cfg;
        std::string gen = run.at("generator").get<std::string>();
        if (gen == "gbm_martingale")
            cfg.generator = McConfig::Generator::gbm_martingale;
        else if (gen == "inverse_bessel3")
            cfg.generator = McConfig::Generator::inverse_bessel3;
        else
            throw validation_error("mc run: unknown generator \"" + gen + "\"");
        cfg.n_paths = run.at("n_paths").get<long>();
        cfg.dt = get_or<double>(run, "dt", 1e-3);
        cfg.horizon = get_or<double>(run, "horizon", 20.0);
        cfg.sigma = get_or<double>(run, "sigma", 1.0);
        cfg.seed = ctx.seed(get_or<std::uint64_t>(run, "seed", 1));
        cfg.stop_level = get_or<double>(run, "stop_level", 0.004);
        cfg.strategy_fractions = get_or<std::vector<double>>(run, "fractions", {});
        cfg.threads = ctx.opt.threads;

        PathEnsemble ens = simulate(cfg);

        const json checks = get_or<json>(run, "checks", json::object());
        expect_keys(checks, {"doob", "exp_law", "min_time"}, "mc run checks");

        if (checks.contains("doob")) {
            const json& dspec = checks.at("doob");
            expect_keys(dspec, {"gammas", "band"}, "doob check");
            auto gammas = get_or<std::vector<double>>(dspec, "gammas", {2.0, 4.0, 8.0});
            double band = get_or<double>(dspec, "band", 0.02) * ctx.scale();
            auto rows = doob_identity_check(ens, gammas);
            auto& tab = ctx.table("mc_doob",
                                  {"run", "gamma", "estimate", "target", "std_error",
                                   "abs_error"});
            double worst = 0.0;
            for (const auto& r : rows) {
                tab.rows.push_back({name, fmt(r.gamma, "%g"), fmt(r.estimate),
                                    fmt(r.target), fmt(r.std_error), fmt(r.abs_error)});
                worst = std::max(worst, r.abs_error);
            }
            ctx.add("mc/" + name + "/doob", worst <= band, worst, band,
                    "running-maximum exceedance matches the reciprocal law");
        }
        if (checks.contains("exp_law")) {
            const json& espec = checks.at("exp_law");
            expect_keys(espec, {"mean_band", "ks_slack"}, "exp_law check");
            double mean_band = get_or<double>(espec, "mean_band", 0.03) * ctx.scale();
            double ks_slack = get_or<double>(espec, "ks_slack", 0.01) * ctx.scale();
            ExpLawReport er = exp_law_check(ens, mean_band, ks_slack);
            auto& tab = ctx.table("mc_exp_law",
                                  {"run", "mean_log_sup", "std_error", "ks_statistic",
                                   "ks_bound", "tail_completion"});
            tab.rows.push_back({name, fmt(er.mean_log_sup), fmt(er.mean_std_error),
                                fmt(er.ks_statistic), fmt(er.ks_bound),
                                fmt(er.tail_completion_fraction)});
            ctx.add("mc/" + name + "/exp_law",
                    er.mean_ok && er.ks_ok && er.k_terminal_ok,
                    std::max(std::abs(er.mean_log_sup - 1.0), er.ks_statistic),
                    std::max(mean_band, er.ks_bound),
                    "log of the overall maximum is standard exponential");
        }
        if (checks.contains("min_time")) {
            const json& mspec = checks.at("min_time");
            expect_keys(mspec, {"band"}, "min_time check");
            double band = get_or<double>(mspec, "band", 0.02) * ctx.scale();
            MinTimeReport mr = min_time_market_check(ens, band);
            auto& tab = ctx.table("mc_min_time",
                                  {"run", "fraction", "mean_wealth", "std_error", "pass"});
            bool rows_ok = true;
            for (const auto& r : mr.rows) {
                tab.rows.push_back({name, fmt(r.fraction, "%g"), fmt(r.mean_wealth),
                                    fmt(r.std_error), r.pass ? "1" : "0"});
                rows_ok = rows_ok && r.pass;
            }
            ctx.add("mc/" + name + "/min_time", mr.price_ok && rows_ok,
                    std::abs(mr.mean_min_price - mr.target), band,
                    "buying at the eventual minimum halves the price on average");
        }
        if (get_or<bool>(run, "determinism", false)) {
            McConfig again = cfg;
            again.threads = std::max(2, cfg.threads);
            PathEnsemble redo = simulate(again);
            bool same = ens.log_sup == redo.log_sup &&
                        ens.log_terminal == redo.log_terminal;
            ctx.add("mc/" + name + "/determinism", same, same ? 0.0 : 1.0, 0.0,
                    "identical trajectories for any thread count");
        }
    }
}

// ---------------------------------------------------------------- driver ----

const char* builtin_scenario(const std::string& kind) {
    if (kind == "static")
        return R"({"version":1,"kind":"static","name":"counterexamples",
                   "p_values":[0.1,0.3,0.5],"tolerance":1e-12})";
    if (kind == "choice")
        return R"({"version":1,"kind":"choice","name":"choice_demo","seed":91,
                   "n_spaces":20,"atoms_min":2,"atoms_max":8,"tolerance":1e-8,
                   "certificate_tolerance":1e-9,"recovery_spaces":10,
                   "recovery_regenerations":20,"examples":true})";
    if (kind == "decompose")
        return R"({"version":1,"kind":"decompose","name":"decompose_smoke",
                   "tree":{"type":"explicit","parents":[-1,0,0,1,1,2,2],
                           "probabilities":[1.0,0.6,0.4,0.5,0.5,0.7,0.3]},
                   "measure":[0.1,0.2,0.0,0.15,0.05,0.3,0.2],
                   "random":{"n_trees":50,"max_depth":5,"max_branching":3,"seed":2024},
                   "perturbation":{"eps":[0.01,0.001,0.0001],"final_bound":0.001},
                   "adapted_checks":50,"tolerance":1e-12,"drift_tolerance":1e-10})";
    if (kind == "market")
        return R"({"version":1,"kind":"market","name":"market_demo","seed":7,
                   "random":{"n_markets":5,"max_assets":3,"depth":3},
                   "sweep":{"n_random":60,"cap":4000},"random_times":3,
                   "node_tolerance":1e-11,"stream_tolerance":1e-9,
                   "time_tolerance":1e-9,"utility_checks":10})";
    if (kind == "mc")
        return R"({"version":1,"kind":"mc","name":"mc_smoke","runs":[
                   {"name":"doob","generator":"gbm_martingale","n_paths":20000,
                    "dt":0.001,"horizon":20.0,"seed":11,
                    "checks":{"doob":{"gammas":[2.0,4.0,8.0],"band":0.02}}},
                   {"name":"exp_gbm","generator":"gbm_martingale","n_paths":20000,
                    "dt":0.000225,"horizon":20.0,"seed":12,
                    "checks":{"exp_law":{"mean_band":0.03,"ks_slack":0.01}}},
                   {"name":"exp_bessel","generator":"inverse_bessel3","n_paths":20000,
                    "dt":0.000225,"horizon":1e9,"seed":13,"stop_level":0.004,
                    "checks":{"exp_law":{"mean_band":0.03,"ks_slack":0.01}}},
                   {"name":"downturn","generator":"gbm_martingale","n_paths":10000,
                    "dt":0.001,"horizon":40.0,"seed":14,"fractions":[0.0,0.5,1.0],
                    "checks":{"min_time":{"band":0.02}}},
                   {"name":"determinism","generator":"inverse_bessel3","n_paths":200,
                    "dt":0.001,"horizon":5.0,"seed":15,"stop_level":0.01,
                    "determinism":true,"checks":{}}]})";
    return nullptr;
}

void dispatch(const json& sc, Ctx& ctx) {
    if (!sc.is_object()) throw validation_error("scenario: expected a JSON object");
    if (!sc.contains("version"))
        throw validation_error("scenario: missing \"version\"");
    if (!sc.at("version").is_number_integer() || sc.at("version").get<int>() != 1)
        throw validation_error("scenario: unsupported version");
    if (!sc.contains("kind")) throw validation_error("scenario: missing \"kind\"");
    std::string kind = sc.at("kind").get<std::string>();
    if (kind == "static")
        run_static(sc, ctx);
    else if (kind == "choice")
        run_choice(sc, ctx);
    else if (kind == "decompose")
        run_decompose(sc, ctx);
    else if (kind == "market")
        run_market(sc, ctx);
    else if (kind == "mc")
        run_mc(sc, ctx);
    else
        throw validation_error("scenario: unknown kind \"" + kind + "\"");
}

}  // namespace

bool RunReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const CheckOutcome& c) { return c.pass; });
}

RunReport run_builtin(const std::string& kind, const RunOptions& options) {
    RunReport rep;
    rep.command = kind;
    rep.seed = options.seed_override;
    rep.tol_scale = options.tol_scale;
    Ctx ctx{rep, options};
    if (kind == "all") {
        for (const char* k : {"static", "choice", "decompose", "market", "mc"})
            dispatch(json::parse(builtin_scenario(k)), ctx);
        return rep;
    }
    const char* text = builtin_scenario(kind);
    if (text == nullptr)
        throw validation_error("unknown command \"" + kind + "\"");
    dispatch(json::parse(text), ctx);
    return rep;
}

RunReport run_scenario_file(const std::string& path, const RunOptions& options,
                            const std::string& expected_kind) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open scenario file: " + path);
    json sc;
    try {
        sc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw validation_error("scenario parse error: " + std::string(e.what()));
    }
    if (!expected_kind.empty()) {
        std::string kind = sc.is_object() && sc.contains("kind") && sc["kind"].is_string()
                               ? sc["kind"].get<std::string>()
                               : std::string();
        if (kind != expected_kind)
            throw validation_error("scenario: file kind \"" + kind +
                                   "\" does not match the " + expected_kind +
                                   " subcommand");
    }
    RunReport rep;
    rep.command = path;
    rep.seed = options.seed_override;
    rep.tol_scale = options.tol_scale;
    Ctx ctx{rep, options};
    dispatch(sc, ctx);
    return rep;
}

std::string render_summary(const RunReport& report) {
    std::ostringstream out;
    for (const auto& c : report.checks) {
        out << (c.pass ? "PASS" : "FAIL") << "  " << c.name;
        out << "  value=" << fmt(c.value, "%.6g");
        if (c.tolerance != 0.0) out << "  bound=" << fmt(c.tolerance, "%.6g");
        if (!c.detail.empty()) out << "  (" << c.detail << ")";
        out << "\n";
    }
    std::size_t passed = 0;
    for (const auto& c : report.checks) passed += c.pass ? 1 : 0;
    out << (report.all_pass() ? "OK" : "FAILED") << "  " << passed << "/"
        << report.checks.size() << " checks passed\n";
    return out.str();
}

void write_outputs(const RunReport& report, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(out_dir) / "tables");

    json doc;
    doc["version"] = 1;
    doc["command"] = report.command;
    doc["seed"] = report.seed;
    doc["tol_scale"] = report.tol_scale;
    doc["pass"] = report.all_pass();
    {
        auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char buf[32];
        std::tm tm_utc{};
        gmtime_r(&now, &tm_utc);
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
        doc["generated_at"] = buf;
    }
    doc["checks"] = json::array();
    for (const auto& c : report.checks) {
        json jc;
        jc["name"] = c.name;
        jc["pass"] = c.pass;
        jc["value"] = c.value;
        jc["tolerance"] = c.tolerance;
        jc["detail"] = c.detail;
        doc["checks"].push_back(jc);
    }
    doc["tables"] = json::array();
    for (const auto& t : report.tables) doc["tables"].push_back(t.name);

    std::ofstream(fs::path(out_dir) / "report.json") << doc.dump(2) << "\n";
    std::ofstream(fs::path(out_dir) / "summary.txt") << render_summary(report);
    for (const auto& t : report.tables) {
        std::ofstream csv(fs::path(out_dir) / "tables" / (t.name + ".csv"));
        for (std::size_t i = 0; i < t.header.size(); ++i)
            csv << (i ? "," : "") << t.header[i];
        csv << "\n";
        for (const auto& row : t.rows) {
            for (std::size_t i = 0; i < row.size(); ++i)
                csv << (i ? "," : "") << row[i];
            csv << "\n";
        }
    }
}

}  // namespace relrate
