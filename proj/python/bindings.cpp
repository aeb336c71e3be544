#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "relrate/choice.hpp"
#include "relrate/decompose.hpp"
#include "relrate/errors.hpp"
#include "relrate/market.hpp"
#include "relrate/monte_carlo.hpp"
#include "relrate/scenario.hpp"
#include "relrate/space.hpp"
#include "relrate/static_core.hpp"
#include "relrate/tree.hpp"

namespace py = pybind11;
using namespace relrate;

PYBIND11_MODULE(_relrate, m) {
    m.doc() = "relative-rate preferences, canonical sampling pairs, "
              "investment-consumption plans and path-law simulations";
    m.attr("__version__") = "0.1.0";

    py::register_exception<validation_error>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<domain_error>(m, "DomainError", PyExc_ValueError);
    py::register_exception<numerical_error>(m, "NumericalError", PyExc_RuntimeError);
    py::register_exception<viability_error>(m, "ViabilityError", PyExc_RuntimeError);

    // ---- finite spaces and the preference rule ----

    m.def("safe_div", &safe_div, py::arg("x"), py::arg("y"),
          "x/y with the boundary conventions 0/0 = 1 and x/0 = inf for x > 0");

    py::class_<FiniteSpace>(m, "FiniteSpace",
                            "finite probability space with strictly positive atom weights")
        .def(py::init<std::vector<double>, std::vector<std::string>>(),
             py::arg("weights"), py::arg("labels") = std::vector<std::string>{})
        .def("__len__", &FiniteSpace::size)
        .def_property_readonly("weights", &FiniteSpace::weights)
        .def_property_readonly("labels", &FiniteSpace::labels)
        .def("expectation", &FiniteSpace::expectation, py::arg("f"));

    m.def("check_outcome", &check_outcome, py::arg("space"), py::arg("f"),
          py::arg("strictly_positive") = false);

    m.def("rel", &rel, py::arg("space"), py::arg("f"), py::arg("g"),
          "expected relative rate of return of f against g: E[safe_div(f, g)] - 1");
    m.def("prefers", &prefers, py::arg("space"), py::arg("f"), py::arg("g"),
          "true iff f is weakly preferred to g, i.e. rel(g | f) <= 0");

    py::enum_<Comparison>(m, "Comparison")
        .value("equivalent", Comparison::equivalent)
        .value("first_preferred", Comparison::first_preferred)
        .value("second_preferred", Comparison::second_preferred)
        .value("incomparable", Comparison::incomparable);

    m.def("compare", &compare, py::arg("space"), py::arg("f"), py::arg("g"));

    py::class_<CounterexampleSuite>(m, "CounterexampleSuite")
        .def_readonly("space", &CounterexampleSuite::space)
        .def_readonly("incomparable_f", &CounterexampleSuite::incomparable_f)
        .def_readonly("incomparable_g", &CounterexampleSuite::incomparable_g)
        .def_readonly("incomparable_rel_fg", &CounterexampleSuite::incomparable_rel_fg)
        .def_readonly("incomparable_rel_gf", &CounterexampleSuite::incomparable_rel_gf)
        .def_readonly("triple_f", &CounterexampleSuite::triple_f)
        .def_readonly("triple_g", &CounterexampleSuite::triple_g)
        .def_readonly("triple_h", &CounterexampleSuite::triple_h)
        .def_readonly("triple_rel_fg", &CounterexampleSuite::triple_rel_fg)
        .def_readonly("triple_rel_gh", &CounterexampleSuite::triple_rel_gh)
        .def_readonly("triple_rel_fh", &CounterexampleSuite::triple_rel_fh)
        .def_readonly("flip_f", &CounterexampleSuite::flip_f)
        .def_readonly("flip_g", &CounterexampleSuite::flip_g)
        .def_readonly("flip_rel_fg", &CounterexampleSuite::flip_rel_fg)
        .def_readonly("flip_rel_g1_f1", &CounterexampleSuite::flip_rel_g1_f1);

    m.def("counterexample_suite", &counterexample_suite, py::arg("p"),
          "two-atom families exhibiting incomparability, intransitivity and the "
          "additive flip, with closed-form rates");

    py::class_<ChainReport>(m, "ChainReport")
        .def_readonly("links_ok", &ChainReport::links_ok)
        .def_readonly("failing_link", &ChainReport::failing_link)
        .def_readonly("all_equal", &ChainReport::all_equal)
        .def_readonly("max_deviation", &ChainReport::max_deviation);

    m.def("chain_check", &chain_check, py::arg("space"), py::arg("cycle"),
          "closed preference cycles force atomwise equality");

    py::class_<InsuranceResult>(m, "InsuranceResult")
        .def_readonly("level", &InsuranceResult::level)
        .def_readonly("rel_at_level", &InsuranceResult::rel_at_level);

    m.def("insurance_level", &insurance_level, py::arg("space"), py::arg("f"),
          py::arg("g"), py::arg("max_level") = 1000000,
          "smallest integer indemnity multiple on {f <= g} that makes the "
          "insured g strictly preferred");

    // ---- convex choice sets and log-optimal selection ----

    py::class_<HalfSpace>(m, "HalfSpace", "constraint a . x <= b")
        .def(py::init([](std::vector<double> a, double b) {
                 return HalfSpace{std::move(a), b};
             }),
             py::arg("a"), py::arg("b"))
        .def_readwrite("a", &HalfSpace::a)
        .def_readwrite("b", &HalfSpace::b);

    py::class_<Polytope>(m, "Polytope",
                         "convex compact choice set, by vertices or halfspaces")
        .def_static("from_vertices", &Polytope::from_vertices, py::arg("vertices"))
        .def_static("from_halfspaces", &Polytope::from_halfspaces, py::arg("dim"),
                    py::arg("rows"), py::arg("nonnegative") = true)
        .def_static("full_simplex", &Polytope::full_simplex, py::arg("mu"),
                    "{f >= 0 : sum mu_i f_i <= 1} with mu strictly positive")
        .def_property_readonly("dim", &Polytope::dim)
        .def_property_readonly("vertices", &Polytope::vertices)
        .def("contains", &Polytope::contains, py::arg("x"), py::arg("tol") = 1e-9);

    py::class_<LogOptimalResult>(m, "LogOptimalResult")
        .def_readonly("f_hat", &LogOptimalResult::f_hat)
        .def_readonly("certificate", &LogOptimalResult::certificate)
        .def_readonly("iterations", &LogOptimalResult::iterations)
        .def_readonly("zero_coordinates", &LogOptimalResult::zero_coordinates);

    m.def("log_optimal", &log_optimal, py::arg("space"), py::arg("set"),
          py::arg("tol") = 1e-10, py::arg("max_iter") = 200000,
          "maximizer of E[log f] over the set, with the certificate "
          "max_v rel(v | f_hat)");

    py::enum_<SimplexPosition>(m, "SimplexPosition")
        .value("exterior", SimplexPosition::exterior)
        .value("interior", SimplexPosition::interior)
        .value("maximal", SimplexPosition::maximal);

    py::class_<SimplexClassification>(m, "SimplexClassification")
        .def_readonly("position", &SimplexClassification::position)
        .def_readonly("scale", &SimplexClassification::scale)
        .def_readonly("maximal_representative",
                      &SimplexClassification::maximal_representative);

    m.def("simplex_classify", &simplex_classify, py::arg("mu"), py::arg("f"),
          py::arg("tol") = 1e-10);

    m.def("oracle_from_space", &oracle_from_space, py::arg("space"),
          py::arg("tol") = 1e-12,
          "budget-set oracle induced by the log-optimal choice of a known space");

    py::class_<RecoveryResult>(m, "RecoveryResult")
        .def_readonly("consistent", &RecoveryResult::consistent)
        .def_readonly("probability", &RecoveryResult::probability)
        .def_readonly("max_regeneration_error", &RecoveryResult::max_regeneration_error)
        .def_readonly("violation", &RecoveryResult::violation);

    m.def("recover_probability", &recover_probability, py::arg("oracle"),
          py::arg("n_atoms"), py::arg("n_regeneration") = 20,
          py::arg("seed") = 20260815, py::arg("tol") = 1e-8,
          "recovers the probability behind a choice oracle and replays it on "
          "random budget sets");

    m.def("log_rel", &log_rel, py::arg("space"), py::arg("f"), py::arg("g"),
          "E[log f - log g] for strictly positive payoffs");

    // ---- event trees ----

    py::class_<TreeNode>(m, "TreeNode")
        .def_readonly("id", &TreeNode::id)
        .def_readonly("parent", &TreeNode::parent)
        .def_readonly("time", &TreeNode::time)
        .def_readonly("trans_prob", &TreeNode::trans_prob)
        .def_readonly("prob", &TreeNode::prob)
        .def_readonly("children", &TreeNode::children);

    py::class_<EventTree>(m, "EventTree",
                          "finite event tree carrying its filtration")
        .def_static("from_parents", &EventTree::from_parents, py::arg("parent"),
                    py::arg("trans_prob"))
        .def_static("regular", &EventTree::regular, py::arg("depth"),
                    py::arg("branching"),
                    py::arg("child_probs") = std::vector<double>{})
        .def("__len__", &EventTree::size)
        .def("node", &EventTree::node, py::arg("i"),
             py::return_value_policy::reference_internal)
        .def_property_readonly("nodes", &EventTree::nodes)
        .def_property_readonly("horizon", &EventTree::horizon)
        .def_property_readonly("leaves", &EventTree::leaves)
        .def("is_leaf", &EventTree::is_leaf, py::arg("i"))
        .def("ancestor_at", &EventTree::ancestor_at, py::arg("descendant"),
             py::arg("time"));

    m.def("check_node_process", &check_node_process, py::arg("tree"), py::arg("x"));
    m.def("check_random_time", &check_random_time, py::arg("tree"), py::arg("T"),
          "a random time lists, for each leaf, the sampling time on that path");

    m.def("conditional_expectation", &conditional_expectation, py::arg("tree"),
          py::arg("x"), "E[X_terminal | node] for every node");

    py::enum_<MartingaleKind>(m, "MartingaleKind")
        .value("martingale", MartingaleKind::martingale)
        .value("supermartingale", MartingaleKind::supermartingale)
        .value("submartingale", MartingaleKind::submartingale)
        .value("neither", MartingaleKind::neither);

    py::class_<MartingaleReport>(m, "MartingaleReport")
        .def_readonly("kind", &MartingaleReport::kind)
        .def_readonly("max_upward_drift", &MartingaleReport::max_upward_drift)
        .def_readonly("max_downward_drift", &MartingaleReport::max_downward_drift);

    m.def("martingale_class", &martingale_class, py::arg("tree"), py::arg("x"),
          py::arg("tol") = 1e-10);

    m.def("is_stopping_time", &is_stopping_time, py::arg("tree"), py::arg("T"));

    py::class_<DualProjection>(m, "DualProjection")
        .def_readonly("dH", &DualProjection::dH)
        .def_readonly("H", &DualProjection::H);

    m.def("dual_optional_projection", &dual_optional_projection, py::arg("tree"),
          py::arg("T"), "sampling measure of a random time, node by node");

    m.def("expectation_at", &expectation_at, py::arg("tree"), py::arg("v"),
          py::arg("T"), "E[V_T] by exact leaf enumeration");
    m.def("optional_sum", &optional_sum, py::arg("tree"), py::arg("v"),
          py::arg("dH"), "sum over nodes of P[node] V(node) dH(node)");

    // ---- canonical decomposition ----

    m.def("check_optional_measure", &check_optional_measure, py::arg("tree"),
          py::arg("q"), py::arg("tol") = 1e-9);

    py::class_<HProcess>(m, "HProcess")
        .def_readonly("dH", &HProcess::dH)
        .def_readonly("H", &HProcess::H);

    m.def("measure_to_H", &measure_to_H, py::arg("tree"), py::arg("q"));

    py::class_<CanonicalPair>(m, "CanonicalPair",
                              "martingale L and clock K with L dK = dH and "
                              "L (1 - K) = Z")
        .def_readonly("L", &CanonicalPair::L)
        .def_readonly("K", &CanonicalPair::K)
        .def_readonly("dK", &CanonicalPair::dK)
        .def_readonly("H", &CanonicalPair::H)
        .def_readonly("dH", &CanonicalPair::dH)
        .def_readonly("M", &CanonicalPair::M)
        .def_readonly("Z", &CanonicalPair::Z);

    m.def("decompose", &decompose, py::arg("tree"), py::arg("h_cumulative"));
    m.def("decompose_measure", &decompose_measure, py::arg("tree"), py::arg("q"));

    py::class_<PairReport>(m, "PairReport")
        .def_readonly("root_l_error", &PairReport::root_l_error)
        .def_readonly("negativity_error", &PairReport::negativity_error)
        .def_readonly("martingale_drift", &PairReport::martingale_drift)
        .def_readonly("k_monotone_error", &PairReport::k_monotone_error)
        .def_readonly("k_range_error", &PairReport::k_range_error)
        .def_readonly("lk_identity_error", &PairReport::lk_identity_error)
        .def_readonly("dh_identity_error", &PairReport::dh_identity_error)
        .def_readonly("frozen_l_error", &PairReport::frozen_l_error)
        .def_readonly("dk_at_dead_error", &PairReport::dk_at_dead_error)
        .def_readonly("leaf_exhaust_error", &PairReport::leaf_exhaust_error)
        .def_readonly("pathwise_error", &PairReport::pathwise_error)
        .def("max_violation", &PairReport::max_violation);

    m.def("verify_pair", &verify_pair, py::arg("tree"), py::arg("h_cumulative"),
          py::arg("pair"));

    m.def("pair_to_measure", &pair_to_measure, py::arg("tree"), py::arg("pair"),
          "q[node] = P[node] L(node) dK(node); inverts decompose_measure");

    py::class_<PerturbationRow>(m, "PerturbationRow")
        .def_readonly("eps", &PerturbationRow::eps)
        .def_readonly("k_gap", &PerturbationRow::k_gap)
        .def_readonly("l_gap", &PerturbationRow::l_gap);

    m.def("perturbation_convergence", &perturbation_convergence, py::arg("tree"),
          py::arg("h_cumulative"), py::arg("eps_values"));

    // ---- markets ----

    py::class_<Market>(m, "Market",
                       "strictly positive price processes on an event tree with "
                       "a common constraint set")
        .def_readonly("tree", &Market::tree)
        .def_readonly("prices", &Market::prices)
        .def_readonly("constraints", &Market::constraints);

    m.def("make_market", &make_market, py::arg("tree"), py::arg("prices"),
          py::arg("constraints") = std::nullopt,
          "defaults to the long-only simplex when no constraint set is given");

    py::class_<Strategy>(m, "Strategy")
        .def(py::init([](std::vector<std::vector<double>> pi) {
                 return Strategy{std::move(pi)};
             }),
             py::arg("pi"))
        .def_readwrite("pi", &Strategy::pi);

    m.def("constant_strategy", &constant_strategy, py::arg("market"), py::arg("pi"));

    m.def("wealth", &wealth, py::arg("market"), py::arg("x0"), py::arg("strategy"),
          "self-financing wealth process from initial capital x0");

    py::class_<GrowthOptimal>(m, "GrowthOptimal")
        .def_readonly("pi", &GrowthOptimal::pi)
        .def_readonly("x_hat", &GrowthOptimal::x_hat)
        .def_readonly("worst_certificate", &GrowthOptimal::worst_certificate)
        .def_readonly("iterations", &GrowthOptimal::iterations);

    m.def("numeraire_portfolio", &numeraire_portfolio, py::arg("market"),
          py::arg("l"), py::arg("node_tol") = 1e-11, py::arg("max_iter") = 200000,
          "growth-optimal portfolio reweighted by the martingale part of a "
          "sampling decomposition");

    m.def("rel_streams", &rel_streams, py::arg("tree"), py::arg("p"),
          py::arg("dc"), py::arg("dg"),
          "rate of return of stream C against stream G under the sampling "
          "measure p");

    py::class_<ConsumptionPlan>(m, "ConsumptionPlan")
        .def_readonly("pair", &ConsumptionPlan::pair)
        .def_readonly("growth", &ConsumptionPlan::growth)
        .def_readonly("dc", &ConsumptionPlan::dc)
        .def_readonly("capital", &ConsumptionPlan::capital);

    m.def("optimal_consumption", &optimal_consumption, py::arg("market"),
          py::arg("p"), py::arg("x"), py::arg("node_tol") = 1e-11,
          "invest along the reweighted growth-optimal portfolio, consume the "
          "clock increments");

    py::class_<SweepResult>(m, "SweepResult")
        .def_readonly("worst_rel", &SweepResult::worst_rel)
        .def_readonly("n_streams", &SweepResult::n_streams)
        .def_readonly("worst_description", &SweepResult::worst_description);

    m.def("consumption_optimality_sweep", &consumption_optimality_sweep,
          py::arg("market"), py::arg("plan"), py::arg("p"),
          py::arg("n_random") = 100, py::arg("seed") = 20260815,
          py::arg("cap") = 10000,
          "evaluates financeable competitor streams against the plan's stream");

    m.def("utility_functional", &utility_functional, py::arg("tree"), py::arg("p"),
          py::arg("f_cumulative"), py::arg("utility"),
          "expected utility of a fraction schedule against the sampling measure");

    py::class_<RandomTimeReport>(m, "RandomTimeReport")
        .def_readonly("worst_expectation", &RandomTimeReport::worst_expectation)
        .def_readonly("pass_", &RandomTimeReport::pass)
        .def_readonly("samples_at_running_max", &RandomTimeReport::samples_at_running_max)
        .def_readonly("n_strategies", &RandomTimeReport::n_strategies);

    m.def("random_time_check", &random_time_check, py::arg("market"), py::arg("T"),
          py::arg("n_random") = 100, py::arg("seed") = 20260815,
          py::arg("tol") = 1e-9, py::arg("node_tol") = 1e-11,
          "checks E[X_T / X_hat_T] <= 1 across strategies");

    // ---- path simulation ----

    py::enum_<McConfig::Generator>(m, "Generator")
        .value("gbm_martingale", McConfig::Generator::gbm_martingale)
        .value("inverse_bessel3", McConfig::Generator::inverse_bessel3);

    py::class_<McConfig> mc_config(m, "McConfig");
    mc_config.def(py::init<>())
        .def_readwrite("generator", &McConfig::generator)
        .def_readwrite("n_paths", &McConfig::n_paths)
        .def_readwrite("dt", &McConfig::dt)
        .def_readwrite("horizon", &McConfig::horizon)
        .def_readwrite("sigma", &McConfig::sigma)
        .def_readwrite("seed", &McConfig::seed)
        .def_readwrite("stop_level", &McConfig::stop_level)
        .def_readwrite("max_steps_per_path", &McConfig::max_steps_per_path)
        .def_readwrite("strategy_fractions", &McConfig::strategy_fractions)
        .def_readwrite("store_paths", &McConfig::store_paths)
        .def_readwrite("threads", &McConfig::threads);
    mc_config.attr("Generator") = m.attr("Generator");

    py::class_<PathEnsemble>(m, "PathEnsemble")
        .def_readonly("config", &PathEnsemble::config)
        .def_readonly("log_sup", &PathEnsemble::log_sup)
        .def_readonly("log_terminal", &PathEnsemble::log_terminal)
        .def_readonly("min_price", &PathEnsemble::min_price)
        .def_readonly("wealth_at_min", &PathEnsemble::wealth_at_min)
        .def_readonly("tail_completion_count", &PathEnsemble::tail_completion_count)
        .def_readonly("total_steps", &PathEnsemble::total_steps)
        .def_readonly("path_values", &PathEnsemble::path_values)
        .def_readonly("path_times", &PathEnsemble::path_times);

    m.def("simulate", &simulate, py::arg("config"),
          py::call_guard<py::gil_scoped_release>(),
          "per-path summaries with the supremum completed exactly past the stop");

    py::class_<DoobRow>(m, "DoobRow")
        .def_readonly("gamma", &DoobRow::gamma)
        .def_readonly("estimate", &DoobRow::estimate)
        .def_readonly("target", &DoobRow::target)
        .def_readonly("std_error", &DoobRow::std_error)
        .def_readonly("abs_error", &DoobRow::abs_error);

    m.def("doob_identity_check", &doob_identity_check, py::arg("ensemble"),
          py::arg("gammas"), "P[sup L >= gamma] against 1/gamma");

    py::class_<ExpLawReport>(m, "ExpLawReport")
        .def_readonly("mean_log_sup", &ExpLawReport::mean_log_sup)
        .def_readonly("mean_std_error", &ExpLawReport::mean_std_error)
        .def_readonly("ks_statistic", &ExpLawReport::ks_statistic)
        .def_readonly("ks_bound", &ExpLawReport::ks_bound)
        .def_readonly("mean_ok", &ExpLawReport::mean_ok)
        .def_readonly("ks_ok", &ExpLawReport::ks_ok)
        .def_readonly("k_terminal_ok", &ExpLawReport::k_terminal_ok)
        .def_readonly("tail_completion_fraction", &ExpLawReport::tail_completion_fraction);

    m.def("exp_law_check", &exp_law_check, py::arg("ensemble"),
          py::arg("mean_band") = 0.03, py::arg("ks_slack") = 0.01,
          "log sup L is standard exponential; 1/sup L is uniform");

    py::class_<MinTimeRow>(m, "MinTimeRow")
        .def_readonly("fraction", &MinTimeRow::fraction)
        .def_readonly("mean_wealth", &MinTimeRow::mean_wealth)
        .def_readonly("std_error", &MinTimeRow::std_error)
        .def_readonly("pass_", &MinTimeRow::pass);

    py::class_<MinTimeReport>(m, "MinTimeReport")
        .def_readonly("mean_min_price", &MinTimeReport::mean_min_price)
        .def_readonly("min_price_std_error", &MinTimeReport::min_price_std_error)
        .def_readonly("target", &MinTimeReport::target)
        .def_readonly("price_ok", &MinTimeReport::price_ok)
        .def_readonly("rows", &MinTimeReport::rows);

    m.def("min_time_market_check", &min_time_market_check, py::arg("ensemble"),
          py::arg("band") = 0.02,
          "sampling at the minimum-price time: E[S_T] = 1/2 and no long-only "
          "strategy beats its capital");

    m.def("sample_normals", &sample_normals, py::arg("seed"), py::arg("n"));

    // ---- scenario runner ----

    py::class_<CheckOutcome>(m, "CheckOutcome")
        .def_readonly("name", &CheckOutcome::name)
        .def_readonly("pass_", &CheckOutcome::pass)
        .def_readonly("value", &CheckOutcome::value)
        .def_readonly("tolerance", &CheckOutcome::tolerance)
        .def_readonly("detail", &CheckOutcome::detail);

    py::class_<Table>(m, "Table")
        .def_readonly("name", &Table::name)
        .def_readonly("header", &Table::header)
        .def_readonly("rows", &Table::rows);

    py::class_<RunReport>(m, "RunReport")
        .def_readonly("command", &RunReport::command)
        .def_readonly("seed", &RunReport::seed)
        .def_readonly("tol_scale", &RunReport::tol_scale)
        .def_readonly("checks", &RunReport::checks)
        .def_readonly("tables", &RunReport::tables)
        .def("all_pass", &RunReport::all_pass);

    py::class_<RunOptions>(m, "RunOptions")
        .def(py::init<>())
        .def_readwrite("seed_override", &RunOptions::seed_override)
        .def_readwrite("tol_scale", &RunOptions::tol_scale)
        .def_readwrite("threads", &RunOptions::threads);

    m.def("run_builtin", &run_builtin, py::arg("kind"),
          py::arg("options") = RunOptions{},
          py::call_guard<py::gil_scoped_release>(),
          "kind: static, choice, decompose, market, mc, or all");
    m.def("run_scenario_file", &run_scenario_file, py::arg("path"),
          py::arg("options") = RunOptions{}, py::arg("expected_kind") = std::string{},
          py::call_guard<py::gil_scoped_release>());
    m.def("render_summary", &render_summary, py::arg("report"));
    m.def("write_outputs", &write_outputs, py::arg("report"), py::arg("out_dir"));
}
