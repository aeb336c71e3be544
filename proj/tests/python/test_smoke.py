import math

import numpy as np
import pytest

import relrate as rr


def test_rate_rule_basics():
    sp = rr.FiniteSpace([0.3, 0.7])
    assert len(sp) == 2
    assert sp.expectation([1.0, 2.0]) == pytest.approx(1.7)

    assert rr.safe_div(0.0, 0.0) == 1.0
    assert math.isinf(rr.safe_div(1.0, 0.0))

    assert rr.rel(sp, [1.0, 1.0], [1.0, 1.0]) == pytest.approx(0.0)
    assert rr.prefers(sp, [2.0, 2.0], [1.0, 1.0])
    assert rr.compare(sp, [2.0, 2.0], [1.0, 1.0]) == rr.Comparison.first_preferred

    # numpy arrays convert like any sequence
    assert rr.rel(sp, np.array([2.0, 0.5]), np.array([1.0, 1.0])) == pytest.approx(-0.05)


def test_counterexamples_match_closed_forms():
    s = rr.counterexample_suite(0.3)
    assert rr.compare(s.space, s.incomparable_f, s.incomparable_g) == rr.Comparison.incomparable
    assert rr.rel(s.space, s.incomparable_f, s.incomparable_g) == pytest.approx(0.49, abs=1e-12)
    assert rr.rel(s.space, s.triple_f, s.triple_h) == pytest.approx(7.0 / 6.0, abs=1e-12)
    assert rr.rel(s.space, s.flip_f, s.flip_g) == pytest.approx(0.0, abs=1e-12)

    ins = rr.insurance_level(s.space, s.flip_f, s.flip_g)
    assert ins.level == 2
    assert ins.rel_at_level == pytest.approx(-21.0 / 299.0, abs=1e-12)

    rep = rr.chain_check(s.space, [[1.0, 2.0], [1.0, 2.0], [1.0, 2.0]])
    assert rep.links_ok and rep.all_equal


def test_log_optimal_and_recovery():
    sp = rr.FiniteSpace([0.25, 0.35, 0.4])
    mu = [0.5, 1.0, 2.0]
    res = rr.log_optimal(sp, rr.Polytope.full_simplex(mu))
    assert res.certificate <= 1e-9
    for w, m, f in zip(sp.weights, mu, res.f_hat):
        assert f == pytest.approx(w / m, rel=1e-8)

    cls = rr.simplex_classify(mu, res.f_hat)
    assert cls.position == rr.SimplexPosition.maximal
    assert cls.scale == pytest.approx(1.0, rel=1e-10)

    rec = rr.recover_probability(rr.oracle_from_space(sp), 3, n_regeneration=5)
    assert rec.consistent
    for w, p in zip(sp.weights, rec.probability):
        assert p == pytest.approx(w, abs=1e-8)

    # a python callable works as an oracle too
    rec2 = rr.recover_probability(lambda mu_: [w / m_ for w, m_ in zip(sp.weights, mu_)],
                                  3, n_regeneration=3)
    assert rec2.consistent

    with pytest.raises(rr.DomainError):
        rr.log_rel(sp, [1.0, 0.0, 1.0], [1.0, 1.0, 1.0])


def test_tree_sampling_and_decomposition():
    t = rr.EventTree.from_parents([-1, 0, 0, 1, 1, 2, 2],
                                  [1.0, 0.6, 0.4, 0.5, 0.5, 0.7, 0.3])
    assert t.horizon == 2
    assert t.leaves == [3, 4, 5, 6]

    q = [0.1, 0.2, 0.0, 0.15, 0.05, 0.3, 0.2]
    pair = rr.decompose_measure(t, q)
    assert pair.L[0] == pytest.approx(1.0)
    assert pair.L[1] == pytest.approx(0.7407407407407407, abs=1e-12)
    assert pair.K[1] == pytest.approx(0.55, abs=1e-12)
    assert rr.verify_pair(t, pair.H, pair).max_violation() <= 1e-12
    for a, b in zip(rr.pair_to_measure(t, pair), q):
        assert a == pytest.approx(b, abs=1e-12)

    # every random time carries unit sampling mass
    T = [1, 2, 0, 2]  # one entry per leaf
    rr.check_random_time(t, T)
    proj = rr.dual_optional_projection(t, T)
    ones = [1.0] * len(t)
    assert rr.optional_sum(t, ones, proj.dH) == pytest.approx(1.0, abs=1e-12)
    assert rr.expectation_at(t, ones, T) == pytest.approx(1.0, abs=1e-12)

    rows = rr.perturbation_convergence(t, pair.H, [1e-2, 1e-3, 1e-4])
    assert rows[-1].k_gap < 1e-3 and rows[-1].l_gap < 1e-3
    assert rows[0].k_gap >= rows[-1].k_gap

    mart = rr.martingale_class(t, pair.L)
    assert mart.kind in (rr.MartingaleKind.martingale, rr.MartingaleKind.supermartingale)


def test_market_consumption_and_sampled_wealth():
    t = rr.EventTree.regular(2, 2)
    cash = [1.0] * len(t)
    risky = [1.0] * len(t)
    for i in range(1, len(t)):
        up = 1.25 if i % 2 == 1 else 0.8
        risky[i] = risky[t.node(i).parent] * up
    mkt = rr.make_market(t, [cash, risky])

    q = [0.0, 0.1, 0.1, 0.2, 0.2, 0.2, 0.2]
    plan = rr.optimal_consumption(mkt, q, 1.0)
    assert plan.growth.worst_certificate <= 1e-9
    assert sum(plan.dc) > 0.0

    sweep = rr.consumption_optimality_sweep(mkt, plan, q, n_random=20, seed=7)
    assert sweep.worst_rel <= 1e-9
    assert sweep.n_streams > 0

    # consuming on the plan's own clock at full fraction maximizes utility
    value = rr.utility_functional(t, q, plan.pair.K, lambda x: -((1.0 - x) ** 2))
    assert value == pytest.approx(0.0, abs=1e-12)
    half = [0.5 * k for k in plan.pair.K]
    assert rr.utility_functional(t, q, half, lambda x: -((1.0 - x) ** 2)) < -0.2

    T = [1, 2, 0, 2]
    rep = rr.random_time_check(mkt, T, n_random=20, seed=11)
    assert rep.pass_
    assert rep.worst_expectation <= 1.0 + 1e-9

    w = rr.wealth(mkt, 1.0, rr.constant_strategy(mkt, [0.5, 0.5]))
    assert all(x > 0.0 for x in w)
    assert w[0] == pytest.approx(1.0)


def test_path_laws_by_simulation():
    cfg = rr.McConfig()
    cfg.generator = rr.Generator.gbm_martingale
    cfg.n_paths = 4000
    cfg.dt = 0.01
    cfg.horizon = 10.0
    cfg.seed = 42
    cfg.threads = 2
    ens = rr.simulate(cfg)
    assert len(ens.log_sup) == 4000

    law = rr.exp_law_check(ens, mean_band=0.2, ks_slack=0.1)
    assert law.mean_ok and law.ks_ok and law.k_terminal_ok

    for row in rr.doob_identity_check(ens, [2.0, 4.0]):
        assert row.abs_error <= 0.05

    cfg2 = rr.McConfig()
    cfg2.n_paths = 2000
    cfg2.dt = 0.01
    cfg2.horizon = 40.0
    cfg2.seed = 43
    cfg2.threads = 2
    cfg2.strategy_fractions = [0.0, 1.0]
    rep = rr.min_time_market_check(rr.simulate(cfg2), band=0.06)
    assert rep.price_ok
    assert all(r.pass_ for r in rep.rows)

    # identical results for any thread count
    cfg.threads = 1
    assert rr.simulate(cfg).log_sup == ens.log_sup


def test_scenario_runner(tmp_path):
    rep = rr.run_builtin("static")
    assert rep.all_pass()
    assert any(c.name == "static/frozen_values" and c.pass_ for c in rep.checks)
    assert "OK" in rr.render_summary(rep)

    out = tmp_path / "out"
    rr.write_outputs(rep, str(out))
    assert (out / "report.json").exists() and (out / "summary.txt").exists()

    sc = tmp_path / "static.json"
    sc.write_text('{"version":1,"kind":"static","p_values":[0.4]}')
    assert rr.run_scenario_file(str(sc)).all_pass()
    with pytest.raises(rr.ValidationError):
        rr.run_scenario_file(str(sc), rr.RunOptions(), "decompose")
    with pytest.raises(rr.ValidationError):
        rr.run_builtin("nonsense")
