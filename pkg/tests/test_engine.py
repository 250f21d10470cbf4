import math
from collections import deque

import numpy as np
import pytest

from pushpull.core import ConfigurationError, IdealNadirPair, nondominated_mask
from pushpull.engine import (
    Archive,
    EngineConfig,
    StageState,
    crowding_distance,
    max_change_rate,
    nd_select,
    run,
    static_epsilon,
    update_epsilon,
)
from pushpull.problems import ConstraintStub, get_problem
from pushpull.selection import ComparatorKind

SMALL = EngineConfig(N=20, T=5, max_evals=2000, l=5, Tc=60, seed=3)


def pair(ideal, nadir):
    return IdealNadirPair(np.array(ideal, float), np.array(nadir, float))


def history(old, new, l=2):
    h = deque([old] + [new] * l)
    return h


def test_change_rate_examples():
    same = pair([1, 1], [2, 2])
    assert max_change_rate(history(same, same), 2, 2) == 0.0
    assert max_change_rate(history(pair([1, 1], [2, 2]), pair([0.5, 1], [2, 2])), 2, 2) == 0.5
    rate = max_change_rate(history(pair([0, 1], [2, 2]), pair([0.001, 1], [2, 2])), 2, 2)
    assert rate == pytest.approx(1000.0, rel=1e-12)
    assert max_change_rate(deque([same]), 1, 2) == 1.0


def test_change_rate_uses_nadir_too():
    h = history(pair([1, 1], [2, 4]), pair([1, 1], [2, 5]))
    assert max_change_rate(h, 7, 2) == pytest.approx(0.25, abs=1e-15)


def test_epsilon_examples():
    cfg = EngineConfig(Tc=800, cp=2.0, tau=0.1, alpha=0.95)
    st = StageState(epsilon_k=1.0, epsilon_0=1.0, feasible_ratio=0.5)
    assert update_epsilon(st, 10, cfg) == pytest.approx(0.9, abs=1e-15)
    st.feasible_ratio = 1.0
    assert update_epsilon(st, 400, cfg) == 0.25
    assert update_epsilon(st, 800, cfg) == 0.0
    assert update_epsilon(st, 1200, cfg) == 0.0


def test_epsilon_cap_when_feasibility_recovers():
    cfg = EngineConfig(Tc=800, cp=2.0)
    st = StageState(epsilon_k=0.1, epsilon_0=1.0, feasible_ratio=1.0)
    assert update_epsilon(st, 400, cfg) == 0.1
    assert update_epsilon(st, 400, cfg.replace(epsilon_monotone=False)) == 0.25


def test_static_epsilon():
    cfg = EngineConfig(Tc=100, cp=2.0)
    assert static_epsilon(2.0, 50, cfg) == 0.5
    assert static_epsilon(2.0, 100, cfg) == 0.0


def test_crowding_distance_by_hand():
    F = np.array([[0, 1], [0.2, 0.7], [0.3, 0.5], [0.7, 0.2], [1, 0]])
    cd = crowding_distance(F)
    assert np.isinf(cd[0]) and np.isinf(cd[4])
    np.testing.assert_allclose(cd[1:4], [0.8, 1.0, 1.2], atol=1e-15)


def test_nd_select_examples():
    empty = Archive.empty(1, 2)
    X = np.zeros((2, 1))
    assert len(nd_select(empty, X, [[1, 1], [2, 2]], [0.5, 0.1], 10)) == 0
    kept = nd_select(empty, X, [[1, 1], [2, 2]], [0.0, 0.0], 10)
    np.testing.assert_array_equal(kept.F, [[1, 1]])
    F = np.array([[0, 1], [0.2, 0.7], [0.3, 0.5], [0.7, 0.2], [1, 0]])
    capped = nd_select(empty, np.zeros((5, 1)), F, np.zeros(5), 3)
    np.testing.assert_array_equal(capped.F, [[0, 1], [0.7, 0.2], [1, 0]])


def test_nd_select_merges_and_deduplicates():
    archive = Archive(np.array([[0.1], [0.2]]), np.array([[0.0, 1.0], [1.0, 0.0]]))
    X = np.array([[0.3], [0.4], [0.5]])
    F = np.array([[0.0, 1.0], [0.5, 0.5], [0.2, 0.2]])
    out = nd_select(archive, X, F, [0.0, 0.0, 0.3], 10)
    np.testing.assert_array_equal(out.F, [[0, 1], [1, 0], [0.5, 0.5]])
    np.testing.assert_array_equal(out.X[:, 0], [0.1, 0.2, 0.4])


def test_crowding_ties_keep_earlier_rows():
    # equally spaced interior points tie; the earliest survive
    F = np.column_stack([np.linspace(0, 1, 6), np.linspace(1, 0, 6)])
    out = nd_select(Archive.empty(1, 2), np.arange(6.0)[:, None], F, np.zeros(6), 4)
    np.testing.assert_array_equal(out.X[:, 0], [0, 1, 2, 5])


def _problem(name="deskcmop-boundary"):
    return get_problem(name, n=4)


def test_budget_accounting():
    rec = run(_problem(), SMALL.replace(max_evals=2019))
    assert rec.evals == 2000
    assert len(rec.trace) == (2000 - 20) // 20
    assert [t["evals"] for t in rec.trace] == list(range(40, 2001, 20))
    with pytest.raises(ConfigurationError):
        run(_problem(), SMALL.replace(max_evals=39))


def test_infinite_threshold_switches_at_l():
    rec = run(_problem(), SMALL.replace(switch_threshold=math.inf))
    assert rec.switch_generation == SMALL.l
    stages = [t["stage"] for t in rec.trace]
    assert stages[: SMALL.l] == ["push"] * SMALL.l and set(stages[SMALL.l :]) == {"pull"}
    assert all(t["r_k"] == 1.0 for t in rec.trace[: SMALL.l])


def test_no_switch_after_tc():
    rec = run(_problem(), SMALL.replace(switch_threshold=0.0, Tc=10))
    assert rec.switch_generation is None
    assert all(t["stage"] == "push" for t in rec.trace)


def test_pull_stage_invariants():
    rec = run(_problem(), SMALL.replace(switch_threshold=math.inf, debug=True))
    pull = [t for t in rec.trace if t["stage"] == "pull"]
    eps = [t["epsilon"] for t in pull]
    assert all(b <= a for a, b in zip(eps, eps[1:]))
    assert all(t["epsilon"] == 0.0 for t in rec.trace if t["gen"] >= SMALL.Tc)


def test_switch_epsilon_is_max_population_violation():
    snaps = []
    rec = run(_problem(), SMALL.replace(switch_threshold=math.inf), callback=snaps.append)
    k = rec.switch_generation
    before = snaps[k - 1].V
    eps0 = before.max()
    t = rec.trace[k]
    if t["feasible_ratio"] < SMALL.alpha:
        expected = (1 - SMALL.tau) * eps0
    else:
        expected = eps0 * (1 - k / SMALL.Tc) ** SMALL.cp
    assert t["epsilon"] == pytest.approx(expected, rel=1e-12)


def test_determinism_and_independence_of_instances():
    a = run(_problem(), SMALL)
    b = run(_problem(), SMALL)
    assert a.archive_csv() == b.archive_csv()
    assert a.trace_csv() == b.trace_csv()
    assert a.summary_json() == b.summary_json()
    np.testing.assert_array_equal(a.population_X, b.population_X)
    c = run(_problem(), SMALL.replace(seed=4))
    assert a.archive_csv() != c.archive_csv()


@pytest.mark.parametrize("algorithm", ["pps", "cdp", "sr", "epsilon", "push", "pull"])
def test_every_algorithm_keeps_a_valid_archive(algorithm):
    snaps = []
    rec = run(_problem("deskcmop-partial"), SMALL.replace(debug=True), algorithm, callback=snaps.append)
    assert rec.algorithm == algorithm
    assert len(snaps) == len(rec.trace)
    for s in snaps:
        assert len(s.archive) <= SMALL.N
        if len(s.archive):
            assert nondominated_mask(s.archive.F).all()
            assert all(_problem("deskcmop-partial").evaluate(x).violation == 0 for x in s.archive.X)
    ideals = np.array([s.ideal for s in snaps])
    assert np.all(np.diff(ideals, axis=0) <= 0)


def test_push_stage_ignores_constraints():
    cfg = SMALL.replace(switch_threshold=math.inf, l=8)
    real, stub = [], []
    run(_problem(), cfg, callback=real.append)
    run(ConstraintStub(_problem()), cfg, callback=stub.append)
    for a, b in zip(real[: cfg.l], stub[: cfg.l]):
        np.testing.assert_array_equal(a.X, b.X)
    assert any(not np.array_equal(a.X, b.X) for a, b in zip(real, stub))


def test_static_epsilon_baseline_start():
    cfg = SMALL.replace(theta=0.2)
    problem = get_problem("deskcmop-boundary", n=4)
    rng = np.random.default_rng(cfg.seed)
    X0 = rng.random((cfg.N, problem.n))
    V0 = np.sort([problem.evaluate(x).violation for x in X0])
    rec = run(problem, cfg, "epsilon")
    eps0 = V0[math.ceil(0.2 * cfg.N) - 1]
    assert rec.trace[0]["epsilon"] == eps0
    assert rec.trace[10]["epsilon"] == pytest.approx(eps0 * (1 - 10 / cfg.Tc) ** 2, rel=1e-12)


def test_fixed_pull_comparator():
    rec = run(_problem(), SMALL, ComparatorKind("pull", epsilon=0.05))
    assert rec.algorithm == "pull"
    assert {t["epsilon"] for t in rec.trace} == {0.05}


def test_run_record_outputs(tmp_path):
    rec = run(_problem(), SMALL)
    paths = rec.write(tmp_path, stem="seed3")
    assert paths["archive"].name == "seed3_archive.csv"
    header, *rows = paths["archive"].read_text().splitlines()
    assert header == "f1,f2,violation"
    assert len(rows) == len(rec.archive)
    assert all("e" in v for v in rows[0].split(","))
    assert paths["trace"].read_text().splitlines()[0] == "gen,stage,r_k,epsilon,feasible_ratio,evals"
    import json

    summary = json.loads(paths["summary"].read_text())
    assert set(summary) == {"problem", "algorithm", "seed", "switch_generation", "final_igd", "final_hv", "evals"}


def test_config_validation():
    for bad in (dict(N=1), dict(T=0), dict(T=50, N=20), dict(tau=1.5), dict(alpha=-0.1), dict(delta=2), dict(l=0), dict(cp=0)):
        with pytest.raises(ConfigurationError):
            EngineConfig(**bad)
    with pytest.raises(ConfigurationError):
        run(_problem(), SMALL, "moead")
