import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fgbandit.errors import CertificateError, ModelError
from fgbandit.lp import (
    CoveringLP,
    LPSolution,
    dual_feasible,
    solve_covering_lp,
    verify_feasible,
    weak_duality_gap,
)
from oracles import covering_lp_by_vertices, random_covering_lp


def test_separable_lp_exact():
    lp = CoveringLP([1.0, 2.0], [[0], [1]], [3.0, 4.0])
    sol = solve_covering_lp(lp)
    assert sol.status == "optimal"
    assert sol.value == pytest.approx(11.0, rel=1e-12)
    assert sol.gap == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(sol.primal, [3.0, 4.0])


def test_shared_variable_covers_both_rows():
    # x0 covers both rows; cheaper than the two singletons together
    lp = CoveringLP([1.5, 1.0, 1.0], [[0, 1], [0, 2]], [2.0, 2.0])
    sol = solve_covering_lp(lp)
    assert sol.value == pytest.approx(3.0, rel=1e-9)
    assert verify_feasible(lp, sol.primal)
    assert dual_feasible(lp, sol.dual)


def test_no_rows_is_zero():
    sol = solve_covering_lp(CoveringLP([1.0, 1.0], [], []))
    assert sol.value == 0.0 and sol.status == "optimal"


def test_zero_costs():
    lp = CoveringLP([0.0, 0.0], [[0], [1]], [5.0, 7.0])
    sol = solve_covering_lp(lp)
    assert sol.value == 0.0
    assert verify_feasible(lp, sol.primal)


@pytest.mark.parametrize(
    "costs,rows,thr",
    [
        ([], [], []),
        ([1.0], [[0]], [0.0]),
        ([1.0], [[]], [1.0]),
        ([1.0], [[1]], [1.0]),
        ([-1.0], [[0]], [1.0]),
        ([1.0], [[0]], [1.0, 2.0]),
    ],
)
def test_malformed_lp_rejected(costs, rows, thr):
    with pytest.raises(ModelError):
        CoveringLP(costs, rows, thr)


def test_json_round_trip():
    lp = CoveringLP([1.0, 2.0, 0.5], [[0, 2], [1]], [1.0, 3.0])
    back = CoveringLP.from_json(json.loads(json.dumps(lp.to_json())))
    assert solve_covering_lp(back).value == solve_covering_lp(lp).value
    with pytest.raises(ModelError):
        CoveringLP.from_json({"costs": [1.0]})


def test_bad_certificate_raises():
    lp = CoveringLP([1.0], [[0]], [2.0])
    fake = LPSolution(np.array([2.0]), 2.0, np.array([5.0]), 10.0, "optimal")
    with pytest.raises(CertificateError):
        weak_duality_gap(lp, fake)


def test_verify_feasible_tolerance():
    lp = CoveringLP([1.0], [[0]], [1.0])
    assert not verify_feasible(lp, [0.999])
    assert verify_feasible(lp, [0.999], slack_tol=1e-2)
    with pytest.raises(ModelError):
        verify_feasible(lp, [1.0, 1.0])


def test_matches_vertex_enumeration():
    rng = np.random.default_rng(7)
    for _ in range(60):
        c, rows, b = random_covering_lp(rng)
        lp = CoveringLP(c, rows, b)
        sol = solve_covering_lp(lp)
        ref, _ = covering_lp_by_vertices(c, lp.matrix(), b)
        assert sol.value == pytest.approx(ref, rel=1e-7)
        assert weak_duality_gap(lp, sol) <= 1e-7 * sol.value + 1e-12


def test_matches_scipy():
    optimize = pytest.importorskip("scipy.optimize")
    rng = np.random.default_rng(11)
    for _ in range(40):
        n, m = int(rng.integers(5, 30)), int(rng.integers(3, 30))
        rows = [sorted(rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False)) for _ in range(m)]
        c = rng.uniform(0.01, 1.0, n)
        b = rng.uniform(1.0, 1e4, m)
        lp = CoveringLP(c, rows, b)
        ref = optimize.linprog(c, A_ub=-lp.matrix(), b_ub=-b, bounds=(0, None), method="highs")
        sol = solve_covering_lp(lp)
        assert sol.value == pytest.approx(ref.fun, rel=1e-7)


def test_degenerate_ties_terminate():
    # many identical rows and costs: heavy degeneracy
    k = 12
    rows = [list(range(k))] * 10 + [[i, (i + 1) % k] for i in range(k)]
    lp = CoveringLP(np.ones(k), rows, np.ones(len(rows)))
    sol = solve_covering_lp(lp)
    assert sol.status == "optimal"
    assert sol.value == pytest.approx(6.0, rel=1e-9)


def test_iteration_cap_reports_approximate():
    rng = np.random.default_rng(3)
    c, rows, b = random_covering_lp(rng, 6, 6)
    lp = CoveringLP(c, rows, b)
    sol = solve_covering_lp(lp, max_iter=0)
    # still a valid certificate, just possibly loose
    assert verify_feasible(lp, sol.primal)
    assert dual_feasible(lp, sol.dual, 1e-12)
    assert sol.status in ("optimal", "approximate")


lp_strategy = st.integers(0, 2**31 - 1).map(lambda s: random_covering_lp(np.random.default_rng(s)))


@settings(max_examples=60, deadline=None)
@given(lp_strategy, st.floats(0.1, 100.0))
def test_threshold_scaling(data, factor):
    c, rows, b = data
    v = solve_covering_lp(CoveringLP(c, rows, b)).value
    w = solve_covering_lp(CoveringLP(c, rows, np.asarray(b) * factor)).value
    assert w == pytest.approx(factor * v, rel=1e-7)


@settings(max_examples=60, deadline=None)
@given(lp_strategy, st.floats(1.0, 10.0))
def test_monotone_in_costs(data, factor):
    c, rows, b = data
    v = solve_covering_lp(CoveringLP(c, rows, b)).value
    w = solve_covering_lp(CoveringLP(np.asarray(c) * factor, rows, b)).value
    assert w >= v * (1 - 1e-9)


@settings(max_examples=60, deadline=None)
@given(lp_strategy)
def test_certificate_always_valid(data):
    lp = CoveringLP(*data)
    sol = solve_covering_lp(lp)
    assert verify_feasible(lp, sol.primal)
    assert dual_feasible(lp, sol.dual, 1e-12)
    assert sol.dual_value <= sol.value * (1 + 1e-12)
