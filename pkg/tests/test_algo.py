import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fgbandit import kernels
from fgbandit.algo import (
    AlgoConfig,
    AlgoState,
    active_set,
    block_regret,
    build_lp3,
    confidence_bonus,
    empirical_gaps,
    lp3_thresholds,
    phase_plan,
    run_algorithm,
    run_ucbn,
)
from fgbandit.env import Instance, paper_instance
from fgbandit.errors import ParameterError, StateError
from fgbandit.graph import GraphSpec, generate


def G(kind, **params):
    return generate(GraphSpec(kind, params))


def state_with(means, counts, alpha=4.0):
    means = np.asarray(means, float)
    counts = np.asarray(counts, float)
    return AlgoState(means.size, alpha, counts=counts, sums=means * counts)


def test_confidence_bonus_value():
    # ln(8 / 2**-4) = ln 128
    assert confidence_bonus(1000, 3, 8, 4.0) == pytest.approx(math.sqrt(12 * math.log(128) / 1000), rel=1e-14)
    assert confidence_bonus(1000, 3, 8, 4.0) == pytest.approx(0.24129, abs=1e-5)
    assert confidence_bonus(4000, 3, 8, 4.0) == pytest.approx(confidence_bonus(1000, 3, 8, 4.0) / 2)
    assert confidence_bonus(10, 2, 5, 4.0) == pytest.approx(2 * confidence_bonus(10, 2, 5, 1.0))
    with pytest.raises(StateError):
        confidence_bonus(0, 1, 2, 4.0)


def test_empirical_gaps():
    s = 3
    b = confidence_bonus(100, s, 2, 4.0)
    # all means equal: everything clips at 2**-s
    np.testing.assert_allclose(empirical_gaps(state_with([0.4, 0.4], [100, 100]), s), 0.125)
    # well separated means: the worse arm gets its lower-confidence gap
    st_ = state_with([0.9, 0.5], [100, 100])
    gaps = empirical_gaps(st_, s)
    assert gaps[0] == 0.125
    assert gaps[1] == pytest.approx(max(0.125, 0.4 - 2 * b))
    with pytest.raises(StateError):
        empirical_gaps(AlgoState(2, 4.0), s)


def test_gap_formula_worked_example():
    # r = (0.9, 0.5), b = (0.05, 0.05): max_j(r_j - b_j) - r_2 - b_2 = 0.85 - 0.55
    r = np.array([0.9, 0.5])
    b = np.array([0.05, 0.05])
    lower = r - b
    assert np.maximum(0.125, lower.max() - r - b) == pytest.approx([0.125, 0.3])


def test_active_set_boundary():
    st_ = state_with([0.5, 0.5], [10**9, 10**9])
    # every estimate clips at 2**-(s-1) = 2 * 2**-s, which is included
    assert active_set(st_, 3).tolist() == [0, 1]


def test_lp3_thresholds():
    gap_hat = np.array([0.25, 0.25])
    thr = lp3_thresholds(gap_hat, np.array([0, 1]), 2, 2, 3072.0)
    np.testing.assert_allclose(thr, 3072 * math.log(16) * 16)
    assert thr[0] == pytest.approx(136278.28, abs=0.01)
    thr = lp3_thresholds(np.array([0.125, 0.5]), np.array([0]), 2, 2, 3072.0)
    assert thr[1] == pytest.approx(12288.0)


def test_build_lp3_complete_graph_rows():
    st_ = state_with([0.5, 0.4, 0.3], [50, 50, 50])
    lp = build_lp3(st_, G("complete", k=3), 2, 8.0)
    assert all(r.tolist() == [0, 1, 2] for r in lp.rows)


def test_phase_plan_rules():
    plays, buf = phase_plan([2.3, 0.4, 0.0], [0.7, 0.0, 0.0])
    assert plays.tolist() == [3, 1, 0]
    assert buf.tolist() == [0.7, 0.4, 0.0]
    # 0.4 + 0.4 stays below 1: no play; 0.8 + 0.4 crosses: play
    plays, buf = phase_plan([0.4], [0.4])
    assert plays.tolist() == [0] and buf[0] == pytest.approx(0.8)
    plays, buf = phase_plan([0.4], buf)
    assert plays.tolist() == [1] and buf[0] == pytest.approx(1.2)
    with pytest.raises(ParameterError):
        phase_plan([-0.1], [0.0])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0.0, 5.0), min_size=1, max_size=40))
def test_phase_plan_total_plays_bounded(xs):
    buf = np.zeros(1)
    plays = mass = 0.0
    for x in xs:
        p, buf = phase_plan([x], buf)
        plays += p[0]
        mass += x
    # one extra play for the first fractional entry, otherwise at most 2x mass
    assert plays <= 3 * mass + 1


def test_config_validation():
    with pytest.raises(ParameterError):
        AlgoConfig(horizon=0)
    with pytest.raises(ParameterError):
        AlgoConfig(horizon=10, alpha=2.0)
    with pytest.raises(ParameterError):
        AlgoConfig.from_profile("fast", 10)
    demo = AlgoConfig.from_profile("demo", 10)
    assert (demo.alpha, demo.alpha_prime) == (1.5, 8.0)
    paper = AlgoConfig.from_profile("paper", 10, alpha=5.0)
    assert (paper.alpha, paper.alpha_prime) == (5.0, 3072.0)


def test_block_regret():
    gaps = np.array([0.0, 0.1, 0.5])
    r = block_regret(gaps, np.array([1, 0, 2]), np.array([3, 2, 1]))
    np.testing.assert_allclose(r, [0.1, 0.2, 0.3, 0.3, 0.3, 0.8])
    # exact multiples rather than long running sums
    r = block_regret(np.array([0.05]), np.array([0]), np.array([20000]))
    assert r[-1] == 1000.0


@pytest.mark.parametrize("runner", ["phased", "ucbn"])
def test_equal_means_zero_regret(runner):
    g = G("star", k=5)
    inst = Instance(np.full(5, 0.5))
    if runner == "phased":
        trace = run_algorithm(g, inst, AlgoConfig.from_profile("demo", 3000), 1)
    else:
        trace = run_ucbn(g, inst, 3000, 1)
    assert trace.horizon == 3000
    assert np.all(trace.regret == 0.0)


def test_phased_run_structure():
    spec, inst = paper_instance("example1_star", {"k": 16, "optimal_leaf": 3})
    g = generate(spec)
    cfg = AlgoConfig.from_profile("demo", 20000)
    trace = run_algorithm(g, inst, cfg, 123)
    assert trace.horizon == 20000
    assert trace.play_counts(g.k).sum() == 20000
    assert np.all(np.diff(trace.regret) >= 0)
    kinds = [p.kind for p in trace.phases]
    assert kinds[0] == "init" and kinds.count("init") == math.ceil(math.log2(16)) + 1
    ends = [p.end for p in trace.phases]
    assert ends == sorted(ends) and ends[-1] == 20000
    for p in trace.phases:
        if p.kind == "lp":
            assert p.lp_status == "optimal"
            assert p.duality_gap <= 1e-7 * p.lp_value + 1e-9


def test_phased_reaches_lp_phases_on_bandit():
    g = G("bandit", k=2)
    inst = Instance.from_gaps([0.0, 0.25], best=0.75)
    trace = run_algorithm(g, inst, AlgoConfig.from_profile("demo", 100000), 0)
    assert any(p.kind == "lp" for p in trace.phases)


def test_determinism():
    spec, inst = paper_instance("example2_starlike", {"k": 8})
    g = generate(spec)
    cfg = AlgoConfig.from_profile("demo", 5000)
    a = run_algorithm(g, inst, cfg, 9)
    b = run_algorithm(g, inst, cfg, 9)
    assert a.to_json() == b.to_json()
    c = run_algorithm(g, inst, cfg, 10)
    assert a.to_json() != c.to_json()
    assert run_ucbn(g, inst, 5000, 9).to_json() == run_ucbn(g, inst, 5000, 9).to_json()


def test_ucbn_plays_every_arm_first_and_favors_best():
    g = G("bandit", k=4)
    inst = Instance([0.2, 0.9, 0.3, 0.1])
    trace = run_ucbn(g, inst, 5000, 0)
    counts = trace.play_counts(4)
    assert np.all(counts >= 1)
    assert counts.argmax() == 1
    assert np.all(np.diff(trace.regret) >= 0)


def test_ucbn_full_information_is_cheap():
    g = G("complete", k=6)
    inst = Instance([0.1, 0.2, 0.3, 0.4, 0.5, 0.9])
    assert run_ucbn(g, inst, 4000, 0).final < 5.0


def test_backends_identical():
    found = kernels.backends()
    if len(found) < 2:
        pytest.skip("compiled extension not built")
    g = G("erdos_renyi", k=12, p=0.3, seed=4)
    inst = Instance(np.linspace(0.1, 0.9, 12))
    indptr, indices = g.csr
    noise = np.random.default_rng(0).standard_normal((3000, 12))
    out = {}
    for name, mod in found.items():
        counts, sums = np.zeros(12), np.zeros(12)
        played = np.empty(3000, dtype=np.int64)
        mod.ucbn_rounds(indptr, indices, inst.means, inst.sigma, noise, counts, sums, 1, played)
        out[name] = (played.copy(), counts.copy(), sums.copy())
    for a, b in zip(out["python"], out["cython"]):
        np.testing.assert_array_equal(a, b)


def test_size_mismatch():
    with pytest.raises(ParameterError):
        run_algorithm(G("bandit", k=2), Instance([0.1, 0.2, 0.3]), AlgoConfig(horizon=5), 0)
    with pytest.raises(ParameterError):
        run_ucbn(G("bandit", k=2), Instance([0.1, 0.2, 0.3]), 5, 0)
