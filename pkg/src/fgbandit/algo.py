"""The phased covering-LP learner and a UCB-N baseline.

The learner runs in phases ``s`` at gap scale ``2**-s``.  It first sweeps a
greedy dominating set with geometrically growing budgets.  Each later phase
then solves an empirical covering LP built from confidence-adjusted gap
estimates and plays its solution, rounding small fractional entries through
a per-arm buffer.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .complexity import clip_to_powers_of_two
from .env import Instance, sample_block
from .errors import ParameterError, StateError
from .graph import FeedbackGraph, greedy_dominating_set
from .lp import DEFAULT_TOL, CoveringLP, solve_covering_lp

log = logging.getLogger(__name__)

PROFILES = {
    "paper": {"alpha": 4.0, "alpha_prime": 768 * 4.0},
    # Not theoretical: small constants so runs finish at desk scale.
    "demo": {"alpha": 1.5, "alpha_prime": 8.0},
}
X_ZERO_TOL = 1e-9
UCBN_CHUNK = 4096


@dataclass(frozen=True)
class AlgoConfig:
    horizon: int
    alpha: float = 4.0
    alpha_prime: float = 3072.0
    lp_tol: float = DEFAULT_TOL
    clip_gaps: bool = False
    profile: str = "paper"

    def __post_init__(self):
        if self.horizon < 1:
            raise ParameterError("horizon", f"must be >= 1, got {self.horizon}")
        # The demo profile deliberately goes below the theoretical alpha >= 3.
        if self.profile == "paper" and self.alpha < 3:
            raise ParameterError("alpha", f"must be >= 3 for the paper profile, got {self.alpha}")
        if self.alpha <= 0:
            raise ParameterError("alpha", f"must be positive, got {self.alpha}")
        if self.alpha_prime < self.alpha and self.profile == "paper":
            raise ParameterError("alpha_prime", f"must be >= alpha, got {self.alpha_prime}")
        if self.alpha_prime <= 0:
            raise ParameterError("alpha_prime", f"must be positive, got {self.alpha_prime}")

    @classmethod
    def from_profile(cls, profile: str, horizon: int, **overrides) -> "AlgoConfig":
        if profile not in PROFILES:
            raise ParameterError("profile", f"unknown profile {profile!r}; expected one of {', '.join(PROFILES)}")
        values = dict(PROFILES[profile])
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(horizon=horizon, profile=profile, **values)


def confidence_bonus(n, s: int, k: int, alpha: float):
    """Half-width ``sqrt(3 alpha ln(k / 2**-(s+1)) / n)``; ``n`` must be positive."""
    n_arr = np.asarray(n, dtype=float)
    if np.any(n_arr <= 0):
        raise StateError("confidence bonus needs at least one observation")
    out = np.sqrt(3.0 * alpha * _log_term(k, s) / n_arr)
    return float(out) if out.ndim == 0 else out


def _log_term(k: int, s: int) -> float:
    # ln(k / 2**-(s+1)) without forming a tiny float for large s
    return math.log(k) + (s + 1) * math.log(2.0)


@dataclass
class AlgoState:
    k: int
    alpha: float
    counts: np.ndarray = None
    sums: np.ndarray = None
    buffer: np.ndarray = None
    phase: int = 0
    t: int = 0

    def __post_init__(self):
        if self.counts is None:
            self.counts = np.zeros(self.k)
        if self.sums is None:
            self.sums = np.zeros(self.k)
        if self.buffer is None:
            self.buffer = np.zeros(self.k)

    @property
    def means(self) -> np.ndarray:
        if np.any(self.counts <= 0):
            raise StateError(f"arms {np.flatnonzero(self.counts <= 0).tolist()} never observed")
        return self.sums / self.counts

    def bonuses(self, s: int) -> np.ndarray:
        return confidence_bonus(self.counts, s, self.k, self.alpha)

    def observe(self, arms, sums, rounds: int) -> None:
        self.counts[arms] += rounds
        self.sums[arms] += sums


def empirical_gaps(state: AlgoState, s: int) -> np.ndarray:
    """Confidence-adjusted gap estimates at phase ``s``, clipped below at ``2**-s``."""
    r = state.means
    b = state.bonuses(s)
    lower = r - b
    top = lower[int(np.argmax(lower))]
    return np.maximum(2.0 ** (-s), top - r - b)


def active_set(state: AlgoState, s: int) -> np.ndarray:
    """Arms whose phase ``s-1`` gap estimate is within ``2 * 2**-s``."""
    return np.flatnonzero(empirical_gaps(state, s - 1) <= 2.0 * 2.0 ** (-s))


def lp3_thresholds(gap_hat: np.ndarray, active: np.ndarray, s: int, k: int, alpha_prime: float) -> np.ndarray:
    scale = 2.0 ** (-s)
    thr = alpha_prime / gap_hat**2
    thr[active] = alpha_prime * _log_term(k, s) / scale**2
    return thr


def build_lp3(state: AlgoState, g: FeedbackGraph, s: int, alpha_prime: float, clip_gaps: bool = False) -> CoveringLP:
    """Empirical phase-``s`` LP: costs are the phase ``s-1`` gap estimates."""
    gap_hat = empirical_gaps(state, s - 1)
    if clip_gaps:
        gap_hat = clip_to_powers_of_two(gap_hat)
    active = np.flatnonzero(gap_hat <= 2.0 * 2.0 ** (-s))
    thr = lp3_thresholds(gap_hat, active, s, g.k, alpha_prime)
    return CoveringLP(gap_hat, [g.neighbors(i) for i in range(g.k)], thr)


def phase_plan(x, buffer) -> tuple[np.ndarray, np.ndarray]:
    """Integer plays for one phase from a fractional LP solution.

    Entries ``>= 1`` are rounded up.  An entry in ``(0, 1)`` plays once the
    first time, and afterwards only when adding it to the buffer crosses an
    integer; the buffer accumulates those entries.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ParameterError("x", "LP solution has negative entries")
    new_buffer = np.array(buffer, dtype=float)
    plays = np.zeros(x.size, dtype=np.int64)
    big = x >= 1
    plays[big] = np.ceil(x[big]).astype(np.int64)
    for i in np.flatnonzero((x > 0) & ~big):
        b = new_buffer[i]
        if b == 0 or math.floor(b + x[i]) > math.floor(b):
            plays[i] = 1
        new_buffer[i] = b + x[i]
    return plays, new_buffer


@dataclass
class PhaseRecord:
    s: int
    kind: str
    end: int
    plays: list
    lp_value: float | None = None
    duality_gap: float | None = None
    lp_status: str | None = None
    lp_mass: list | None = None
    truncated: bool = False

    def to_json(self) -> dict:
        return {
            "s": self.s,
            "kind": self.kind,
            "tau": self.end,
            "plays": self.plays,
            "lp_value": self.lp_value,
            "duality_gap": self.duality_gap,
            "lp_status": self.lp_status,
            "lp_mass": self.lp_mass,
            "truncated": self.truncated,
        }


@dataclass
class RegretTrace:
    """Per-round cumulative pseudo-regret of one run plus its phase log.

    ``arms``/``runs`` is the run-length encoding of the played arm sequence.
    """

    algo: str
    seed: int
    regret: np.ndarray
    arms: np.ndarray
    runs: np.ndarray
    phases: list = field(default_factory=list)

    @property
    def horizon(self) -> int:
        return int(self.regret.size)

    @property
    def final(self) -> float:
        return float(self.regret[-1]) if self.regret.size else 0.0

    def play_counts(self, k: int) -> np.ndarray:
        return np.bincount(self.arms, weights=self.runs, minlength=k).astype(np.int64)

    def to_json(self) -> dict:
        return {
            "algo": self.algo,
            "seed": self.seed,
            "horizon": self.horizon,
            "final_regret": self.final,
            "phases": [p.to_json() for p in self.phases],
        }


class _Recorder:
    """Collects played blocks and stops exactly at the horizon."""

    def __init__(self, g, inst, horizon, rng):
        self.g, self.inst, self.horizon, self.rng = g, inst, horizon, rng
        self.gaps = inst.gaps
        self.t = 0
        self.arms: list[int] = []
        self.runs: list[int] = []

    @property
    def done(self) -> bool:
        return self.t >= self.horizon

    def play(self, arm: int, rounds: int, state: AlgoState) -> int:
        rounds = min(int(rounds), self.horizon - self.t)
        if rounds <= 0:
            return 0
        nbrs, sums = sample_block(self.g, self.inst, arm, rounds, self.rng)
        state.observe(nbrs, sums, rounds)
        self.arms.append(arm)
        self.runs.append(rounds)
        self.t += rounds
        state.t = self.t
        return rounds

    def trace(self, algo, seed, phases) -> RegretTrace:
        arms = np.asarray(self.arms, dtype=np.int64)
        runs = np.asarray(self.runs, dtype=np.int64)
        return RegretTrace(algo, seed, block_regret(self.gaps, arms, runs), arms, runs, phases)


def block_regret(gaps: np.ndarray, arms: np.ndarray, runs: np.ndarray) -> np.ndarray:
    """Cumulative pseudo-regret per round from a run-length encoded play sequence."""
    if arms.size == 0:
        return np.zeros(0)
    per_block = gaps[arms] * runs
    start = np.concatenate([[0.0], np.cumsum(per_block)[:-1]])
    offset = np.arange(1, int(runs.sum()) + 1) - np.repeat(np.cumsum(runs) - runs, runs)
    return np.repeat(start, runs) + np.repeat(gaps[arms], runs) * offset


def rng_for(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed)))


def run_algorithm(g: FeedbackGraph, inst: Instance, config: AlgoConfig, master_seed: int) -> RegretTrace:
    """Run the phased LP learner for ``config.horizon`` rounds."""
    if g.k != inst.k:
        raise ParameterError("instance", f"{inst.k} means for a graph on {g.k} vertices")
    rec = _Recorder(g, inst, config.horizon, rng_for(master_seed))
    state = AlgoState(g.k, config.alpha)
    phases: list[PhaseRecord] = []
    dom = greedy_dominating_set(g)
    last_init = math.ceil(math.log2(g.k)) if g.k > 1 else 0

    for s in range(last_init + 1):
        budget = math.ceil(config.alpha_prime * _log_term(g.k, s) / 4.0 ** (-s))
        plays = [0] * g.k
        for arm in dom:
            plays[arm] = rec.play(arm, budget, state)
        phases.append(PhaseRecord(s, "init", rec.t, plays, truncated=rec.done and sum(plays) < budget * len(dom)))
        state.phase = s
        if rec.done:
            return rec.trace("phased_lp", master_seed, phases)
    if np.any(state.counts <= 0):
        raise StateError("dominating set left arms unobserved after initialization")

    s = last_init + 1
    while not rec.done:
        lp = build_lp3(state, g, s, config.alpha_prime, config.clip_gaps)
        sol = solve_covering_lp(lp, config.lp_tol)
        x = np.where(sol.primal > X_ZERO_TOL, sol.primal, 0.0)
        want, state.buffer = phase_plan(x, state.buffer)
        plays = [0] * g.k
        for arm in np.flatnonzero(want):
            plays[int(arm)] = rec.play(int(arm), int(want[arm]), state)
        phases.append(
            PhaseRecord(
                s,
                "lp",
                rec.t,
                plays,
                lp_value=sol.value,
                duality_gap=sol.gap,
                lp_status=sol.status,
                lp_mass=x.tolist(),
                truncated=sum(plays) < int(want.sum()),
            )
        )
        state.phase = s
        s += 1
    return rec.trace("phased_lp", master_seed, phases)


def run_ucbn(g: FeedbackGraph, inst: Instance, horizon: int, master_seed: int) -> RegretTrace:
    """UCB-N: play the arm with the largest ``mean + sqrt(2 ln t / n)``, update every revealed arm."""
    if g.k != inst.k:
        raise ParameterError("instance", f"{inst.k} means for a graph on {g.k} vertices")
    if horizon < 1:
        raise ParameterError("horizon", f"must be >= 1, got {horizon}")
    rng = rng_for(master_seed)
    indptr, indices = g.csr
    means = np.ascontiguousarray(inst.means, dtype=float)
    counts = np.zeros(g.k)
    sums = np.zeros(g.k)
    played = np.empty(horizon, dtype=np.int64)
    t = 1
    while t <= horizon:
        n = min(UCBN_CHUNK, horizon - t + 1)
        noise = rng.standard_normal((n, g.k))
        kernels.ucbn_rounds(indptr, indices, means, inst.sigma, noise, counts, sums, t, played[t - 1 : t - 1 + n])
        t += n
    change = np.flatnonzero(np.diff(played)) + 1
    starts = np.concatenate([[0], change])
    runs = np.diff(np.concatenate([starts, [horizon]]))
    arms, runs = played[starts], runs.astype(np.int64)
    return RegretTrace("ucbn", master_seed, block_regret(inst.gaps, arms, runs), arms, runs)
