"""Instance complexities: the asymptotic constant ``c*`` and the finite-time ``d*``.

Both reduce to covering LPs over the closed neighborhoods of the graph.
``c*`` weighs plays by the true gaps and asks every suboptimal arm to be
observed ``1/gap**2`` times.  Phase ``s`` works at scale ``2**-s``: gaps are
clipped from below to the scale, and every arm within twice the scale of
the best must be observed ``4**s`` times.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .env import Instance
from .errors import ParameterError, PreconditionError
from .graph import FeedbackGraph, check_dstar_condition, max_weight_independent_set
from .lp import DEFAULT_TOL, CoveringLP, LPSolution, solve_covering_lp


def clip_to_powers_of_two(gaps) -> np.ndarray:
    """Round every positive gap down to a power of two (zeros stay zero)."""
    g = np.asarray(gaps, dtype=float)
    out = np.zeros_like(g)
    for i, v in enumerate(g):
        if v > 0:
            mant, exp = math.frexp(v)
            out[i] = math.ldexp(1.0, exp - 1)
    return out


@dataclass(frozen=True)
class PhaseSchedule:
    horizon: int

    def __post_init__(self):
        if self.horizon < 1:
            raise ParameterError("horizon", f"must be >= 1, got {self.horizon}")

    @property
    def phases(self) -> range:
        return range(1, max(1, math.ceil(math.log2(self.horizon))) + 1)

    @staticmethod
    def scale(s: int) -> float:
        return 2.0 ** (-s)

    @staticmethod
    def clipped_gaps(gaps: np.ndarray, s: int) -> np.ndarray:
        return np.maximum(gaps, 2.0 ** (-s))

    @staticmethod
    def active(gaps: np.ndarray, s: int) -> np.ndarray:
        return np.flatnonzero(gaps <= 2.0 * 2.0 ** (-s))


@dataclass(frozen=True)
class LPValue:
    value: float
    primal: np.ndarray
    dual_value: float
    status: str

    @property
    def gap(self) -> float:
        return self.value - self.dual_value

    @classmethod
    def of(cls, sol: LPSolution) -> "LPValue":
        return cls(sol.value, sol.primal, sol.dual_value, sol.status)


def _gaps(inst: Instance, clip_gaps: bool) -> np.ndarray:
    g = inst.gaps
    return clip_to_powers_of_two(g) if clip_gaps else g


def _check_sizes(g: FeedbackGraph, inst: Instance):
    if g.k != inst.k:
        raise ParameterError("instance", f"{inst.k} means for a graph on {g.k} vertices")


def lp1(g: FeedbackGraph, gaps: np.ndarray) -> CoveringLP | None:
    sub = np.flatnonzero(gaps > 0)
    if sub.size == 0:
        return None
    return CoveringLP(gaps, [g.neighbors(i) for i in sub], 1.0 / gaps[sub] ** 2)


def c_star(g: FeedbackGraph, inst: Instance, clip_gaps: bool = False, tol: float = DEFAULT_TOL) -> LPValue:
    """Value of the asymptotic covering LP (0 when every arm is optimal)."""
    _check_sizes(g, inst)
    lp = lp1(g, _gaps(inst, clip_gaps))
    if lp is None:
        return LPValue(0.0, np.zeros(g.k), 0.0, "optimal")
    return LPValue.of(solve_covering_lp(lp, tol))


def lp2(g: FeedbackGraph, gaps: np.ndarray, s: int) -> CoveringLP:
    scale = 2.0 ** (-s)
    active = PhaseSchedule.active(gaps, s)
    return CoveringLP(
        PhaseSchedule.clipped_gaps(gaps, s),
        [g.neighbors(i) for i in active],
        np.full(active.size, 1.0 / scale**2),
    )


def d_lp2(g: FeedbackGraph, inst: Instance, s: int, clip_gaps: bool = False, tol: float = DEFAULT_TOL) -> LPValue:
    """Value of the phase-``s`` LP with clipped costs over the active arms."""
    if s < 1:
        raise ParameterError("s", f"phase must be >= 1, got {s}")
    _check_sizes(g, inst)
    return LPValue.of(solve_covering_lp(lp2(g, _gaps(inst, clip_gaps), s), tol))


def dstar_phase_limit(inst: Instance, clip_gaps: bool = False) -> int:
    """Last phase of the ``d*`` range: ``floor(log2(|I*| / delta_min))``, at least 1."""
    gaps = _gaps(inst, clip_gaps)
    sub = gaps[gaps > 0]
    if sub.size == 0:
        return 0
    ratio = len(inst.optimal) / float(sub.min())
    # Guard exact powers of two against log2 rounding just below the integer.
    top = math.floor(math.log2(ratio) + 1e-12)
    return max(1, top)


@dataclass(frozen=True)
class DStarResult:
    value: float
    argmax_s: int
    profile: dict = field(default_factory=dict)
    gaps: dict = field(default_factory=dict)


def d_star(g: FeedbackGraph, inst: Instance, clip_gaps: bool = False, tol: float = DEFAULT_TOL) -> DStarResult:
    """Max of the phase values over ``s = 1..dstar_phase_limit``; 0 with no suboptimal arm."""
    _check_sizes(g, inst)
    top = dstar_phase_limit(inst, clip_gaps)
    if top == 0:
        return DStarResult(0.0, 0)
    profile, gaps = {}, {}
    for s in range(1, top + 1):
        v = d_lp2(g, inst, s, clip_gaps, tol)
        profile[s] = v.value
        gaps[s] = v.gap
    best = max(profile, key=lambda s: (profile[s], -s))
    return DStarResult(profile[best], best, profile, gaps)


def independent_set_bound(g: FeedbackGraph, inst: Instance, clip_gaps: bool = False) -> float:
    """Max over independent sets of the summed inverse gaps, optimal arms weighted 0."""
    _check_sizes(g, inst)
    gaps = _gaps(inst, clip_gaps)
    w = np.zeros(g.k)
    sub = gaps > 0
    w[sub] = 1.0 / gaps[sub]
    return max_weight_independent_set(g, w).weight


@dataclass(frozen=True)
class CubeTable:
    a_env_a: float
    a_env_b: float
    b_env_a: float
    b_env_b: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.a_env_a, self.a_env_b, self.b_env_a, self.b_env_b)

    def to_json(self) -> dict:
        return {"A-EnvA": self.a_env_a, "A-EnvB": self.a_env_b, "B-EnvA": self.b_env_a, "B-EnvB": self.b_env_b}


def cube_scenario_table(n: int, delta: float, eps: float) -> CubeTable:
    """Closed-form regret of the two base strategies on the cube-copies environments."""
    if not isinstance(n, int) or n < 1:
        raise ParameterError("n", f"must be an integer >= 1, got {n!r}")
    if not 0 < delta < 0.25:
        raise ParameterError("delta", f"must lie in (0, 1/4), got {delta!r}")
    if not 0 < eps < 1:
        raise ParameterError("eps", f"must lie in (0, 1), got {eps!r}")
    return CubeTable(
        n / (3 * delta),
        n / ((1 + eps) * delta),
        4 * n / (9 * delta),
        4 * n * eps / ((1 + eps) ** 2 * delta),
    )


def confusing_value(g: FeedbackGraph, inst: Instance, s: int, tol: float = DEFAULT_TOL) -> LPValue:
    """Phase-``s`` LP value read as the regret floor over perturbed instances.

    Requires every optimal mean to leave room for a ``2 * 2**-s`` upward shift.
    """
    scale = 2.0 ** (-s)
    for i in inst.optimal:
        if inst.means[i] > 1 - 2 * scale + 1e-15:
            raise PreconditionError(f"optimal arm {i} has mean {inst.means[i]} > 1 - 2*2^-{s} = {1 - 2 * scale}")
    return d_lp2(g, inst, s, tol=tol)


@dataclass(frozen=True)
class ComplexityReport:
    c_star: float
    c_star_primal: np.ndarray
    d_profile: dict
    d_star: float
    argmax_s: int
    is_bound: float
    is_bound_exact: bool
    star_condition: bool
    duality_gaps: dict

    def to_json(self) -> dict:
        top = max(self.d_profile, default=0)
        return {
            "c_star": self.c_star,
            "c_star_primal": self.c_star_primal.tolist(),
            # index s holds the phase-s value; slot 0 is unused
            "d_profile": [None] + [self.d_profile[s] for s in range(1, top + 1)],
            "d_star": self.d_star,
            "argmax_s": self.argmax_s,
            "is_bound": self.is_bound,
            "is_bound_exact": self.is_bound_exact,
            "star_condition": self.star_condition,
            "duality_gaps": self.duality_gaps,
        }


def complexity_report(g: FeedbackGraph, inst: Instance, clip_gaps: bool = False, tol: float = DEFAULT_TOL) -> ComplexityReport:
    cs = c_star(g, inst, clip_gaps, tol)
    ds = d_star(g, inst, clip_gaps, tol)
    gaps = _gaps(inst, clip_gaps)
    w = np.where(gaps > 0, 1.0 / np.where(gaps > 0, gaps, 1.0), 0.0)
    mis = max_weight_independent_set(g, w)
    return ComplexityReport(
        c_star=cs.value,
        c_star_primal=cs.primal,
        d_profile=ds.profile,
        d_star=ds.value,
        argmax_s=ds.argmax_s,
        is_bound=mis.weight,
        is_bound_exact=mis.exact,
        star_condition=check_dstar_condition(g),
        duality_gaps={"c_star": cs.gap, "d_profile": [None] + [ds.gaps[s] for s in sorted(ds.gaps)]},
    )
