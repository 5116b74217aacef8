"""Stochastic Gaussian reward environments over a feedback graph."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ParameterError, PreconditionError
from .graph import FeedbackGraph, GraphSpec, cube_parts, reinforced_wheel_parts

DEFAULT_SIGMA = math.sqrt(1.0 / math.sqrt(2.0))
OPTIMAL_ATOL = 1e-12
PAPER_INSTANCES = (
    "example1_star",
    "example2_starlike",
    "reinforced_wheel_base",
    "reinforced_wheel_case1",
    "reinforced_wheel_case2",
    "cube_env_A",
    "cube_env_B",
)


@dataclass(frozen=True, eq=False)
class Instance:
    """Mean rewards plus a common Gaussian noise scale.

    ``sigma`` is the standard deviation; the default gives variance
    ``1/sqrt(2)``.
    """

    means: np.ndarray
    sigma: float = DEFAULT_SIGMA

    def __post_init__(self):
        mu = np.array(self.means, dtype=float).ravel()
        if mu.size == 0:
            raise ParameterError("means", "need at least one arm")
        if not np.all(np.isfinite(mu)) or np.any(mu < 0) or np.any(mu > 1):
            bad = int(np.flatnonzero(~((mu >= 0) & (mu <= 1)))[0])
            raise ParameterError("means", f"mean of arm {bad} is {mu[bad]!r}, outside [0, 1]")
        if not math.isfinite(self.sigma) or self.sigma < 0:
            raise ParameterError("sigma", f"must be finite and >= 0, got {self.sigma!r}")
        mu.setflags(write=False)
        object.__setattr__(self, "means", mu)
        object.__setattr__(self, "sigma", float(self.sigma))

    def __eq__(self, other):
        return isinstance(other, Instance) and self.sigma == other.sigma and np.array_equal(self.means, other.means)

    @property
    def k(self) -> int:
        return self.means.size

    @property
    def best(self) -> float:
        return float(self.means.max())

    @property
    def gaps(self) -> np.ndarray:
        g = self.best - self.means
        g[g <= OPTIMAL_ATOL] = 0.0
        return g

    @property
    def optimal(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.gaps == 0.0))

    @property
    def delta_min(self) -> float | None:
        g = self.gaps
        sub = g[g > 0]
        return float(sub.min()) if sub.size else None

    @property
    def delta_max(self) -> float:
        return float(self.gaps.max())

    def to_json(self) -> dict:
        return {"means": self.means.tolist(), "sigma": self.sigma}

    @classmethod
    def from_json(cls, data: dict) -> "Instance":
        if "means" not in data:
            raise ParameterError("means", "missing")
        return cls(data["means"], data.get("sigma", DEFAULT_SIGMA))

    @classmethod
    def from_gaps(cls, gaps: Sequence[float], best: float = 1.0, sigma: float = DEFAULT_SIGMA) -> "Instance":
        return cls(best - np.asarray(gaps, dtype=float), sigma)


@dataclass(frozen=True)
class Observation:
    arm: int
    reward: float


def load_instance(path) -> Instance:
    with open(path) as fh:
        return Instance.from_json(json.load(fh))


def save_instance(inst: Instance, path) -> None:
    with open(path, "w") as fh:
        json.dump(inst.to_json(), fh)
        fh.write("\n")


def sample_round(g: FeedbackGraph, inst: Instance, played: int, rng: np.random.Generator) -> list[Observation]:
    """One round: the rewards of every arm in ``N_played``."""
    if not 0 <= played < g.k:
        raise ParameterError("played", f"arm {played} outside [0, {g.k})")
    nbrs = g.neighbors(played)
    noise = rng.standard_normal(len(nbrs))
    return [Observation(j, float(inst.means[j] + inst.sigma * z)) for j, z in zip(nbrs, noise)]


def sample_block(g: FeedbackGraph, inst: Instance, played: int, rounds: int, rng: np.random.Generator):
    """Observation counts and reward sums from playing ``played`` for ``rounds`` rounds.

    The sum of ``rounds`` i.i.d. Gaussians is drawn directly, one draw per
    revealed arm, which is exact in distribution.
    """
    nbrs = np.asarray(g.neighbors(played))
    z = rng.standard_normal(nbrs.size)
    sums = rounds * inst.means[nbrs] + inst.sigma * math.sqrt(rounds) * z
    return nbrs, sums


def phase_scale(s: int) -> float:
    return 2.0 ** (-s)


def make_confusing_instance(inst: Instance, s: int, target: int, delta_s: float | None = None) -> Instance:
    """Raise ``target``'s mean by ``2 * delta_s`` (``delta_s = 2**-s`` by default).

    The result lies in the perturbation class ``mu + [0, 2 * clipped_gaps]^K``
    used to lower-bound phase-``s`` regret.
    """
    d = phase_scale(s) if delta_s is None else float(delta_s)
    if not 0 <= target < inst.k:
        raise PreconditionError(f"target arm {target} outside [0, {inst.k})")
    for i in inst.optimal:
        if inst.means[i] > 1 - 2 * d + 1e-15:
            raise PreconditionError(f"optimal arm {i} has mean {inst.means[i]} > 1 - 2*delta_s = {1 - 2 * d}")
    if inst.means[target] + 2 * d > 1 + 1e-15:
        raise PreconditionError(f"target arm {target} mean {inst.means[target]} + {2 * d} exceeds 1")
    mu = inst.means.copy()
    mu[target] = min(1.0, mu[target] + 2 * d)
    return Instance(mu, inst.sigma)


def _param(params: dict, name: str, default=None, low=None, high=None):
    value = params.get(name, default)
    if value is None:
        raise ParameterError(name, "missing")
    if low is not None and not (value >= low):
        raise ParameterError(name, f"must be >= {low}, got {value!r}")
    if high is not None and not (value <= high):
        raise ParameterError(name, f"must be <= {high}, got {value!r}")
    return value


def paper_instance(name: str, params: dict | None = None) -> tuple[GraphSpec, Instance]:
    """Graph spec and means for one of the constructions in :data:`PAPER_INSTANCES`.

    Parameters
    ----------
    name : str
        ``example1_star``: star, one random leaf optimal, every other arm
        (root included) at gap ``delta``.  ``example2_starlike``: gap
        ``delta_max`` at r1, ``delta_min`` at every other suboptimal arm.
        ``reinforced_wheel_*``: hub/even/odd means ``nu - sqrt(k) delta``,
        ``nu - delta``, ``nu - k**0.25 delta``; ``case1`` lifts one odd arm
        to ``nu + k**0.25 delta`` and ``case2`` lifts it to ``nu``.
        ``cube_env_A`` / ``cube_env_B``: cube copies with V2 at 1/2, V1 at
        1/2 - delta and one random V1 arm at 1/2 + 2 delta (A) or
        1/2 + eps delta (B).
    params : dict
        ``k``/``n``, gaps, ``mu_star``/``nu``, ``seed``, ``sigma`` and
        optional explicit choice of the special arm (``optimal_leaf``,
        ``n_star``, ``optimal_arm``).
    """
    p = dict(params or {})
    sigma = float(p.get("sigma", DEFAULT_SIGMA))
    rng = np.random.default_rng(p.get("seed", 0))
    if name == "example1_star":
        k = int(_param(p, "k", 64, low=2))
        delta = float(_param(p, "delta", 0.05, low=0.0))
        mu_star = float(_param(p, "mu_star", 0.6, high=1.0))
        leaf = int(p["optimal_leaf"]) if "optimal_leaf" in p else int(1 + rng.integers(k - 1))
        if not 1 <= leaf < k:
            raise ParameterError("optimal_leaf", f"must be a leaf in [1, {k}), got {leaf}")
        mu = np.full(k, mu_star - delta)
        mu[leaf] = mu_star
        return GraphSpec("star", {"k": k}), Instance(mu, sigma)
    if name == "example2_starlike":
        k = int(_param(p, "k", 16, low=4))
        dmin = float(_param(p, "delta_min", 0.05, low=0.0))
        dmax = float(_param(p, "delta_max", 0.4, low=dmin))
        mu_star = float(_param(p, "mu_star", 0.6, high=1.0))
        leaf = int(p["optimal_leaf"]) if "optimal_leaf" in p else int(2 + rng.integers(k - 2))
        if not 2 <= leaf < k:
            raise ParameterError("optimal_leaf", f"must be a leaf in [2, {k}), got {leaf}")
        mu = np.full(k, mu_star - dmin)
        mu[0] = mu_star - dmax
        mu[leaf] = mu_star
        return GraphSpec("star_like_ex2", {"k": k}), Instance(mu, sigma)
    if name.startswith("reinforced_wheel_"):
        variant = name.removeprefix("reinforced_wheel_")
        if variant not in ("base", "case1", "case2"):
            raise ParameterError("name", f"unknown paper instance {name!r}")
        k = int(_param(p, "k", 16, low=2))
        nu = float(_param(p, "nu", 0.9, low=0.0, high=1.0))
        delta = float(_param(p, "delta", 0.05, low=0.0))
        evens, odds, hub = reinforced_wheel_parts(k)
        mu = np.empty(2 * k + 1)
        mu[evens] = nu - delta
        mu[odds] = nu - k ** 0.25 * delta
        mu[hub] = nu - math.sqrt(k) * delta
        if variant != "base":
            n_star = int(p.get("n_star", odds[0]))
            if n_star not in odds:
                raise ParameterError("n_star", f"must be an odd vertex, got {n_star}")
            mu[n_star] = nu + k ** 0.25 * delta if variant == "case1" else nu
        return GraphSpec("reinforced_wheel", {"k": k}), Instance(mu, sigma)
    if name in ("cube_env_A", "cube_env_B"):
        n = int(_param(p, "n", 10, low=1))
        delta = float(_param(p, "delta", 0.1, low=0.0))
        v1, v2 = cube_parts(n)
        mu = np.empty(8 * n)
        mu[v2] = 0.5
        mu[v1] = 0.5 - delta
        best = int(p["optimal_arm"]) if "optimal_arm" in p else int(v1[rng.integers(len(v1))])
        if best not in v1:
            raise ParameterError("optimal_arm", f"must be a V1 vertex, got {best}")
        if name == "cube_env_A":
            mu[best] = 0.5 + 2 * delta
        else:
            eps = float(_param(p, "eps", 0.1, low=0.0))
            mu[best] = 0.5 + eps * delta
        return GraphSpec("cube_copies", {"n": n}), Instance(mu, sigma)
    raise ParameterError("name", f"unknown paper instance {name!r}; expected one of {', '.join(PAPER_INSTANCES)}")
