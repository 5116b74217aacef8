"""Nonnegative covering LPs and a certifying dense simplex solver.

A covering LP here is::

    min  c . x   s.t.  sum_{j in S_r} x_j >= b_r  (every row r),   x >= 0

with ``c >= 0`` and ``b > 0``.  Its dual ``max b . y  s.t.  A^T y <= c, y >= 0``
has the origin as a feasible basis because ``c >= 0``, so the solver runs a
primal revised simplex on the dual with the slack basis as the start and no
phase one.  The primal ``x`` is read off the simplex multipliers.  Both sides
are then repaired to exact feasibility, so every returned pair is a genuine
weak-duality certificate.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CertificateError, ModelError

log = logging.getLogger(__name__)

PIVOT_TOL = 1e-9
DEFAULT_TOL = 1e-7
REFACTOR_EVERY = 50
DEGENERATE_STREAK = 25


@dataclass(frozen=True)
class CoveringLP:
    costs: np.ndarray
    rows: tuple[np.ndarray, ...]
    thresholds: np.ndarray

    def __init__(self, costs, rows: Sequence[Sequence[int]], thresholds):
        c = np.asarray(costs, dtype=float).ravel()
        b = np.asarray(thresholds, dtype=float).ravel()
        rs = tuple(np.unique(np.asarray(r, dtype=np.int64)) for r in rows)
        if c.size == 0:
            raise ModelError("covering LP needs at least one variable")
        if not np.all(np.isfinite(c)) or np.any(c < 0):
            raise ModelError("costs must be finite and nonnegative")
        if len(rs) != b.size:
            raise ModelError(f"{len(rs)} rows but {b.size} thresholds")
        if not np.all(np.isfinite(b)) or np.any(b <= 0):
            raise ModelError("thresholds must be finite and positive")
        for r, idx in enumerate(rs):
            if idx.size == 0:
                raise ModelError(f"row {r} is empty")
            if idx[0] < 0 or idx[-1] >= c.size:
                raise ModelError(f"row {r} has a variable index outside [0, {c.size})")
        for arr in (c, b, *rs):
            arr.setflags(write=False)
        object.__setattr__(self, "costs", c)
        object.__setattr__(self, "rows", rs)
        object.__setattr__(self, "thresholds", b)

    @property
    def n_vars(self) -> int:
        return self.costs.size

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def matrix(self) -> np.ndarray:
        """Dense 0/1 constraint matrix, one row per covering constraint."""
        a = np.zeros((self.n_rows, self.n_vars))
        for r, idx in enumerate(self.rows):
            a[r, idx] = 1.0
        return a

    def to_json(self) -> dict:
        return {
            "costs": self.costs.tolist(),
            "rows": [r.tolist() for r in self.rows],
            "thresholds": self.thresholds.tolist(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "CoveringLP":
        try:
            return cls(data["costs"], data["rows"], data["thresholds"])
        except KeyError as exc:
            raise ModelError(f"missing field {exc.args[0]!r}") from exc


@dataclass(frozen=True)
class LPSolution:
    primal: np.ndarray
    value: float
    dual: np.ndarray
    dual_value: float
    status: str
    iterations: int = 0

    @property
    def gap(self) -> float:
        return self.value - self.dual_value

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "value": self.value,
            "dual_value": self.dual_value,
            "gap": self.gap,
            "iterations": self.iterations,
            "primal": self.primal.tolist(),
            "dual": self.dual.tolist(),
        }


def verify_feasible(lp: CoveringLP, x, slack_tol: float = 0.0) -> bool:
    """True iff ``x >= 0`` and every row holds up to the factor ``1 - slack_tol``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (lp.n_vars,):
        raise ModelError(f"expected {lp.n_vars} entries, got shape {x.shape}")
    if np.any(x < 0):
        return False
    return bool(np.all(_row_sums(lp.rows, x) >= lp.thresholds * (1.0 - slack_tol)))


def _row_sums(rows, x) -> np.ndarray:
    # One summation order shared by the checker and the repair step.
    return np.array([x[idx].sum() for idx in rows])


def dual_feasible(lp: CoveringLP, y, tol: float = 0.0) -> bool:
    y = np.asarray(y, dtype=float)
    if y.shape != (lp.n_rows,):
        raise ModelError(f"expected {lp.n_rows} dual entries, got shape {y.shape}")
    if np.any(y < 0):
        return False
    load = lp.matrix().T @ y if lp.n_rows else np.zeros(lp.n_vars)
    return bool(np.all(load <= lp.costs * (1.0 + tol) + 1e-12 * max(1.0, lp.costs.max())))


def weak_duality_gap(lp: CoveringLP, sol: LPSolution, tol: float = DEFAULT_TOL) -> float:
    """``value - dual_value`` for a primal/dual feasible pair.

    Raises :class:`CertificateError` if either side is infeasible or the gap is
    negative beyond ``tol`` (which would contradict weak duality).
    """
    if not verify_feasible(lp, sol.primal, tol):
        raise CertificateError("primal solution is not feasible")
    if not dual_feasible(lp, sol.dual, tol):
        raise CertificateError("dual solution is not feasible")
    value = float(lp.costs @ sol.primal)
    dual_value = float(lp.thresholds @ sol.dual) if lp.n_rows else 0.0
    gap = value - dual_value
    if gap < -tol * max(abs(value), 1e-300) - 1e-12:
        raise CertificateError(f"dual value {dual_value} exceeds primal value {value}")
    return max(gap, 0.0)


def solve_covering_lp(lp: CoveringLP, tol: float = DEFAULT_TOL, max_iter: int | None = None) -> LPSolution:
    """Solve ``lp`` and return a certified primal/dual pair.

    ``status`` is ``"optimal"`` when the relative duality gap is within
    ``tol``; ``"approximate"`` only when the iteration cap
    ``50 * (n_vars + n_rows) ** 2`` was reached first.
    """
    k, m = lp.n_vars, lp.n_rows
    if m == 0:
        return LPSolution(np.zeros(k), 0.0, np.zeros(0), 0.0, "optimal")
    c_scale = float(lp.costs.max())
    b_scale = float(lp.thresholds.max())
    if c_scale == 0.0:
        x = np.zeros(k)
        for idx, b in zip(lp.rows, lp.thresholds):
            x[idx[0]] = max(x[idx[0]], b)
        return LPSolution(x, 0.0, np.zeros(m), 0.0, "optimal")

    c = lp.costs / c_scale
    b = lp.thresholds / b_scale
    a = lp.matrix()
    if max_iter is None:
        max_iter = 50 * (k + m) ** 2
    x, y, iters, capped = _dual_simplex_core(a, b, c, max_iter)
    x, y = _repair(lp, a, x * b_scale, y * c_scale)
    value = float(lp.costs @ x)
    dual_value = float(lp.thresholds @ y)
    gap = value - dual_value
    status = "optimal" if gap <= tol * max(value, 0.0) + 1e-12 * c_scale * b_scale else "approximate"
    if status == "approximate" and not capped:
        log.warning("covering LP finished with relative gap %.3g above tol %.3g", gap / max(value, 1e-300), tol)
    return LPSolution(x, value, y, dual_value, status, iters)


def _dual_simplex_core(a, b, c, max_iter):
    """Primal revised simplex on ``max b.y s.t. A^T y + w = c``.

    Columns ``0..m-1`` are the row duals ``y``, ``m..m+k-1`` the slacks.
    Dantzig pricing, switching permanently to Bland's rule after a run of
    degenerate pivots.
    """
    m, k = a.shape
    cols = np.hstack([a.T, np.eye(k)])
    obj = np.concatenate([b, np.zeros(k)])
    basis = np.arange(m, m + k)
    binv = np.eye(k)
    xb = c.copy()
    bland = False
    streak = 0
    capped = False
    it = 0
    while True:
        if it >= max_iter:
            capped = True
            break
        if it and it % REFACTOR_EVERY == 0:
            binv = np.linalg.inv(cols[:, basis])
            xb = np.maximum(binv @ c, 0.0)
        pi = obj[basis] @ binv
        reduced = obj - pi @ cols
        reduced[basis] = 0.0
        scale = max(1.0, float(np.abs(obj).max()))
        candidates = np.flatnonzero(reduced > PIVOT_TOL * scale)
        if candidates.size == 0:
            break
        q = int(candidates[0]) if bland else int(candidates[np.argmax(reduced[candidates])])
        col = binv @ cols[:, q]
        rows = np.flatnonzero(col > PIVOT_TOL)
        if rows.size == 0:
            # Unbounded dual means an infeasible primal, impossible for valid models.
            raise ModelError("dual is unbounded; covering LP infeasible")
        ratios = xb[rows] / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + PIVOT_TOL * max(1.0, best)]
        p = int(ties[np.argmin(basis[ties])])
        step = xb[p] / col[p]
        if step <= PIVOT_TOL:
            streak += 1
            if streak >= DEGENERATE_STREAK:
                bland = True
        else:
            streak = 0
        xb = xb - step * col
        xb[p] = step
        np.maximum(xb, 0.0, out=xb)
        piv_row = binv[p] / col[p]
        binv -= np.outer(col, piv_row)
        binv[p] = piv_row
        basis[p] = q
        it += 1
    pi = obj[basis] @ binv
    x = np.maximum(pi, 0.0)
    y = np.zeros(m)
    sel = basis < m
    y[basis[sel]] = np.maximum(xb[sel], 0.0)
    return x, y, it, capped


def _repair(lp, a, x, y):
    """Scale ``x`` up and ``y`` down until both are exactly feasible."""
    b, c = lp.thresholds, lp.costs
    lhs = _row_sums(lp.rows, x)
    short = lhs < b
    if np.any(short):
        ratio = np.where(short, lhs / b, 1.0).min()
        if ratio > 0.5:
            x = x / ratio
        else:
            # Multipliers far off (iteration cap); patch each short row with its cheapest variable.
            for r in np.flatnonzero(_row_sums(lp.rows, x) < b):
                idx = lp.rows[r]
                j = idx[np.argmin(c[idx])]
                x[j] += b[r] - x[idx].sum()
    while np.any(_row_sums(lp.rows, x) < b):
        x = x * (1.0 + 4 * np.finfo(float).eps)
    load = a.T @ y
    over = load > c
    if np.any(over):
        zero_cost = over & (c <= 0)
        if np.any(zero_cost):
            y = y.copy()
            y[(a[:, zero_cost] > 0).any(axis=1)] = 0.0
            load = a.T @ y
            over = load > c
        if np.any(over):
            y = y * (c[over] / load[over]).min()
        if np.any(a.T @ y > c):
            y = y * (1.0 - 4 * np.finfo(float).eps)
    return x, y
