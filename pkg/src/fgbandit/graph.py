"""Feedback graphs: representation, generators and structural queries.

Vertices are arms ``0..k-1``.  Every vertex carries a self-loop, so the closed
neighborhood ``N_i`` always contains ``i`` and playing an arm always reveals
its own reward.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import GraphError, ParameterError

EXACT_MIS_LIMIT = 40

GRAPH_KINDS = (
    "bandit",
    "complete",
    "star",
    "star_like_ex2",
    "reinforced_wheel",
    "cube_copies",
    "erdos_renyi",
    "path",
    "disjoint_cliques",
)


@dataclass(frozen=True)
class FeedbackGraph:
    """Undirected graph with closed neighborhoods stored per vertex.

    Construction does not validate; use :func:`validate` or the
    :meth:`from_edges` / :func:`generate` / :func:`load_graph` entry points,
    which always return valid graphs.
    """

    k: int
    adj: tuple[tuple[int, ...], ...]

    @classmethod
    def from_edges(cls, k: int, edges: Iterable[tuple[int, int]]) -> "FeedbackGraph":
        if k < 1:
            raise ParameterError("k", f"must be >= 1, got {k}")
        nbrs = [{i} for i in range(k)]
        for u, v in edges:
            if not (0 <= u < k and 0 <= v < k):
                raise GraphError(f"edge ({u},{v}) out of range for k={k}")
            nbrs[u].add(v)
            nbrs[v].add(u)
        return cls(k, tuple(tuple(sorted(s)) for s in nbrs))

    @classmethod
    def from_adjacency(cls, adj: Sequence[Iterable[int]]) -> "FeedbackGraph":
        return cls(len(adj), tuple(tuple(sorted(set(int(j) for j in row))) for row in adj))

    def neighbors(self, i: int) -> tuple[int, ...]:
        return self.adj[i]

    @cached_property
    def matrix(self) -> np.ndarray:
        """Boolean ``k x k`` closed-neighborhood matrix (row i = N_i)."""
        m = np.zeros((self.k, self.k), dtype=bool)
        for i, row in enumerate(self.adj):
            m[i, list(row)] = True
        m.setflags(write=False)
        return m

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """``(indptr, indices)`` arrays for the compiled kernels."""
        indptr = np.zeros(self.k + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(r) for r in self.adj])
        indices = np.fromiter((j for r in self.adj for j in r), dtype=np.int64, count=int(indptr[-1]))
        return indptr, indices

    @cached_property
    def masks(self) -> tuple[int, ...]:
        """Closed neighborhoods as integer bitmasks."""
        out = []
        for row in self.adj:
            m = 0
            for j in row:
                m |= 1 << j
            out.append(m)
        return tuple(out)

    def edges(self) -> list[tuple[int, int]]:
        """Edges ``(u, v)`` with ``u < v``; self-loops omitted."""
        return [(u, v) for u, row in enumerate(self.adj) for v in row if u < v]

    def to_json(self) -> dict:
        return {"k": self.k, "adj": [list(r) for r in self.adj]}


@dataclass(frozen=True)
class GraphSpec:
    kind: str
    params: dict = field(default_factory=dict)

    @classmethod
    def parse(cls, text: str) -> "GraphSpec":
        """Parse ``kind`` or ``kind:key=value,key=value``."""
        kind, _, rest = text.partition(":")
        params: dict = {}
        for item in filter(None, rest.split(",")):
            key, sep, value = item.partition("=")
            if not sep:
                raise ParameterError("graph", f"malformed parameter {item!r}")
            params[key.strip()] = _coerce(value.strip())
        return cls(kind.strip(), params)


def _coerce(value: str):
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            pass
    if "/" in value:
        return [_coerce(v) for v in value.split("/")]
    return value


@dataclass(frozen=True)
class CollapseResult:
    quotient: FeedbackGraph
    class_of: tuple[int, ...]
    representatives: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class MWISResult:
    vertices: tuple[int, ...]
    weight: float
    exact: bool


def validate(g: FeedbackGraph) -> list[str]:
    """Return the list of violations; an empty list means ``g`` is valid."""
    problems = []
    if g.k < 1:
        problems.append(f"vertex count {g.k} < 1")
    if len(g.adj) != g.k:
        problems.append(f"adjacency has {len(g.adj)} rows for k={g.k}")
        return problems
    for i, row in enumerate(g.adj):
        if list(row) != sorted(set(row)):
            problems.append(f"unsorted or duplicate neighbors at {i}")
        for j in row:
            if not 0 <= j < g.k:
                problems.append(f"neighbor index {j} out of range at {i}")
        if i not in row:
            problems.append(f"missing self-loop {i}")
    rows = [set(r) for r in g.adj]
    for i, row in enumerate(rows):
        for j in sorted(row):
            if 0 <= j < g.k and i not in rows[j]:
                problems.append(f"asymmetric pair ({i},{j})")
    return problems


def _checked(g: FeedbackGraph) -> FeedbackGraph:
    problems = validate(g)
    if problems:
        raise GraphError("invalid graph: " + "; ".join(problems))
    return g


def _require_int(params: dict, name: str, low: int) -> int:
    if name not in params:
        raise ParameterError(name, "missing")
    value = params[name]
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < low:
        raise ParameterError(name, f"must be an integer >= {low}, got {value!r}")
    return int(value)


def wheel_span(k: int) -> int:
    """Smallest integer ``m`` with ``m**8 >= k``, i.e. ``ceil(k ** (1/8))`` without float error."""
    m = max(1, int(math.floor(k ** 0.125)))
    while m ** 8 < k:
        m += 1
    while m > 1 and (m - 1) ** 8 >= k:
        m -= 1
    return m


def reinforced_wheel_parts(k: int) -> tuple[list[int], list[int], list[int]]:
    """Vertex groups of the reinforced wheel on ``2k + 1`` vertices.

    Returns ``(evens, odds, [0])``: the ``k`` even vertices ``2..2k``, the
    ``k`` odd vertices ``1..2k-1`` and the hub.
    """
    return [2 * i for i in range(1, k + 1)], [2 * i + 1 for i in range(k)], [0]


def _reinforced_wheel(k: int) -> FeedbackGraph:
    evens, odds, _ = reinforced_wheel_parts(k)
    span = min(wheel_span(k), k - 1)
    edges = []
    for idx, v in enumerate(evens):
        edges.append((0, v))
        # 2i sits between odd vertices 2i-1 and 2i+1; the last one wraps to 1.
        edges.append((v, odds[idx]))
        edges.append((v, odds[(idx + 1) % k]))
    for idx, v in enumerate(odds):
        for step in range(1, span + 1):
            edges.append((v, odds[(idx + step) % k]))
    return FeedbackGraph.from_edges(2 * k + 1, edges)


# Q3 codes in even parity (V1) then odd parity (V2) order.
_CUBE_ORDER = (0, 3, 5, 6, 1, 2, 4, 7)


def cube_parts(n: int) -> tuple[list[int], list[int]]:
    """``(V1, V2)`` vertex indices across ``n`` cube copies."""
    v1 = [8 * c + i for c in range(n) for i in range(4)]
    v2 = [8 * c + i for c in range(n) for i in range(4, 8)]
    return v1, v2


def _cube_copies(n: int) -> FeedbackGraph:
    pos = {code: i for i, code in enumerate(_CUBE_ORDER)}
    edges = []
    for c in range(n):
        for code in range(8):
            for bit in (1, 2, 4):
                other = code ^ bit
                if code < other:
                    edges.append((8 * c + pos[code], 8 * c + pos[other]))
    return FeedbackGraph.from_edges(8 * n, edges)


def generate(spec: GraphSpec) -> FeedbackGraph:
    """Build the graph named by ``spec``; the result is always validated."""
    kind, p = spec.kind, spec.params
    if kind == "bandit":
        g = FeedbackGraph.from_edges(_require_int(p, "k", 1), [])
    elif kind == "complete":
        k = _require_int(p, "k", 1)
        g = FeedbackGraph.from_edges(k, [(u, v) for u in range(k) for v in range(u + 1, k)])
    elif kind == "star":
        k = _require_int(p, "k", 1)
        g = FeedbackGraph.from_edges(k, [(0, v) for v in range(1, k)])
    elif kind == "star_like_ex2":
        # 0 = r1 sees everything, 1 = r2 sees everything but leaf 2.
        k = _require_int(p, "k", 4)
        edges = [(0, v) for v in range(1, k)] + [(1, v) for v in range(3, k)]
        g = FeedbackGraph.from_edges(k, edges)
    elif kind == "reinforced_wheel":
        g = _reinforced_wheel(_require_int(p, "k", 2))
    elif kind == "cube_copies":
        g = _cube_copies(_require_int(p, "n", 1))
    elif kind == "erdos_renyi":
        k = _require_int(p, "k", 1)
        prob = p.get("p")
        if not isinstance(prob, (int, float)) or not 0.0 <= prob <= 1.0:
            raise ParameterError("p", f"edge probability must lie in [0, 1], got {prob!r}")
        rng = np.random.default_rng(p.get("seed", 0))
        draws = rng.random((k, k))
        g = FeedbackGraph.from_edges(
            k, [(u, v) for u in range(k) for v in range(u + 1, k) if draws[u, v] < prob]
        )
    elif kind == "path":
        k = _require_int(p, "k", 1)
        g = FeedbackGraph.from_edges(k, [(v, v + 1) for v in range(k - 1)])
    elif kind == "disjoint_cliques":
        sizes = p.get("sizes")
        if isinstance(sizes, int):
            sizes = [sizes]
        if not sizes or any(not isinstance(s, int) or s < 1 for s in sizes):
            raise ParameterError("sizes", f"need a nonempty list of positive clique sizes, got {sizes!r}")
        edges, start = [], 0
        for s in sizes:
            edges += [(start + a, start + b) for a in range(s) for b in range(a + 1, s)]
            start += s
        g = FeedbackGraph.from_edges(start, edges)
    else:
        raise ParameterError("kind", f"unknown graph kind {kind!r}; expected one of {', '.join(GRAPH_KINDS)}")
    return _checked(g)


def greedy_dominating_set(g: FeedbackGraph) -> list[int]:
    """Greedy dominating set: take the vertex covering most uncovered vertices.

    Ties go to the smallest index, which keeps simulation traces reproducible.
    """
    masks = g.masks
    uncovered = (1 << g.k) - 1
    chosen = []
    while uncovered:
        best, best_gain = -1, 0
        for v in range(g.k):
            gain = (masks[v] & uncovered).bit_count()
            if gain > best_gain:
                best, best_gain = v, gain
        chosen.append(best)
        uncovered &= ~masks[best]
    return sorted(chosen)


def is_dominating(g: FeedbackGraph, vertices: Iterable[int]) -> bool:
    covered = 0
    for v in vertices:
        covered |= g.masks[v]
    return covered == (1 << g.k) - 1


def is_independent(g: FeedbackGraph, vertices: Iterable[int]) -> bool:
    vs = list(vertices)
    return all(b not in g.adj[a] for i, a in enumerate(vs) for b in vs[i + 1 :])


def max_weight_independent_set(g: FeedbackGraph, weights: Sequence[float]) -> MWISResult:
    """Maximum-weight independent set (self-loops ignored).

    Exact branch-and-bound up to :data:`EXACT_MIS_LIMIT` vertices; above that a
    weight/degree greedy whose result is flagged ``exact=False`` (a lower bound).
    """
    w = np.asarray(weights, dtype=float)
    if w.shape != (g.k,):
        raise ParameterError("weights", f"expected {g.k} weights, got shape {w.shape}")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ParameterError("weights", "weights must be finite and nonnegative")
    open_nbrs = [m & ~(1 << v) for v, m in enumerate(g.masks)]
    if g.k > EXACT_MIS_LIMIT:
        return _greedy_mwis(g, w, open_nbrs)

    weight = [float(x) for x in w]
    best_weight, best_set = 0.0, 0
    candidates = 0
    for v in range(g.k):
        if weight[v] > 0:
            candidates |= 1 << v

    def members(mask):
        while mask:
            low = mask & -mask
            yield low.bit_length() - 1
            mask ^= low

    def search(cand: int, chosen: int, total: float) -> None:
        nonlocal best_weight, best_set
        # Vertices with no neighbor among the candidates are always taken.
        free = 0
        for v in members(cand):
            if not open_nbrs[v] & cand:
                free |= 1 << v
        if free:
            cand &= ~free
            chosen |= free
            total += sum(weight[v] for v in members(free))
        if total > best_weight:
            best_weight, best_set = total, chosen
        if not cand:
            return
        if total + sum(weight[v] for v in members(cand)) <= best_weight:
            return
        pivot = max(members(cand), key=lambda v: ((open_nbrs[v] & cand).bit_count(), -v))
        search(cand & ~(1 << pivot) & ~open_nbrs[pivot], chosen | (1 << pivot), total + weight[pivot])
        search(cand & ~(1 << pivot), chosen, total)

    search(candidates, 0, 0.0)
    vertices = tuple(members(best_set))
    return MWISResult(vertices, float(sum(w[list(vertices)])), True)


def _greedy_mwis(g, w, open_nbrs) -> MWISResult:
    alive = set(range(g.k))
    chosen = []
    while alive:
        v = max(alive, key=lambda u: (w[u] / (1 + sum(1 for x in g.adj[u] if x in alive and x != u)), -u))
        if w[v] <= 0:
            break
        chosen.append(v)
        alive -= set(g.adj[v])
    chosen.sort()
    return MWISResult(tuple(chosen), float(w[chosen].sum()), False)


def collapse(g: FeedbackGraph) -> CollapseResult:
    """Merge vertices with identical closed neighborhoods into one class each."""
    index: dict[tuple[int, ...], int] = {}
    class_of = []
    members: list[list[int]] = []
    for v in range(g.k):
        c = index.setdefault(g.adj[v], len(index))
        if c == len(members):
            members.append([])
        members[c].append(v)
        class_of.append(c)
    edges = {(class_of[u], class_of[v]) for u, v in g.edges() if class_of[u] != class_of[v]}
    quotient = FeedbackGraph.from_edges(len(members), sorted(edges))
    return CollapseResult(quotient, tuple(class_of), tuple(tuple(m) for m in members))


def has_long_path(g: FeedbackGraph, edges: int = 3) -> bool:
    """True if ``g`` contains a simple path with ``edges`` edges (self-loops skipped)."""

    def extend(v, visited, depth):
        if depth == edges:
            return True
        return any(u not in visited and extend(u, visited | {u}, depth + 1) for u in g.adj[v] if u != v)

    return any(extend(v, {v}, 0) for v in range(g.k))


def check_dstar_condition(g: FeedbackGraph) -> bool:
    """Whether the collapsed graph has no simple path longer than two edges."""
    return not has_long_path(collapse(g).quotient, 3)


def load_graph(path) -> FeedbackGraph:
    with open(path) as fh:
        data = json.load(fh)
    return graph_from_json(data)


def graph_from_json(data: dict) -> FeedbackGraph:
    try:
        g = FeedbackGraph(int(data["k"]), tuple(tuple(int(j) for j in row) for row in data["adj"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphError(f"malformed graph JSON: {exc}") from exc
    return _checked(g)


def save_graph(g: FeedbackGraph, path) -> None:
    with open(path, "w") as fh:
        json.dump(g.to_json(), fh)
        fh.write("\n")
