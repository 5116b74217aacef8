"""Replicated experiments, paper scenarios and CSV/JSON output."""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .algo import PROFILES, AlgoConfig, RegretTrace, run_algorithm, run_ucbn
from .complexity import ComplexityReport, CubeTable, complexity_report, cube_scenario_table
from .env import Instance, load_instance, paper_instance
from .errors import ConfigError, FGBError
from .graph import FeedbackGraph, GraphSpec, generate, load_graph

ALGORITHMS = ("phased_lp", "ucbn")
CSV_COLUMNS = ("t", "regret_mean", "regret_std", "algo", "scenario", "replicates", "master_seed")
SCENARIOS = {
    "example1_star": {"k": 64, "delta": 0.05, "T": 20000, "replicates": 4},
    "example2_starlike": {"k": 16, "delta_min": 0.05, "delta_max": 0.4, "T": 20000, "replicates": 4},
    "reinforced_wheel": {"k": 16, "delta": 0.05, "nu": 0.9, "T": 20000, "replicates": 4},
    "cube": {"n": 10, "delta": 0.1, "eps": 0.1, "env": "A", "T": 20000, "replicates": 4},
}


def default_grid(horizon: int, ratio: float = 1.25) -> tuple[int, ...]:
    """Geometric recording points ``round(ratio**i)``, deduplicated, always ending at ``horizon``."""
    points = set()
    i = 0
    while True:
        t = int(round(ratio**i))
        if t > horizon:
            break
        points.add(t)
        i += 1
    points.add(horizon)
    return tuple(sorted(points))


def replicate_seed(master_seed: int, replicate: int, experiment: int = 0) -> int:
    """Order-insensitive per-replicate seed derived from ``(master_seed, experiment, replicate)``."""
    ss = np.random.SeedSequence([int(master_seed), int(experiment), int(replicate)])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


@dataclass(frozen=True)
class ExperimentConfig:
    graph: GraphSpec | FeedbackGraph | str
    instance: Instance | str
    algo: str = "phased_lp"
    horizon: int = 10000
    replicates: int = 1
    master_seed: int = 0
    experiment: int = 0
    grid: tuple | None = None
    scenario: str = "custom"
    profile: str = "demo"
    alpha: float | None = None
    alpha_prime: float | None = None
    clip_gaps: bool = False
    workers: int | None = None
    out_csv: str | None = None
    out_json: str | None = None

    def validated(self) -> "ExperimentConfig":
        if self.algo not in ALGORITHMS:
            raise ConfigError("algo", f"unknown algorithm {self.algo!r}; expected one of {', '.join(ALGORITHMS)}")
        if not isinstance(self.horizon, int) or self.horizon < 1:
            raise ConfigError("T", f"must be an integer >= 1, got {self.horizon!r}")
        if not isinstance(self.replicates, int) or self.replicates < 1:
            raise ConfigError("replicates", f"must be an integer >= 1, got {self.replicates!r}")
        if self.profile not in PROFILES:
            raise ConfigError("profile", f"unknown profile {self.profile!r}")
        grid = default_grid(self.horizon) if self.grid is None else tuple(int(t) for t in self.grid)
        if not grid or any(t < 1 or t > self.horizon for t in grid):
            raise ConfigError("grid", f"grid points must lie in [1, {self.horizon}]")
        return replace(self, grid=tuple(sorted(set(grid))))

    def algo_config(self) -> AlgoConfig:
        try:
            return AlgoConfig.from_profile(
                self.profile, self.horizon, alpha=self.alpha, alpha_prime=self.alpha_prime, clip_gaps=self.clip_gaps
            )
        except FGBError as exc:
            raise ConfigError(getattr(exc, "field", "algo"), str(exc)) from exc

    def to_json(self) -> dict:
        g = self.graph
        if isinstance(g, GraphSpec):
            g = {"kind": g.kind, "params": g.params}
        elif isinstance(g, FeedbackGraph):
            g = g.to_json()
        inst = self.instance.to_json() if isinstance(self.instance, Instance) else self.instance
        return {
            "graph": g,
            "instance": inst,
            "algo": self.algo,
            "T": self.horizon,
            "replicates": self.replicates,
            "master_seed": self.master_seed,
            "experiment": self.experiment,
            "grid": list(self.grid) if self.grid is not None else None,
            "scenario": self.scenario,
            "profile": self.profile,
            "alpha": self.alpha,
            "alpha_prime": self.alpha_prime,
            "clip_gaps": self.clip_gaps,
        }


def resolve_graph(graph) -> FeedbackGraph:
    if isinstance(graph, FeedbackGraph):
        return graph
    if isinstance(graph, GraphSpec):
        return generate(graph)
    if isinstance(graph, dict):
        if "adj" in graph:
            from .graph import graph_from_json

            return graph_from_json(graph)
        return generate(GraphSpec(graph.get("kind", ""), dict(graph.get("params", {}))))
    if isinstance(graph, str):
        if Path(graph).is_file():
            return load_graph(graph)
        return generate(GraphSpec.parse(graph))
    raise ConfigError("graph", f"cannot interpret {graph!r}")


def resolve_instance(instance) -> Instance:
    if isinstance(instance, Instance):
        return instance
    if isinstance(instance, dict):
        return Instance.from_json(instance)
    if isinstance(instance, str):
        if Path(instance).is_file():
            return load_instance(instance)
        try:
            return Instance([float(v) for v in instance.split(",")])
        except ValueError as exc:
            raise ConfigError("instance", f"expected a file or comma-separated means, got {instance!r}") from exc
    raise ConfigError("instance", f"cannot interpret {instance!r}")


def _run_one(job):
    g, inst, algo, acfg, seed = job
    if algo == "phased_lp":
        return run_algorithm(g, inst, acfg, seed)
    return run_ucbn(g, inst, acfg.horizon, seed)


@dataclass
class AggregateResult:
    algo: str
    scenario: str
    master_seed: int
    grid: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    per_replicate: np.ndarray
    seeds: list
    finals: np.ndarray
    metadata: dict = field(default_factory=dict)
    phases: list = field(default_factory=list)

    @property
    def replicates(self) -> int:
        return int(self.per_replicate.shape[0])

    def to_json(self) -> dict:
        return {
            "algo": self.algo,
            "scenario": self.scenario,
            "master_seed": self.master_seed,
            "replicates": self.replicates,
            "grid": self.grid.tolist(),
            "regret_mean": self.mean.tolist(),
            "regret_std": self.std.tolist(),
            "replicate_runs": [
                {
                    "index": r,
                    "seed": self.seeds[r],
                    "final_regret": float(self.finals[r]),
                    "regret_at_grid": self.per_replicate[r].tolist(),
                    "phases": self.phases[r] if r < len(self.phases) else [],
                }
                for r in range(self.replicates)
            ],
            "metadata": self.metadata,
        }

    @classmethod
    def from_json(cls, data: dict) -> "AggregateResult":
        runs = data["replicate_runs"]
        return cls(
            algo=data["algo"],
            scenario=data["scenario"],
            master_seed=data["master_seed"],
            grid=np.asarray(data["grid"], dtype=np.int64),
            mean=np.asarray(data["regret_mean"], dtype=float),
            std=np.asarray(data["regret_std"], dtype=float),
            per_replicate=np.asarray([r["regret_at_grid"] for r in runs], dtype=float),
            seeds=[r["seed"] for r in runs],
            finals=np.asarray([r["final_regret"] for r in runs], dtype=float),
            metadata=data.get("metadata", {}),
            phases=[r.get("phases", []) for r in runs],
        )


def aggregate(traces: list[RegretTrace], grid, algo: str, scenario: str, master_seed: int, metadata=None) -> AggregateResult:
    grid = np.asarray(grid, dtype=np.int64)
    values = np.stack([t.regret[grid - 1] for t in traces])
    mean = values.mean(axis=0)
    std = values.std(axis=0, ddof=1) if len(traces) > 1 else np.zeros(grid.size)
    return AggregateResult(
        algo=algo,
        scenario=scenario,
        master_seed=master_seed,
        grid=grid,
        mean=mean,
        std=std,
        per_replicate=values,
        seeds=[t.seed for t in traces],
        finals=np.array([t.final for t in traces]),
        metadata=dict(metadata or {}),
        phases=[[p.to_json() for p in t.phases] for t in traces],
    )


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("FGB_WORKERS", "1")))
    except ValueError:
        return 1


def run_experiment(cfg: ExperimentConfig, order=None) -> AggregateResult:
    """Run ``cfg.replicates`` independent replicates and aggregate them on the grid.

    ``order`` permutes execution order only (for testing); results are always
    joined by replicate index.
    """
    cfg = cfg.validated()
    g = resolve_graph(cfg.graph)
    inst = resolve_instance(cfg.instance)
    if g.k != inst.k:
        raise ConfigError("instance", f"{inst.k} means for a graph on {g.k} vertices")
    acfg = cfg.algo_config()
    seeds = [replicate_seed(cfg.master_seed, r, cfg.experiment) for r in range(cfg.replicates)]
    idx = list(order) if order is not None else list(range(cfg.replicates))
    if sorted(idx) != list(range(cfg.replicates)):
        raise ConfigError("order", "must be a permutation of replicate indices")
    jobs = [(g, inst, cfg.algo, acfg, seeds[r]) for r in idx]
    workers = cfg.workers or default_workers()
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            done = list(pool.map(_run_one, jobs))
    else:
        done = [_run_one(job) for job in jobs]
    traces = [None] * cfg.replicates
    for r, trace in zip(idx, done):
        traces[r] = trace
    meta = {"config": cfg.to_json(), "version": __version__, "kernels": kernels.BACKEND}
    return aggregate(traces, cfg.grid, cfg.algo, cfg.scenario, cfg.master_seed, meta)


def _fmt(x) -> str:
    return "%.17g" % x


def _json_text(obj, indent=0) -> str:
    """JSON with every float printed to 17 significant digits."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_json_text(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(_json_text(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _json_text(v, indent + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        if not math.isfinite(obj):
            raise ValueError(f"cannot serialize non-finite number {obj!r}")
        return _fmt(float(obj))
    return json.dumps(obj)


def csv_text(results) -> str:
    if isinstance(results, AggregateResult):
        results = [results]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for res in results:
        for t, m, s in zip(res.grid, res.mean, res.std):
            writer.writerow([int(t), _fmt(m), _fmt(s), res.algo, res.scenario, res.replicates, res.master_seed])
    return buf.getvalue()


def json_text(results) -> str:
    if isinstance(results, AggregateResult):
        payload = results.to_json()
    else:
        payload = {"results": [r.to_json() for r in results]}
    return _json_text(payload) + "\n"


def emit(results, fmt: str, path) -> Path:
    """Write one result (or a list of results) as CSV or JSON."""
    if fmt == "csv":
        text = csv_text(results)
    elif fmt == "json":
        text = json_text(results)
    else:
        raise ConfigError("format", f"unknown format {fmt!r}; expected csv or json")
    path = Path(path)
    path.write_text(text)
    return path


def load_results(path) -> list[AggregateResult]:
    data = json.loads(Path(path).read_text())
    if "results" in data:
        return [AggregateResult.from_json(d) for d in data["results"]]
    return [AggregateResult.from_json(data)]


def chart_spec(csv_path, title: str) -> dict:
    """Declarative chart description for external plotting tools."""
    return {
        "title": title,
        "data": str(csv_path),
        "mark": "line",
        "x": {"field": "t", "scale": "log", "label": "round"},
        "y": {"field": "regret_mean", "label": "cumulative pseudo-regret"},
        "band": {"center": "regret_mean", "halfwidth": "regret_std"},
        "series": "algo",
    }


@dataclass
class ScenarioResult:
    name: str
    graph: FeedbackGraph
    instance: Instance
    report: ComplexityReport
    results: dict
    table: CubeTable | None = None

    def to_json(self) -> dict:
        return {
            "scenario": self.name,
            "k": self.graph.k,
            "instance": self.instance.to_json(),
            "report": self.report.to_json(),
            "table": self.table.to_json() if self.table else None,
            "results": {a: r.to_json() for a, r in self.results.items()},
        }


def _scenario_instance(name: str, p: dict):
    if name == "example1_star":
        return paper_instance("example1_star", p)
    if name == "example2_starlike":
        return paper_instance("example2_starlike", p)
    if name == "reinforced_wheel":
        variant = p.pop("case", "base")
        return paper_instance(f"reinforced_wheel_{variant}", p)
    if name == "cube":
        env = str(p.pop("env", "A"))
        if env not in ("A", "B"):
            raise ConfigError("env", f"cube environment must be A or B, got {env!r}")
        return paper_instance(f"cube_env_{env}", p)
    raise ConfigError("scenario", f"unknown scenario {name!r}; expected one of {', '.join(SCENARIOS)}")


def scenario(name: str, params: dict | None = None, master_seed: int = 0, workers: int | None = None,
             algos=ALGORITHMS, profile: str = "demo") -> ScenarioResult:
    """Build a paper construction, report its complexities and run both learners on it."""
    if name not in SCENARIOS:
        raise ConfigError("scenario", f"unknown scenario {name!r}; expected one of {', '.join(SCENARIOS)}")
    p = dict(SCENARIOS[name])
    p.update(params or {})
    horizon = int(p.pop("T"))
    reps = int(p.pop("replicates"))
    eps = p.get("eps")
    spec, inst = _scenario_instance(name, dict(p))
    g = generate(spec)
    report = complexity_report(g, inst)
    results = {}
    for e, algo in enumerate(algos):
        cfg = ExperimentConfig(
            graph=g,
            instance=inst,
            algo=algo,
            horizon=horizon,
            replicates=reps,
            master_seed=master_seed,
            experiment=e,
            scenario=name,
            profile=profile,
            workers=workers,
        )
        results[algo] = run_experiment(cfg)
    table = None
    if name == "cube":
        table = cube_scenario_table(int(p["n"]), float(p["delta"]), float(eps))
    return ScenarioResult(name, g, inst, report, results, table)
