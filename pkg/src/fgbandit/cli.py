"""Command-line interface: ``fgb analyze | simulate | scenario | lp``.

Exit codes: 0 success, 2 configuration/input error, 3 runtime error.
Settings from ``simulate --config FILE`` are overridden by explicit flags.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import ConfigError, FGBError, GraphError, ModelError, ParameterError, PreconditionError

EXIT_CONFIG = 2
EXIT_RUNTIME = 3

log = logging.getLogger("fgbandit")


def _parse_params(items) -> dict:
    from .graph import _coerce

    params = {}
    for item in items or []:
        for part in filter(None, item.split(",")):
            key, sep, value = part.partition("=")
            if not sep:
                raise ConfigError("params", f"expected key=value, got {part!r}")
            params[key.strip()] = _coerce(value.strip())
    return params


def _graph_and_instance(graph_arg, instance_arg):
    from .env import paper_instance
    from .graph import generate
    from .harness import resolve_graph, resolve_instance

    if instance_arg is None:
        raise ConfigError("instance", "missing; pass a JSON file, comma-separated means or paper:<name>[:k=v,...]")
    if isinstance(instance_arg, str) and instance_arg.startswith("paper:"):
        _, name, *rest = instance_arg.split(":", 2)
        spec, inst = paper_instance(name, _parse_params(rest))
        g = resolve_graph(graph_arg) if graph_arg is not None else generate(spec)
        return g, inst
    if graph_arg is None:
        raise ConfigError("graph", "missing; pass a JSON file or kind:key=value,...")
    return resolve_graph(graph_arg), resolve_instance(instance_arg)


def _write_or_print(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_analyze(args) -> int:
    from .complexity import complexity_report
    from .harness import _json_text

    g, inst = _graph_and_instance(args.graph, args.instance)
    if g.k != inst.k:
        raise ConfigError("instance", f"{inst.k} means for a graph on {g.k} vertices")
    report = complexity_report(g, inst, clip_gaps=args.clip_gaps)
    _write_or_print(_json_text(report.to_json()) + "\n", args.out)
    return 0


def _outputs(out: str, fmt: str) -> list[tuple[str, Path]]:
    base = Path(out)
    if fmt == "both":
        stem = base.with_suffix("") if base.suffix in (".csv", ".json") else base
        return [("csv", stem.with_suffix(".csv")), ("json", stem.with_suffix(".json"))]
    return [(fmt, base if base.suffix == f".{fmt}" else base.with_suffix(f".{fmt}"))]


def cmd_simulate(args) -> int:
    from .harness import ExperimentConfig, chart_spec, emit, run_experiment

    settings: dict = {}
    if args.config:
        try:
            settings = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("config", f"cannot read {args.config}: {exc}") from exc
    flags = {
        "graph": args.graph,
        "instance": args.instance,
        "algo": args.algo,
        "T": args.T,
        "replicates": args.replicates,
        "master_seed": args.seed,
        "profile": args.profile,
        "alpha": args.alpha,
        "alpha_prime": args.alpha_prime,
        "workers": args.workers,
        "scenario": args.scenario_label,
        "grid": args.grid,
    }
    settings.update({k: v for k, v in flags.items() if v is not None})
    if args.clip_gaps:
        settings["clip_gaps"] = True
    known = {"graph", "instance", "algo", "T", "replicates", "master_seed", "experiment", "grid", "scenario",
             "profile", "alpha", "alpha_prime", "clip_gaps", "workers", "out", "format"}
    unknown = set(settings) - known
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown configuration key")
    g, inst = _graph_and_instance(settings.get("graph"), settings.get("instance"))
    cfg = ExperimentConfig(
        graph=g,
        instance=inst,
        algo=settings.get("algo", "phased_lp"),
        horizon=settings.get("T", 10000),
        replicates=settings.get("replicates", 1),
        master_seed=settings.get("master_seed", 0),
        experiment=settings.get("experiment", 0),
        grid=settings.get("grid"),
        scenario=settings.get("scenario", "custom"),
        profile=settings.get("profile", "demo"),
        alpha=settings.get("alpha"),
        alpha_prime=settings.get("alpha_prime"),
        clip_gaps=bool(settings.get("clip_gaps", False)),
        workers=settings.get("workers"),
    )
    result = run_experiment(cfg)
    out = args.out or settings.get("out", "results")
    fmt = args.format or settings.get("format", "both")
    written = []
    for kind, path in _outputs(out, fmt):
        emit(result, kind, path)
        written.append(path)
    if args.chart:
        csv_path = next((p for k, p in _outputs(out, fmt) if k == "csv"), None)
        Path(args.chart).write_text(json.dumps(chart_spec(csv_path, cfg.scenario), indent=2) + "\n")
    for path in written:
        print(path)
    return 0


def cmd_scenario(args) -> int:
    from .harness import _json_text, emit, scenario

    params = _parse_params(args.params)
    res = scenario(args.name, params, master_seed=args.seed, workers=args.workers, profile=args.profile)
    summary = {
        "scenario": res.name,
        "k": res.graph.k,
        "c_star": res.report.c_star,
        "d_star": res.report.d_star,
        "argmax_s": res.report.argmax_s,
        "is_bound": res.report.is_bound,
        "star_condition": res.report.star_condition,
        "final_regret_mean": {a: float(r.finals.mean()) for a, r in res.results.items()},
    }
    if res.table is not None:
        summary["table"] = res.table.to_json()
    if args.out:
        emit(list(res.results.values()), "csv", Path(args.out).with_suffix(".csv"))
        Path(args.out).with_suffix(".json").write_text(_json_text(res.to_json()) + "\n")
    sys.stdout.write(_json_text(summary) + "\n")
    return 0


def cmd_lp(args) -> int:
    from .harness import _json_text
    from .lp import CoveringLP, solve_covering_lp, weak_duality_gap

    try:
        data = json.loads(Path(args.file).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError("file", f"cannot read {args.file}: {exc}") from exc
    lp = CoveringLP.from_json(data)
    sol = solve_covering_lp(lp, args.tol)
    cert = sol.to_json()
    cert["certified_gap"] = weak_duality_gap(lp, sol, args.tol)
    sys.stdout.write(_json_text(cert) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    from .harness import default_workers

    parser = argparse.ArgumentParser(prog="fgb", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="complexity report for a graph and instance")
    p.add_argument("--graph", help="graph JSON file or kind:key=value,...")
    p.add_argument("--instance", help="instance JSON file, comma-separated means, or paper:<name>[:k=v,...]")
    p.add_argument("--clip-gaps", action="store_true", help="round gaps down to powers of two")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="replicated regret simulation")
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--graph")
    p.add_argument("--instance")
    p.add_argument("--algo", choices=("phased_lp", "ucbn"))
    p.add_argument("--T", type=int)
    p.add_argument("--replicates", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--grid", type=lambda s: [int(v) for v in s.split(",")], help="comma-separated rounds")
    p.add_argument("--out", help="output path prefix (default: results)")
    p.add_argument("--format", choices=("csv", "json", "both"))
    p.add_argument("--clip-gaps", action="store_true")
    p.add_argument("--alpha", type=float)
    p.add_argument("--alpha-prime", type=float)
    p.add_argument("--workers", type=int, default=None, help=f"parallel replicates (default FGB_WORKERS or {default_workers()})")
    p.add_argument("--profile", choices=("paper", "demo"))
    p.add_argument("--scenario-label", help="value of the scenario column")
    p.add_argument("--chart", help="also write a declarative chart description JSON here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("scenario", help="run a named paper scenario")
    p.add_argument("name")
    p.add_argument("params", nargs="*", help="overrides as key=value")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--profile", choices=("paper", "demo"), default="demo")
    p.add_argument("--out", help="prefix for the CSV and full JSON outputs")
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("lp", help="solve a covering LP from JSON and print its certificate")
    p.add_argument("file")
    p.add_argument("--tol", type=float, default=1e-7)
    p.set_defaults(func=cmd_lp)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ParameterError, GraphError, ModelError, PreconditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FGBError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
