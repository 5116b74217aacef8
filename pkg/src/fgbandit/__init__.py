"""Stochastic online learning with feedback graphs: complexities, learners, experiments."""

__version__ = "0.1.0"

from .env import Instance, make_confusing_instance, paper_instance, sample_round  # noqa: E402
from .graph import (  # noqa: E402
    FeedbackGraph,
    GraphSpec,
    check_dstar_condition,
    collapse,
    generate,
    greedy_dominating_set,
    max_weight_independent_set,
    validate,
)
from .lp import CoveringLP, LPSolution, solve_covering_lp, verify_feasible, weak_duality_gap  # noqa: E402
from .complexity import (  # noqa: E402
    c_star,
    complexity_report,
    confusing_value,
    cube_scenario_table,
    d_lp2,
    d_star,
    independent_set_bound,
)
from .algo import AlgoConfig, run_algorithm, run_ucbn  # noqa: E402

__all__ = [
    "AlgoConfig",
    "CoveringLP",
    "FeedbackGraph",
    "GraphSpec",
    "Instance",
    "LPSolution",
    "c_star",
    "check_dstar_condition",
    "collapse",
    "complexity_report",
    "confusing_value",
    "cube_scenario_table",
    "d_lp2",
    "d_star",
    "generate",
    "greedy_dominating_set",
    "independent_set_bound",
    "make_confusing_instance",
    "max_weight_independent_set",
    "paper_instance",
    "run_algorithm",
    "run_ucbn",
    "sample_round",
    "solve_covering_lp",
    "validate",
    "verify_feasible",
    "weak_duality_gap",
]
