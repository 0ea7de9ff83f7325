"""Randomized rounding of 0-1 programs into interval-set relaxations."""

from .domain import (
    UNIT,
    Box,
    DomainError,
    IntervalSet,
    LinearProgram,
    format_interval_set,
    format_lp,
    locate,
    measure,
    parse_interval_set,
    parse_lp,
    shrink,
)
from .lp import LpStatus, check_feasible, minimize
from .potential import beta, build_potentials, budget_for, restart_budget
from .walk import (
    RelaxationInfeasible,
    StrategyDistribution,
    WalkContext,
    WalkOutcome,
    optimize,
    solve,
    solve_strategy,
)
from .csp import (
    CspInstance,
    ThresholdScheme,
    basic_lp,
    ksat_scheme,
    ksat_to_lp,
    parse_dimacs,
    solve_csp,
    verify_assignment,
)

__version__ = "0.1.0"

__all__ = [
    "UNIT",
    "Box",
    "DomainError",
    "IntervalSet",
    "LinearProgram",
    "format_interval_set",
    "format_lp",
    "locate",
    "measure",
    "parse_interval_set",
    "parse_lp",
    "shrink",
    "LpStatus",
    "check_feasible",
    "minimize",
    "beta",
    "build_potentials",
    "budget_for",
    "restart_budget",
    "RelaxationInfeasible",
    "StrategyDistribution",
    "WalkContext",
    "WalkOutcome",
    "optimize",
    "solve",
    "solve_strategy",
    "CspInstance",
    "ThresholdScheme",
    "basic_lp",
    "ksat_scheme",
    "ksat_to_lp",
    "parse_dimacs",
    "solve_csp",
    "verify_assignment",
]
