"""Optimization, equilibrium computation, and the brute-force grid oracle."""

from .config import SolverConfig
from .kernels import active_backend, poly_grid_eval, pure_nash_mask
from .linesearch import LineMin, line_minimum, restrict
from .oracle import (
    ORACLE_MAX_AGENTS,
    OracleDimensionError,
    eval_on_grid,
    grid_axes,
    grid_minimum,
    grid_nash_oracle,
    grid_step,
)
from .solvers import (
    ConvexityReport,
    EquilibriumResult,
    OperatorSolution,
    SolverError,
    best_response,
    diagonal_strict_convexity_check,
    hessian_pd_check,
    minimize_operator,
    nash_equilibrium,
    verify_nash,
)

__all__ = [
    "ConvexityReport",
    "EquilibriumResult",
    "LineMin",
    "ORACLE_MAX_AGENTS",
    "OperatorSolution",
    "OracleDimensionError",
    "SolverConfig",
    "SolverError",
    "active_backend",
    "best_response",
    "diagonal_strict_convexity_check",
    "eval_on_grid",
    "grid_axes",
    "grid_minimum",
    "grid_nash_oracle",
    "grid_step",
    "hessian_pd_check",
    "line_minimum",
    "minimize_operator",
    "nash_equilibrium",
    "poly_grid_eval",
    "pure_nash_mask",
    "restrict",
    "verify_nash",
]
