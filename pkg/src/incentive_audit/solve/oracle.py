"""Brute-force grid reference: exhaustive equilibrium and minimum search.

This is the independent cross-check for the analytic solvers: costs are
tabulated on a dense cartesian grid and a profile counts as a grid
equilibrium when no unilateral move along the grid strictly improves any
agent.  Intended for small games (n <= 4); the per-axis resolution comes
from SolverConfig.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from ..expr import (
    Abs,
    Const,
    Expression,
    Neg,
    Number,
    Power,
    Product,
    SafeDiv,
    Sum,
    Var,
)
from ..expr.polynomial import as_polynomial
from ..game import ActionProfile
from .config import SolverConfig
from . import kernels

ORACLE_MAX_AGENTS = 4


class OracleDimensionError(ValueError):
    """Raised when the exhaustive oracle is asked for too many agents."""


def grid_axes(bounds: Sequence[tuple[Number, Number]],
              points: int) -> list[np.ndarray]:
    return [np.linspace(float(lo), float(hi), points) for lo, hi in bounds]


def eval_array(e: Expression, arrays: Sequence[np.ndarray]) -> np.ndarray | float:
    """Vectorized tree walk; arrays must broadcast against each other."""
    if isinstance(e, Const):
        return float(e.value)
    if isinstance(e, Var):
        return arrays[e.index]
    if isinstance(e, Sum):
        total: np.ndarray | float = 0.0
        for t in e.terms:
            total = total + eval_array(t, arrays)
        return total
    if isinstance(e, Product):
        prod: np.ndarray | float = 1.0
        for f in e.factors:
            prod = prod * eval_array(f, arrays)
        return prod
    if isinstance(e, Power):
        return eval_array(e.base, arrays) ** e.exponent
    if isinstance(e, Neg):
        return -eval_array(e.operand, arrays)
    if isinstance(e, Abs):
        return np.abs(eval_array(e.operand, arrays))
    if isinstance(e, SafeDiv):
        num = eval_array(e.numerator, arrays)
        den = eval_array(e.denominator, arrays)
        guard = float(e.guard)
        den = np.asarray(den, dtype=np.float64)
        tiny = np.abs(den) <= guard
        safe = np.where(tiny, 1.0, den)
        return np.where(tiny, 0.0, np.asarray(num, dtype=np.float64) / safe)
    raise TypeError(f"unknown expression node {type(e).__name__}")


def eval_on_grid(e: Expression, axes: Sequence[np.ndarray],
                 backend: Optional[str] = None) -> np.ndarray:
    """Tabulate ``e`` on the cartesian product of the axes."""
    n = len(axes)
    shape = tuple(len(ax) for ax in axes)
    p = as_polynomial(e)
    if p is not None:
        coeffs, exps = p.to_arrays(n)
        return kernels.poly_grid_eval(coeffs, exps, axes, backend=backend)
    grids = []
    for k, ax in enumerate(axes):
        reshape = [1] * n
        reshape[k] = shape[k]
        grids.append(np.asarray(ax, dtype=np.float64).reshape(reshape))
    out = eval_array(e, grids)
    return np.broadcast_to(np.asarray(out, dtype=np.float64), shape).copy()


def grid_nash_oracle(costs: Sequence[Expression],
                     bounds: Sequence[tuple[Number, Number]],
                     cfg: SolverConfig,
                     backend: Optional[str] = None) -> list[ActionProfile]:
    """All grid profiles where no unilateral grid move strictly improves.

    Returned in lexicographic order of the profile values.
    """
    n = len(costs)
    if n > ORACLE_MAX_AGENTS:
        raise OracleDimensionError(
            f"grid oracle supports at most {ORACLE_MAX_AGENTS} agents, got {n}")
    axes = grid_axes(bounds, cfg.grid_points_per_axis)
    tables = np.stack([eval_on_grid(c, axes, backend=backend) for c in costs])
    mask = kernels.pure_nash_mask(tables, backend=backend)
    profiles = []
    for idx in np.argwhere(mask):
        profiles.append(ActionProfile([axes[k][i] for k, i in enumerate(idx)]))
    return profiles


def grid_minimum(e: Expression, bounds: Sequence[tuple[Number, Number]],
                 cfg: SolverConfig,
                 backend: Optional[str] = None) -> tuple[ActionProfile, float]:
    """Best grid point of ``e``; first (lexicographically smallest) on ties."""
    n = len(bounds)
    if n > ORACLE_MAX_AGENTS:
        raise OracleDimensionError(
            f"grid oracle supports at most {ORACLE_MAX_AGENTS} agents, got {n}")
    axes = grid_axes(bounds, cfg.grid_points_per_axis)
    table = eval_on_grid(e, axes, backend=backend)
    flat = int(np.argmin(table))
    idx = np.unravel_index(flat, table.shape)
    profile = ActionProfile([axes[k][i] for k, i in enumerate(idx)])
    return profile, float(table[idx])


def grid_step(bounds: Sequence[tuple[Number, Number]], points: int) -> float:
    """The largest axis spacing, i.e. the oracle's resolution."""
    return max((float(hi) - float(lo)) / (points - 1) for lo, hi in bounds)
