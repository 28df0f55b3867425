"""Adaptive explicit Runge-Kutta stepping for small time-dependent systems.

Thin layer over :func:`scipy.integrate.solve_ivp` (Dormand-Prince 8(5,3))
that adds breakpoints: the interval is split wherever the caller says the
coefficients switch on or off, so no step ever straddles one.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

__all__ = ["OdeProblem", "IntegrationError", "solve", "DEFAULT_RTOL", "DEFAULT_ATOL"]

DEFAULT_RTOL = 1e-9
DEFAULT_ATOL = 1e-12


class IntegrationError(RuntimeError):
    """Raised when the step size underflows or the solver otherwise fails."""

    def __init__(self, message: str, t: float):
        super().__init__(f"{message} (at t = {t:.9g})")
        self.t = t


@dataclass
class OdeProblem:
    """A first-order system ``dy/dt = rhs(t, y)`` sampled on ``output_grid``.

    ``t_span`` defaults to the first and last grid points.  The state may
    be real or complex; its dtype follows the initial state.
    """

    rhs: Callable[[float, np.ndarray], np.ndarray]
    output_grid: np.ndarray
    t_span: tuple[float, float] | None = None
    rel_tol: float = DEFAULT_RTOL
    abs_tol: float = DEFAULT_ATOL
    breakpoints: Sequence[float] = field(default_factory=tuple)
    max_step: float = np.inf
    method: str = "DOP853"

    def __post_init__(self):
        grid = np.asarray(self.output_grid, dtype=float)
        if grid.ndim != 1 or grid.size == 0:
            raise ValueError("output_grid must be a non-empty 1-D array")
        if grid.size > 1 and not np.all(np.diff(grid) > 0):
            raise ValueError("output_grid must be strictly increasing")
        self.output_grid = grid
        if self.t_span is None:
            self.t_span = (float(grid[0]), float(grid[-1]))
        t0, t1 = self.t_span
        if not t1 >= t0:
            raise ValueError("t_span must be increasing")
        if grid[0] < t0 or grid[-1] > t1:
            raise ValueError("output_grid must lie inside t_span")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")


def _segments(t0: float, t1: float, breakpoints) -> list[float]:
    inner = [b for b in np.unique(np.asarray(breakpoints, dtype=float)) if t0 < b < t1]
    return [t0, *inner, t1]


def solve(problem: OdeProblem, initial_state) -> np.ndarray:
    """Integrate ``problem`` and return states on its output grid.

    Returns an array of shape ``(len(output_grid), dimension)``.
    """
    y = np.array(initial_state)
    if y.ndim != 1:
        raise ValueError("initial_state must be a 1-D vector")
    if not np.iscomplexobj(y):
        y = y.astype(float)
    grid = problem.output_grid
    out = np.empty((grid.size, y.size), dtype=y.dtype)
    t0, t1 = problem.t_span
    edges = _segments(t0, t1, problem.breakpoints)

    filled = np.zeros(grid.size, dtype=bool)
    at_start = grid == t0
    out[at_start] = y
    filled |= at_start

    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        mask = (grid > a) & (grid <= b) & ~filled
        t_eval = grid[mask]
        add_end = t_eval.size == 0 or t_eval[-1] != b
        if add_end:
            t_eval = np.append(t_eval, b)
        sol = solve_ivp(
            problem.rhs,
            (a, b),
            y,
            method=problem.method,
            t_eval=t_eval,
            rtol=problem.rel_tol,
            atol=problem.abs_tol,
            max_step=problem.max_step,
        )
        if sol.status != 0:
            # t_eval hides the internal step times; rerun to locate the failure
            probe = solve_ivp(problem.rhs, (a, b), y, method=problem.method,
                              rtol=problem.rel_tol, atol=problem.abs_tol,
                              max_step=problem.max_step)
            t_fail = float(probe.t[-1]) if probe.t.size else a
            raise IntegrationError(f"integration failed: {sol.message}", t_fail)
        states = sol.y.T
        if mask.any():
            out[mask] = states[:-1] if add_end else states
            filled |= mask
        y = states[-1]
    return out
