"""Two-time intensity correlation of the emitted photon train.

The conditioned moments ``Z_i(t, tau) = <a^dag(t) sigma_ii(t+tau) a(t)>``
obey the same linear population equations as the atom, evaluated at
``s = t + tau``, starting from

    Z_1(t, 0) = alpha_2(t) p22(t) / k,    Z_2(t, 0) = alpha_1(t) p11(t) / k,

and ``G2(t, tau) = k [alpha_1(t+tau) Z_1 + alpha_2(t+tau) Z_2]``.

Rather than re-solving that system from every outer time, the
propagator over each grid step is computed once (one batched solve) and
the steps are chained: ``Z(t_i, tau_m) = M_{i+m-1} ... M_i Z(t_i, 0)``.
This is exact composition of the same flow, so the only approximation
is the solver tolerance on each step.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import Trajectory
from .integrator import DEFAULT_ATOL, DEFAULT_RTOL, IntegrationError, OdeProblem, solve
from .params import DerivedRates
from .pulses import PulseTrain

__all__ = ["CorrelationResult", "g2_grid", "default_tau_grid", "rate_matrix", "step_propagators"]


@dataclass
class CorrelationResult:
    taus: np.ndarray
    g2_of_tau: np.ndarray
    t_grid_used: np.ndarray
    two_time: np.ndarray | None = None

    @property
    def g2_normalized(self) -> np.ndarray:
        peak = float(np.max(self.g2_of_tau)) if self.g2_of_tau.size else 0.0
        if peak <= 0:
            return np.zeros_like(self.g2_of_tau)
        return self.g2_of_tau / peak


def default_tau_grid(train: PulseTrain, t_grid) -> np.ndarray:
    """Delays from 0 to ``N * period`` on the spacing of ``t_grid``."""
    h = float(t_grid[1] - t_grid[0])
    n = int(round(train.n_subpulses * train.period / h))
    return h * np.arange(n + 1)


def rate_matrix(params: DerivedRates, train: PulseTrain, s, include_loss: bool = True) -> np.ndarray:
    """Coefficient matrices ``A(s)`` of ``dZ/ds = A(s) Z``, shape ``s.shape + (2, 2)``."""
    s = np.asarray(s, dtype=float)
    f1 = train.f1(s)
    f2 = train.f2(s)
    up1 = (params.alpha1 + params.Gamma1) * f1
    up2 = (params.alpha2 + params.Gamma2) * f2
    out1 = params.Gamma1_out * f1 if include_loss else 0.0 * f1
    out2 = params.Gamma2_out * f2 if include_loss else 0.0 * f2
    A = np.empty(s.shape + (2, 2))
    A[..., 0, 0] = -(up1 + out1)
    A[..., 0, 1] = up2
    A[..., 1, 0] = up1
    A[..., 1, 1] = -(up2 + out2)
    return A


def step_propagators(params: DerivedRates, train: PulseTrain, starts, h: float, *,
                     include_loss=True, rel_tol=DEFAULT_RTOL, abs_tol=DEFAULT_ATOL) -> np.ndarray:
    """Propagators ``M_j`` of the Z system from ``starts[j]`` to ``starts[j] + h``.

    All intervals are integrated together in the local variable
    ``u in [0, h]``; returns shape ``(len(starts), 2, 2)``.
    """
    s_grid = np.asarray(starts, dtype=float)
    n = s_grid.size

    def rhs(u, y):
        M = y.reshape(n, 2, 2)
        return (rate_matrix(params, train, s_grid + u, include_loss) @ M).ravel()

    eye = np.broadcast_to(np.eye(2), (n, 2, 2)).ravel()
    problem = OdeProblem(rhs, np.array([0.0, h]), rel_tol=rel_tol, abs_tol=abs_tol)
    try:
        end = solve(problem, eye)[-1]
    except IntegrationError as exc:
        raise IntegrationError(f"step propagators failed for starts in [{s_grid[0]:.6g}, "
                               f"{s_grid[-1]:.6g}], local offset", exc.t) from exc
    return end.reshape(n, 2, 2)


def _uniform_step(t) -> float:
    h = float(t[1] - t[0])
    if not np.allclose(np.diff(t), h, rtol=1e-9, atol=1e-12):
        raise ValueError("trajectory grid must be uniform")
    return h


def g2_grid(params: DerivedRates, train: PulseTrain, traj: Trajectory, taus=None, *,
            include_loss: bool = True, keep_two_time: bool = False,
            rel_tol=DEFAULT_RTOL, abs_tol=DEFAULT_ATOL) -> CorrelationResult:
    """Train-integrated correlation ``G2(tau) = int G2(t, tau) dt``.

    Parameters
    ----------
    traj : Trajectory
        Reduced-model run on a uniform grid covering the whole train; its
        grid is the outer-time quadrature grid (trapezoid rule).
    taus : array_like, optional
        Non-negative delays, each an integer multiple of the trajectory
        grid step.  Defaults to :func:`default_tau_grid`.
    include_loss : bool
        Keep the out-of-system loss terms in the Z equations.
    keep_two_time : bool
        Also return the full ``G2(t, tau)`` table.
    """
    t = np.asarray(traj.times, dtype=float)
    if t.size < 2:
        raise ValueError("trajectory needs at least two samples")
    h = _uniform_step(t)
    if taus is None:
        taus = default_tau_grid(train, t)
    taus = np.asarray(taus, dtype=float)
    if np.any(taus < 0):
        raise ValueError("delays must be non-negative")
    steps = np.rint(taus / h).astype(int)
    if not np.allclose(steps * h, taus, rtol=0, atol=1e-9 * max(1.0, h)):
        raise ValueError("delays must be integer multiples of the trajectory grid step")

    m_max = int(steps.max()) if steps.size else 0
    n_t = t.size
    k = params.kappa

    s_grid = t[0] + h * np.arange(n_t + m_max)
    if m_max > 0:
        M = step_propagators(params, train, s_grid[:-1], h, include_loss=include_loss,
                             rel_tol=rel_tol, abs_tol=abs_tol)
    a1f = params.alpha1 * train.f1(s_grid)
    a2f = params.alpha2 * train.f2(s_grid)

    Z = np.empty((n_t, 2))
    Z[:, 0] = a2f[:n_t] * traj.p22 / k
    Z[:, 1] = a1f[:n_t] * traj.p11 / k
    weights = np.full(n_t, h)
    weights[0] = weights[-1] = 0.5 * h

    wanted = {}
    for j, m in enumerate(steps):
        wanted.setdefault(int(m), []).append(j)
    g2 = np.empty(taus.size)
    table = np.empty((n_t, taus.size)) if keep_two_time else None
    idx = np.arange(n_t)
    for m in range(m_max + 1):
        if m in wanted:
            row = k * (a1f[idx + m] * Z[:, 0] + a2f[idx + m] * Z[:, 1])
            value = float(weights @ row)
            for j in wanted[m]:
                g2[j] = value
                if table is not None:
                    table[:, j] = row
        if m < m_max:
            Z = np.einsum("nij,nj->ni", M[idx + m], Z)
    return CorrelationResult(taus=taus, g2_of_tau=g2, t_grid_used=t, two_time=table)
