"""Reduced atomic dynamics in the bad-cavity limit.

With the upper levels and the cavity mode eliminated, the atom is
described by the two ground-state populations and their coherence::

    dp_ii/dt = -(alpha_i + Gamma_i + Gamma_i_out)(t) p_ii + (alpha_j + Gamma_j)(t) p_jj
    dc_21/dt = -1/2 sum_i (alpha_i + Gamma_i)(t) c_21

and the output photon flux is ``alpha_1(t) p_11 + alpha_2(t) p_22``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .integrator import DEFAULT_ATOL, DEFAULT_RTOL, OdeProblem, solve
from .params import BAD_CAVITY_MAX, DerivedRates
from .pulses import PulseTrain, SubpulseShape, integral_f

__all__ = [
    "AtomState",
    "Trajectory",
    "RegimeWarning",
    "default_time_grid",
    "simulate",
    "analytic_single_pulse_flux",
    "analytic_single_pulse_total",
    "leakage_prediction",
    "pulse_windows",
    "photons_per_pulse",
    "population_after_pulses",
    "flux_fwhm_per_pulse",
]


class RegimeWarning(UserWarning):
    """The reduced model is being run outside its validity regime."""


@dataclass(frozen=True)
class AtomState:
    p11: float = 1.0
    p22: float = 0.0
    coh21: complex = 0.0

    def __post_init__(self):
        if self.p11 < 0 or self.p22 < 0:
            raise ValueError("populations must be non-negative")
        if self.p11 + self.p22 > 1 + 1e-9:
            raise ValueError("total population exceeds 1")
        if abs(self.coh21) > math.sqrt(self.p11 * self.p22) + 1e-9:
            raise ValueError("|coh21| exceeds sqrt(p11 p22)")


@dataclass
class Trajectory:
    times: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    p11: np.ndarray
    p22: np.ndarray
    coh21: np.ndarray
    flux: np.ndarray
    n_out_cum: np.ndarray
    n_out1_cum: np.ndarray
    n_out2_cum: np.ndarray

    @property
    def pop_total(self) -> np.ndarray:
        return self.p11 + self.p22

    def final(self) -> AtomState:
        p11, p22 = max(self.p11[-1], 0.0), max(self.p22[-1], 0.0)
        return AtomState(p11, p22, complex(self.coh21[-1]))


def default_time_grid(train: PulseTrain, points_per_fwhm: int = 40) -> np.ndarray:
    """Uniform grid over the train support with spacing ``T / points_per_fwhm``."""
    t0, t1 = train.support()
    T = train.shape.duration_T
    h = T / points_per_fwhm if T > 0 else 0.025
    n = int(math.ceil(round((t1 - t0) / h, 9)))
    return t0 + h * np.arange(n + 1)


def _max_step(train: PulseTrain) -> float:
    T = train.shape.duration_T
    return 0.25 * T if T > 0 else np.inf


def simulate(
    params: DerivedRates,
    train: PulseTrain,
    grid=None,
    init: AtomState | None = None,
    *,
    rel_tol: float = DEFAULT_RTOL,
    abs_tol: float = DEFAULT_ATOL,
) -> Trajectory:
    """Integrate the reduced model on ``grid`` starting from ``init`` at ``grid[0]``.

    Parameters
    ----------
    params : DerivedRates
        Peak effective rates.
    train : PulseTrain
        Pump envelopes.
    grid : array_like, optional
        Output times; defaults to :func:`default_time_grid`.  Integration
        starts at ``grid[0]``, so a grid starting before the train support
        realises the ``t = -inf`` initial condition.
    init : AtomState, optional
        Defaults to all population in state 1.
    """
    if grid is None:
        grid = default_time_grid(train)
    grid = np.asarray(grid, dtype=float)
    init = AtomState() if init is None else init
    for i, G in ((1, params.G1), (2, params.G2)):
        if G / params.kappa > BAD_CAVITY_MAX:
            warnings.warn(f"G{i}/kappa = {G / params.kappa:.3g} exceeds {BAD_CAVITY_MAX}: "
                          "bad-cavity elimination is unreliable", RegimeWarning, stacklevel=2)

    a1, a2 = params.alpha1, params.alpha2
    up1, up2 = a1 + params.Gamma1, a2 + params.Gamma2
    down1, down2 = up1 + params.Gamma1_out, up2 + params.Gamma2_out

    def populations(t, y):
        f1 = train.f1(t)
        f2 = train.f2(t)
        p1, p2 = y[0], y[1]
        return np.array([
            -down1 * f1 * p1 + up2 * f2 * p2,
            -down2 * f2 * p2 + up1 * f1 * p1,
            a1 * f1 * p1,
            a2 * f2 * p2,
        ])

    def coherence(t, y):
        return -0.5 * (up1 * train.f1(t) + up2 * train.f2(t)) * y

    common = dict(output_grid=grid, rel_tol=rel_tol, abs_tol=abs_tol,
                  breakpoints=train.breakpoints(), max_step=_max_step(train))
    # populations and coherence are decoupled; separate solves keep step
    # selection for one independent of the other
    pops = solve(OdeProblem(populations, **common), [init.p11, init.p22, 0.0, 0.0])
    coh = solve(OdeProblem(coherence, **common), np.array([complex(init.coh21)]))

    f1 = train.f1(grid)
    f2 = train.f2(grid)
    p11, p22, n1, n2 = pops.T
    # a drained population can undershoot 0 by less than abs_tol
    p11 = np.maximum(p11, 0.0)
    p22 = np.maximum(p22, 0.0)
    # non-negative integrands; a running max removes sub-ulp RK roundoff dips
    n1 = np.maximum.accumulate(n1)
    n2 = np.maximum.accumulate(n2)
    return Trajectory(
        times=grid,
        f1=f1,
        f2=f2,
        p11=p11,
        p22=p22,
        coh21=coh[:, 0],
        flux=a1 * f1 * p11 + a2 * f2 * p22,
        n_out_cum=n1 + n2,
        n_out1_cum=n1,
        n_out2_cum=n2,
    )


def _require_single_pulse(params: DerivedRates, pulse):
    if params.Gamma1 != 0 or params.Gamma1_out != 0:
        raise ValueError("closed-form flux needs Gamma1 = Gamma1_out = 0")
    if isinstance(pulse, PulseTrain):
        if pulse.n_subpulses != 1 or params.alpha2 != 0:
            raise ValueError("closed-form flux applies to a single train-1 pulse only")
        return pulse.shape, pulse.t_first
    return pulse, None


def analytic_single_pulse_flux(params: DerivedRates, pulse, t, center: float = 0.0):
    """Closed-form flux ``alpha1 f(t) exp(-alpha1 int_{-inf}^t f)`` of one lossless pulse.

    ``pulse`` is a :class:`SubpulseShape` centred at ``center`` or a
    one-subpulse :class:`PulseTrain` with train 2 switched off.
    """
    shape, c = _require_single_pulse(params, pulse)
    if c is not None:
        center = c
    x = np.asarray(t, dtype=float) - center
    a = params.alpha1
    return a * shape.envelope(x) * np.exp(-a * shape.cumulative(x))


def analytic_single_pulse_total(params: DerivedRates, shape: SubpulseShape) -> float:
    """Photons emitted by one lossless train-1 pulse: ``1 - exp(-alpha1 * area)``."""
    return -math.expm1(-params.alpha1 * integral_f(shape))


def leakage_prediction(params: DerivedRates, n_pulses: int) -> float:
    """Remaining population after ``n_pulses`` pulses, ``1 - n Gamma_out / alpha``.

    Only meaningful for the symmetric case ``alpha1 = alpha2`` and
    ``Gamma1_out = Gamma2_out`` with strong pulses.
    """
    if not (math.isclose(params.alpha1, params.alpha2, rel_tol=1e-12)
            and math.isclose(params.Gamma1_out, params.Gamma2_out, rel_tol=1e-12, abs_tol=0.0)):
        raise ValueError("leakage law assumes alpha1 = alpha2 and Gamma1_out = Gamma2_out")
    if params.alpha1 <= 0:
        raise ValueError("leakage law needs alpha > 0")
    return max(0.0, 1.0 - n_pulses * params.Gamma1_out / params.alpha1)


def pulse_windows(train: PulseTrain, t_start: float, t_end: float):
    """Split ``[t_start, t_end]`` into one window per subpulse.

    Windows meet halfway between consecutive centers.  Returns a list of
    ``(lo, hi, center, train_index)``.
    """
    pulses = train.pulse_centers()
    out = []
    for k, (c, which) in enumerate(pulses):
        lo = t_start if k == 0 else 0.5 * (pulses[k - 1][0] + c)
        hi = t_end if k == len(pulses) - 1 else 0.5 * (c + pulses[k + 1][0])
        out.append((lo, hi, c, which))
    return out


def photons_per_pulse(traj: Trajectory, train: PulseTrain) -> np.ndarray:
    """Photons emitted by each subpulse, in time order.

    Each channel's emission is split between that channel's own
    subpulses at the midpoints of consecutive same-train centers, so the
    tail of a neighbouring pulse from the other train is never miscounted
    and the entries sum to the total emitted.
    """
    t0, t1 = traj.times[0], traj.times[-1]
    out = []
    for c, which in train.pulse_centers():
        centers = train.centers1 if which == 1 else train.centers2
        cum = traj.n_out1_cum if which == 1 else traj.n_out2_cum
        k = int(np.argmin(np.abs(centers - c)))
        lo = t0 if k == 0 else 0.5 * (centers[k - 1] + c)
        hi = t1 if k == len(centers) - 1 else 0.5 * (c + centers[k + 1])
        a, b = np.interp([lo, hi], traj.times, cum)
        out.append(b - a)
    return np.array(out)


def population_after_pulses(traj: Trajectory, train: PulseTrain) -> np.ndarray:
    """Total ground-state population at the end of each subpulse window."""
    w = pulse_windows(train, traj.times[0], traj.times[-1])
    return np.interp([hi for _, hi, _, _ in w], traj.times, traj.pop_total)


def _fwhm(t, y):
    peak = int(np.argmax(y))
    half = 0.5 * y[peak]
    if half <= 0:
        return 0.0
    i = peak
    while i > 0 and y[i - 1] >= half:
        i -= 1
    j = peak
    while j < len(y) - 1 and y[j + 1] >= half:
        j += 1
    left = t[i] if i == 0 else np.interp(half, [y[i - 1], y[i]], [t[i - 1], t[i]])
    right = t[j] if j == len(y) - 1 else np.interp(half, [y[j + 1], y[j]], [t[j + 1], t[j]])
    return float(right - left)


def flux_fwhm_per_pulse(traj: Trajectory, train: PulseTrain) -> np.ndarray:
    """FWHM of the emitted flux pulse inside each subpulse window."""
    widths = []
    for lo, hi, _, _ in pulse_windows(train, traj.times[0], traj.times[-1]):
        m = (traj.times >= lo) & (traj.times <= hi)
        widths.append(_fwhm(traj.times[m], traj.flux[m]))
    return np.array(widths)
