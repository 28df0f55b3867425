"""Pump envelopes f1(t), f2(t) built from trains of identical subpulses.

The envelope ``f`` multiplies every rate (it is the intensity-like
quantity, the square of the field envelope).  ``duration_T`` is the FWHM
of ``f`` and every shape peaks at exactly 1, so the Rabi frequencies in
:class:`~photontrain.params.RawParams` are peak values.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import erf

__all__ = [
    "ShapeKind",
    "SubpulseShape",
    "PulseTrain",
    "integral_f",
    "eval_f1",
    "eval_f2",
    "GAUSS_TRUNCATION",
]

_FOUR_LN2 = 4.0 * math.log(2.0)

# gaussian subpulses vanish beyond this many FWHM from their center
GAUSS_TRUNCATION = 5.0


class ShapeKind(str, enum.Enum):
    GAUSSIAN = "gaussian"
    SINE_SQUARED = "sine-squared"
    FLAT_TOP = "flat-top"


@dataclass(frozen=True)
class SubpulseShape:
    """Single subpulse envelope centred at 0, peak 1, FWHM ``duration_T``.

    * gaussian: ``exp(-4 ln2 (t/T)^2)`` for ``|t| <= 5T``, else 0
    * sine-squared: ``cos^2(pi t / 2T)`` for ``|t| <= T``, else 0
    * flat-top: 1 for ``|t| <= T/2``, else 0
    """

    kind: ShapeKind = ShapeKind.GAUSSIAN
    duration_T: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ShapeKind(self.kind))
        if not (self.duration_T >= 0 and math.isfinite(self.duration_T)):
            raise ValueError(f"duration_T must be finite and >= 0, got {self.duration_T!r}")

    @property
    def half_support(self) -> float:
        """Distance from the center beyond which the envelope is exactly 0."""
        T = self.duration_T
        if self.kind is ShapeKind.GAUSSIAN:
            return GAUSS_TRUNCATION * T
        if self.kind is ShapeKind.SINE_SQUARED:
            return T
        return 0.5 * T

    def envelope(self, x):
        """Envelope at offset ``x`` from the subpulse center."""
        x = np.asarray(x, dtype=float)
        T = self.duration_T
        if T == 0:
            return np.zeros_like(x)
        inside = np.abs(x) <= self.half_support
        if self.kind is ShapeKind.GAUSSIAN:
            u = x / T
            val = np.exp(-_FOUR_LN2 * u * u)
        elif self.kind is ShapeKind.SINE_SQUARED:
            val = np.cos(0.5 * math.pi * x / T) ** 2
        else:
            val = np.ones_like(x)
        return np.where(inside, val, 0.0)

    def cumulative(self, x):
        """Running integral of the envelope from -inf to offset ``x``."""
        x = np.asarray(x, dtype=float)
        T = self.duration_T
        if T == 0:
            return np.zeros_like(x)
        h = self.half_support
        xc = np.clip(x, -h, h)
        if self.kind is ShapeKind.GAUSSIAN:
            # integral restricted to the truncated support [-h, h]
            c = math.sqrt(_FOUR_LN2) / T
            scale = 0.5 * math.sqrt(math.pi) / c
            return scale * (erf(c * xc) - erf(-c * h))
        if self.kind is ShapeKind.SINE_SQUARED:
            w = 0.5 * math.pi / T
            return 0.5 * (xc + h) + (np.sin(2 * w * xc) - np.sin(-2 * w * h)) / (4 * w)
        return xc + h

    def integral(self) -> float:
        """Area under one subpulse envelope."""
        return float(self.cumulative(self.half_support))


def integral_f(shape: SubpulseShape) -> float:
    """Area under one subpulse: ``T sqrt(pi / 4 ln2)`` for a gaussian, ``T`` otherwise.

    The gaussian value is the untruncated closed form; the truncation
    error is below 1e-30 relative.
    """
    T = shape.duration_T
    if shape.kind is ShapeKind.GAUSSIAN:
        return T * math.sqrt(math.pi / _FOUR_LN2)
    return T


@dataclass(frozen=True)
class PulseTrain:
    """Two interleaved trains of ``n_subpulses`` subpulses each.

    Train 1 subpulses are centred at ``t_first + l * period``; train 2
    is the same comb delayed by ``tau_d``.  If ``period`` is omitted it
    defaults to ``2 * tau_d`` so the two trains alternate evenly.
    """

    shape: SubpulseShape = SubpulseShape()
    n_subpulses: int = 4
    tau_d: float = 3.0
    period: float | None = None
    t_first: float = 0.0

    def __post_init__(self):
        if self.period is None:
            object.__setattr__(self, "period", 2.0 * self.tau_d)
        if int(self.n_subpulses) != self.n_subpulses or self.n_subpulses < 0:
            raise ValueError(f"n_subpulses must be a non-negative integer, got {self.n_subpulses!r}")
        object.__setattr__(self, "n_subpulses", int(self.n_subpulses))
        T = self.shape.duration_T
        if not self.tau_d > T:
            raise ValueError(f"pulses overlap: tau_d={self.tau_d} must exceed T={T}")
        if self.n_subpulses > 1:
            if not self.period > 2 * T:
                raise ValueError(f"pulses overlap: period={self.period} must exceed 2T={2 * T}")
            if not self.period - self.tau_d > T:
                raise ValueError(
                    f"pulses overlap: period - tau_d = {self.period - self.tau_d} must exceed T={T}")

    @property
    def centers1(self) -> np.ndarray:
        return self.t_first + self.period * np.arange(self.n_subpulses)

    @property
    def centers2(self) -> np.ndarray:
        return self.centers1 + self.tau_d

    def shifted(self, s: float) -> "PulseTrain":
        return replace(self, t_first=self.t_first + s)

    def pulse_centers(self) -> list[tuple[float, int]]:
        """All subpulse centers in time order as ``(center, train)`` pairs."""
        pairs = [(float(c), 1) for c in self.centers1] + [(float(c), 2) for c in self.centers2]
        return sorted(pairs)

    def support(self) -> tuple[float, float]:
        """Time window outside of which every envelope vanishes.

        Uses a 5T margin around the first and last centers for every
        shape, which doubles as the "t = -inf" start time.
        """
        margin = GAUSS_TRUNCATION * self.shape.duration_T
        if self.n_subpulses == 0:
            return self.t_first - margin, self.t_first + margin
        last = self.t_first + (self.n_subpulses - 1) * self.period + self.tau_d
        return self.t_first - margin, last + margin

    def breakpoints(self) -> np.ndarray:
        """Times where an envelope switches on or off (sorted, unique)."""
        h = self.shape.half_support
        c = np.concatenate([self.centers1, self.centers2])
        return np.unique(np.concatenate([c - h, c + h]))

    def _sum(self, centers, t):
        t = np.asarray(t, dtype=float)
        if centers.size == 0:
            return np.zeros_like(t)
        return self.shape.envelope(t[..., None] - centers).sum(axis=-1)

    def f1(self, t):
        return self._sum(self.centers1, t)

    def f2(self, t):
        return self._sum(self.centers2, t)

    def cumulative1(self, t):
        """Running integral of f1 from -inf to ``t``."""
        t = np.asarray(t, dtype=float)
        if self.n_subpulses == 0:
            return np.zeros_like(t)
        return self.shape.cumulative(t[..., None] - self.centers1).sum(axis=-1)

    def cumulative2(self, t):
        t = np.asarray(t, dtype=float)
        if self.n_subpulses == 0:
            return np.zeros_like(t)
        return self.shape.cumulative(t[..., None] - self.centers2).sum(axis=-1)


def eval_f1(train: PulseTrain, t):
    """Train-1 envelope at time(s) ``t``."""
    return train.f1(t)


def eval_f2(train: PulseTrain, t):
    """Train-2 envelope at time(s) ``t``."""
    return train.f2(t)
