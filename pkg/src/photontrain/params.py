"""Physical parameters and the effective rates derived from them.

All rates are angular frequencies in rad/us; times are in us.  The
conversion from ordinary frequency (MHz) happens once, at the config
boundary (see :mod:`photontrain.config`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

__all__ = [
    "RawParams",
    "DerivedRates",
    "RegimeIssue",
    "derive",
    "check_regime",
    "FAR_DETUNING_MIN",
    "BAD_CAVITY_MAX",
    "ZEEMAN_MIN",
]

# regime thresholds
FAR_DETUNING_MIN = 5.0
BAD_CAVITY_MAX = 0.5
ZEEMAN_MIN = 5.0


@dataclass(frozen=True)
class RawParams:
    """Raw physical rates, all in rad/us.

    ``gamma_42`` and ``gamma_31`` are the partial spontaneous rates that
    drive optical pumping between the ground states; ``gamma_4out`` and
    ``gamma_3out`` feed levels outside the four-level system.
    ``gamma_sp`` and ``delta_B`` are only used for diagnostics.
    """

    g1: float
    g2: float
    omega1: float
    omega2: float
    delta1: float
    delta2: float
    kappa: float
    gamma_42: float = 0.0
    gamma_31: float = 0.0
    gamma_4out: float = 0.0
    gamma_3out: float = 0.0
    gamma_sp: float = 0.0
    delta_B: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not math.isfinite(value):
                raise ValueError(f"{f.name} must be finite, got {value!r}")
            if value < 0:
                raise ValueError(f"{f.name} must be >= 0, got {value!r}")
        for name in ("delta1", "delta2", "kappa"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")


@dataclass(frozen=True)
class DerivedRates:
    """Peak effective rates (rad/us) entering the reduced and full models.

    Time-dependent rates are these peaks times the pump envelopes,
    e.g. ``alpha1 * f1(t)``.
    """

    G1: float
    G2: float
    alpha1: float
    alpha2: float
    Gamma1: float
    Gamma2: float
    Gamma1_out: float
    Gamma2_out: float
    kappa: float
    R_sn1: float
    R_sn2: float

    @property
    def R_sn(self) -> float:
        """Headline signal-to-noise ratio: the weaker of the two branches."""
        return min(self.R_sn1, self.R_sn2)

    def lossless(self) -> "DerivedRates":
        """Copy with the out-of-system loss rates switched off."""
        return replace(self, Gamma1_out=0.0, Gamma2_out=0.0)


def _snr(g: float, kappa: float, gamma: float) -> float:
    if gamma == 0:
        return math.inf
    return 4.0 * g * g / (kappa * gamma)


def derive(raw: RawParams) -> DerivedRates:
    """Compute the effective rates from raw parameters.

    Examples
    --------
    >>> two_pi = 2 * math.pi
    >>> raw = RawParams(g1=two_pi * 10, g2=two_pi * 10, omega1=two_pi * 10,
    ...                 omega2=two_pi * 10, delta1=two_pi * 100,
    ...                 delta2=two_pi * 100, kappa=two_pi * 3)
    >>> round(derive(raw).alpha1, 3)
    8.378
    """
    if raw.delta1 <= 0 or raw.delta2 <= 0 or raw.kappa <= 0:
        raise ValueError("detunings and kappa must be strictly positive")
    s1 = raw.omega1 / raw.delta1
    s2 = raw.omega2 / raw.delta2
    G1 = raw.g1 * s1
    G2 = raw.g2 * s2
    return DerivedRates(
        G1=G1,
        G2=G2,
        alpha1=4.0 * G1 * G1 / raw.kappa,
        alpha2=4.0 * G2 * G2 / raw.kappa,
        Gamma1=s1 * s1 * raw.gamma_42,
        Gamma2=s2 * s2 * raw.gamma_31,
        Gamma1_out=s1 * s1 * raw.gamma_4out,
        Gamma2_out=s2 * s2 * raw.gamma_3out,
        kappa=raw.kappa,
        R_sn1=_snr(raw.g1, raw.kappa, raw.gamma_42),
        R_sn2=_snr(raw.g2, raw.kappa, raw.gamma_31),
    )


@dataclass(frozen=True)
class RegimeIssue:
    """One violated validity condition of the reduced model."""

    condition: str
    branch: int
    ratio: float
    threshold: float

    def __str__(self):
        return (f"regime warning [{self.condition}, branch {self.branch}]: "
                f"ratio {self.ratio:.4g} vs threshold {self.threshold:g}")


def check_regime(raw: RawParams, derived: DerivedRates | None = None) -> list[RegimeIssue]:
    """List every violated regime condition; never raises.

    Checks far detuning (``delta_i / max(g_i, kappa, omega_i) >= 5``),
    the bad-cavity limit (``G_i / kappa <= 0.5``) and, when a Zeeman
    splitting is given, ``delta_i / delta_B >= 5``.
    """
    if derived is None:
        derived = derive(raw)
    issues = []
    branches = (
        (1, raw.delta1, raw.g1, raw.omega1, derived.G1),
        (2, raw.delta2, raw.g2, raw.omega2, derived.G2),
    )
    for i, delta, g, omega, G in branches:
        scale = max(g, raw.kappa, omega)
        ratio = delta / scale
        if ratio < FAR_DETUNING_MIN:
            issues.append(RegimeIssue("far-detuning", i, ratio, FAR_DETUNING_MIN))
        ratio = G / raw.kappa
        if ratio > BAD_CAVITY_MAX:
            issues.append(RegimeIssue("bad-cavity", i, ratio, BAD_CAVITY_MAX))
        if raw.delta_B > 0:
            ratio = delta / raw.delta_B
            if ratio < ZEEMAN_MIN:
                issues.append(RegimeIssue("zeeman", i, ratio, ZEEMAN_MIN))
    return issues
