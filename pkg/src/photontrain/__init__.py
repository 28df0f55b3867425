"""Simulator for a deterministic single-photon-train source.

A four-level atom in a driven optical cavity emits one photon per pump
subpulse through alternating vacuum-stimulated Raman transitions.  The
package integrates the reduced (bad-cavity) atomic model, computes the
train-integrated intensity correlation, and checks both against a full
master-equation model with an explicit cavity mode.
"""

__version__ = "0.1.0"

from .params import DerivedRates, RawParams, check_regime, derive
from .pulses import PulseTrain, ShapeKind, SubpulseShape, integral_f
from .dynamics import AtomState, Trajectory, analytic_single_pulse_flux, leakage_prediction, simulate
from .correlation import CorrelationResult, g2_grid
from .lindblad import build_generators, evolve, fock_convergence
from .config import Scenario, load_config

__all__ = [
    "RawParams", "DerivedRates", "derive", "check_regime",
    "PulseTrain", "SubpulseShape", "ShapeKind", "integral_f",
    "AtomState", "Trajectory", "simulate", "analytic_single_pulse_flux", "leakage_prediction",
    "CorrelationResult", "g2_grid",
    "build_generators", "evolve", "fock_convergence",
    "Scenario", "load_config",
]
