"""Full atom + cavity master equation on a truncated Fock space.

Nothing is adiabatically eliminated here except the far-detuned upper
levels: the cavity mode is kept explicitly, so comparing against
:mod:`photontrain.dynamics` measures the error of the bad-cavity
reduction.

Basis ordering is ``|s, n>`` with index ``s * (n_max + 1) + n``, where
``s = 0`` is ground state 1 and ``s = 1`` is ground state 2.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .dynamics import Trajectory, default_time_grid
from .integrator import OdeProblem, solve
from .params import DerivedRates, RawParams
from .pulses import PulseTrain

__all__ = [
    "Generators",
    "OracleOutput",
    "PositivityError",
    "build_generators",
    "ground_state",
    "evolve",
    "fock_convergence",
    "FockReport",
    "compare_with_adiabatic",
    "stark_shift_report",
    "HERMITICITY_TOL",
    "ORACLE_RTOL",
    "ORACLE_ATOL",
    "POSITIVITY_TOL",
]

# tighter than the reduced-model defaults: solver error must stay below
# the positivity tolerance on near-pure states
ORACLE_RTOL = 1e-11
ORACLE_ATOL = 1e-14

HERMITICITY_TOL = 1e-10
POSITIVITY_TOL = 1e-10
TRACE_TOL = 1e-10


class PositivityError(RuntimeError):
    """The propagated density matrix left the physical set."""


@dataclass(frozen=True)
class Generators:
    """Operator skeletons on the atom x cavity space plus peak rates.

    At time ``t`` the Hamiltonian is ``sqrt(f1) H1 + sqrt(f2) H2`` and
    the rates of the pumping and loss channels are the peaks times
    ``f1`` or ``f2``.
    """

    n_max: int
    a: np.ndarray
    adag: np.ndarray
    sigma12: np.ndarray
    sigma21: np.ndarray
    sigma11: np.ndarray
    sigma22: np.ndarray
    H1: np.ndarray
    H2: np.ndarray
    kappa: float
    Gamma1: float
    Gamma2: float
    Gamma1_out: float
    Gamma2_out: float

    @property
    def dim(self) -> int:
        return 2 * (self.n_max + 1)

    @property
    def number(self) -> np.ndarray:
        return self.adag @ self.a


def build_generators(params: DerivedRates, n_max: int = 3) -> Generators:
    """Lift the atomic and cavity operators and assemble the Hamiltonian parts.

    ``H1 = G1 (sigma21 a^dag + sigma12 a)`` and
    ``H2 = G2 (sigma12 a^dag + sigma21 a)``.
    """
    if int(n_max) != n_max or n_max < 1:
        raise ValueError(f"n_max must be an integer >= 1, got {n_max!r}")
    n_max = int(n_max)
    d = n_max + 1
    a_f = np.diag(np.sqrt(np.arange(1, d, dtype=float)), 1)
    eye_f = np.eye(d)
    s21 = np.array([[0.0, 0.0], [1.0, 0.0]])   # |2><1|
    a = np.kron(np.eye(2), a_f).astype(complex)
    adag = a.conj().T
    sigma21 = np.kron(s21, eye_f).astype(complex)
    sigma12 = sigma21.conj().T
    sigma11 = sigma12 @ sigma21
    sigma22 = sigma21 @ sigma12
    H1 = params.G1 * (sigma21 @ adag + sigma12 @ a)
    H2 = params.G2 * (sigma12 @ adag + sigma21 @ a)
    return Generators(
        n_max=n_max, a=a, adag=adag, sigma12=sigma12, sigma21=sigma21,
        sigma11=sigma11, sigma22=sigma22, H1=H1, H2=H2, kappa=params.kappa,
        Gamma1=params.Gamma1, Gamma2=params.Gamma2,
        Gamma1_out=params.Gamma1_out, Gamma2_out=params.Gamma2_out,
    )


def ground_state(gen: Generators) -> np.ndarray:
    """``|1, 0><1, 0|``: atom in state 1, cavity empty."""
    rho = np.zeros((gen.dim, gen.dim), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def _dissipator(L, Ld, LdL, rho):
    return L @ rho @ Ld - 0.5 * (LdL @ rho + rho @ LdL)


def liouvillian_rhs(gen: Generators, train: PulseTrain):
    """Right-hand side ``drho/dt`` as a function of ``(t, rho)``."""
    a, adag = gen.a, gen.adag
    n_op = gen.number
    s21, s12 = gen.sigma21, gen.sigma12
    s11, s22 = gen.sigma11, gen.sigma22

    def rhs(t, rho):
        f1 = float(train.f1(t))
        f2 = float(train.f2(t))
        H = np.sqrt(f1) * gen.H1 + np.sqrt(f2) * gen.H2
        out = -1j * (H @ rho - rho @ H)
        out += gen.kappa * _dissipator(a, adag, n_op, rho)
        if gen.Gamma1 and f1:
            out += gen.Gamma1 * f1 * _dissipator(s21, s12, s11, rho)
        if gen.Gamma2 and f2:
            out += gen.Gamma2 * f2 * _dissipator(s12, s21, s22, rho)
        loss = gen.Gamma1_out * f1 * s11 + gen.Gamma2_out * f2 * s22
        if np.any(loss):
            out -= 0.5 * (loss @ rho + rho @ loss)
        return out

    return rhs


@dataclass
class OracleOutput:
    times: np.ndarray
    mean_photon: np.ndarray
    flux: np.ndarray
    p11: np.ndarray
    p22: np.ndarray
    trace: np.ndarray
    n_out_cum: np.ndarray
    hermiticity_error: np.ndarray
    min_eigenvalue: np.ndarray
    rho: np.ndarray


def evolve(gen: Generators, train: PulseTrain, rho0=None, grid=None, *,
           rel_tol: float = ORACLE_RTOL, abs_tol: float = ORACLE_ATOL,
           check_positivity: bool = True) -> OracleOutput:
    """Integrate the master equation and record observables on ``grid``.

    The output flux is ``kappa <a^dag a>`` (vacuum input); its running
    integral is carried as an extra state component.

    Raises
    ------
    PositivityError
        If the state stops being Hermitian, positive or trace-bounded
        beyond tolerance, which signals a too-small cutoff or a solver
        problem.
    """
    if grid is None:
        grid = default_time_grid(train)
    grid = np.asarray(grid, dtype=float)
    rho0 = ground_state(gen) if rho0 is None else np.asarray(rho0, dtype=complex)
    d = gen.dim
    if rho0.shape != (d, d):
        raise ValueError(f"rho0 must be {d}x{d}")
    if np.max(np.abs(rho0 - rho0.conj().T)) > HERMITICITY_TOL:
        raise ValueError("rho0 is not Hermitian")
    if np.linalg.eigvalsh(rho0).min() < -POSITIVITY_TOL:
        raise ValueError("rho0 is not positive semidefinite")
    if np.trace(rho0).real > 1 + TRACE_TOL:
        raise ValueError("rho0 has trace > 1")

    rhs_rho = liouvillian_rhs(gen, train)
    n_op = gen.number
    kappa = gen.kappa

    def rhs(t, y):
        rho = y[:-1].reshape(d, d)
        drho = rhs_rho(t, rho)
        flux = kappa * np.einsum("ij,ji->", n_op, rho).real
        return np.concatenate([drho.ravel(), [flux]])

    y0 = np.concatenate([rho0.ravel(), [0.0]]).astype(complex)
    h = train.shape.duration_T
    problem = OdeProblem(rhs, grid, rel_tol=rel_tol, abs_tol=abs_tol,
                         breakpoints=train.breakpoints(),
                         max_step=0.25 * h if h > 0 else np.inf)
    states = solve(problem, y0)
    rhos = states[:, :-1].reshape(-1, d, d)

    herm = np.max(np.abs(rhos - np.conj(np.swapaxes(rhos, 1, 2))), axis=(1, 2))
    hermitian_part = 0.5 * (rhos + np.conj(np.swapaxes(rhos, 1, 2)))
    min_eig = np.linalg.eigvalsh(hermitian_part)[:, 0]
    trace = np.einsum("tii->t", rhos).real
    if check_positivity:
        bad = np.flatnonzero((herm > HERMITICITY_TOL) | (min_eig < -POSITIVITY_TOL)
                             | (trace > 1 + TRACE_TOL))
        if bad.size:
            i = bad[0]
            raise PositivityError(
                f"unphysical state at t = {grid[i]:.6g}: hermiticity error {herm[i]:.3g}, "
                f"min eigenvalue {min_eig[i]:.3g}, trace {trace[i]:.12g} "
                f"(increase n_max or tighten tolerances)")

    def expect(op):
        return np.einsum("ij,tji->t", op, rhos).real

    mean_photon = expect(n_op)
    return OracleOutput(
        times=grid,
        mean_photon=mean_photon,
        flux=kappa * mean_photon,
        p11=expect(gen.sigma11),
        p22=expect(gen.sigma22),
        trace=trace,
        n_out_cum=states[:, -1].real,
        hermiticity_error=herm,
        min_eigenvalue=min_eig,
        rho=rhos,
    )


@dataclass
class FockReport:
    cutoffs: list[int]
    outputs: list[OracleOutput]
    max_abs_diff: dict[tuple[int, int], float]
    max_rel_diff: dict[tuple[int, int], float]


def fock_convergence(params: DerivedRates, train: PulseTrain, n_max_list, grid=None,
                     **kwargs) -> FockReport:
    """Run :func:`evolve` at each cutoff and compare the flux curves pairwise.

    Relative differences are normalised by the larger of the two peak fluxes.
    """
    cutoffs = [int(n) for n in n_max_list]
    if cutoffs != sorted(cutoffs):
        raise ValueError("n_max_list must be ascending")
    if grid is None:
        grid = default_time_grid(train)
    outputs = [evolve(build_generators(params, n), train, grid=grid, **kwargs) for n in cutoffs]
    abs_diff = {}
    rel_diff = {}
    for (i, oi), (j, oj) in combinations(list(zip(cutoffs, outputs)), 2):
        diff = float(np.max(np.abs(oi.flux - oj.flux)))
        peak = max(float(np.max(oi.flux)), float(np.max(oj.flux)))
        abs_diff[(i, j)] = diff
        rel_diff[(i, j)] = diff / peak if peak > 0 else 0.0
    return FockReport(cutoffs, outputs, abs_diff, rel_diff)


def compare_with_adiabatic(oracle: OracleOutput, traj: Trajectory) -> dict[str, float]:
    """Deviation of the reduced-model flux from the full-model flux on a shared grid."""
    if oracle.times.shape != traj.times.shape or not np.allclose(oracle.times, traj.times):
        raise ValueError("oracle and trajectory must share a time grid")
    diff = traj.flux - oracle.flux
    peak = float(np.max(np.abs(oracle.flux)))
    norm = float(np.linalg.norm(oracle.flux))
    n_full = float(oracle.n_out_cum[-1])
    n_red = float(traj.n_out_cum[-1])
    return {
        "max_rel_flux_deviation": float(np.max(np.abs(diff))) / peak if peak > 0 else 0.0,
        "l2_rel_flux_deviation": float(np.linalg.norm(diff)) / norm if norm > 0 else 0.0,
        "n_out_full": n_full,
        "n_out_adiabatic": n_red,
        "n_out_rel_deviation": abs(n_red - n_full) / n_full if n_full > 0 else 0.0,
        "p11_final_deviation": abs(float(traj.p11[-1] - oracle.p11[-1])),
        "p22_final_deviation": abs(float(traj.p22[-1] - oracle.p22[-1])),
    }


def stark_shift_report(raw: RawParams) -> dict[str, float]:
    """Peak light shifts ``Omega_i^2 / Delta_i`` and cavity shifts ``g_i^2 / Delta_i`` over ``kappa``.

    These are left out of the Hamiltonian; small ratios justify that.
    """
    return {
        "laser_shift1_over_kappa": raw.omega1 ** 2 / raw.delta1 / raw.kappa,
        "laser_shift2_over_kappa": raw.omega2 ** 2 / raw.delta2 / raw.kappa,
        "cavity_shift1_over_kappa": raw.g1 ** 2 / raw.delta1 / raw.kappa,
        "cavity_shift2_over_kappa": raw.g2 ** 2 / raw.delta2 / raw.kappa,
    }
