import math

import numpy as np
import pytest

from photontrain.config import load_config
from photontrain.dynamics import default_time_grid, simulate
from photontrain.lindblad import (PositivityError, build_generators, compare_with_adiabatic,
                                  evolve, fock_convergence, ground_state, liouvillian_rhs,
                                  stark_shift_report)


def ket(gen, s, n):
    v = np.zeros(gen.dim, dtype=complex)
    v[(s - 1) * (gen.n_max + 1) + n] = 1.0
    return v


@pytest.fixture
def gen():
    return build_generators(load_config("paper-d2").derived, 3)


def test_number_operator(gen):
    for s in (1, 2):
        for n in range(gen.n_max + 1):
            assert np.allclose(gen.number @ ket(gen, s, n), n * ket(gen, s, n))


def test_truncated_commutator(gen):
    comm = gen.a @ gen.adag - gen.adag @ gen.a
    for s in (1, 2):
        for n in range(gen.n_max):
            v = ket(gen, s, n)
            assert np.allclose(comm @ v, v)


def test_raman_flip_creates_photon(gen):
    assert np.allclose(gen.sigma21 @ gen.adag @ ket(gen, 1, 0), ket(gen, 2, 1))
    assert np.allclose(gen.sigma12 @ gen.adag @ ket(gen, 2, 0), ket(gen, 1, 1))
    assert np.allclose(gen.sigma11 + gen.sigma22, np.eye(gen.dim))
    assert np.allclose(gen.H1, gen.H1.conj().T) and np.allclose(gen.H2, gen.H2.conj().T)


def test_rejects_small_cutoff():
    with pytest.raises(ValueError):
        build_generators(load_config("paper-d2").derived, 0)


def test_no_drive_is_stationary():
    sc = load_config("paper-d1", ["n_subpulses=0"])
    out = evolve(build_generators(sc.derived), sc.train, grid=np.linspace(0, 5, 11))
    assert np.all(out.p11 == 1) and np.all(out.mean_photon == 0) and np.all(out.trace == 1)
    report = fock_convergence(sc.derived, sc.train, [1, 2, 3], grid=np.linspace(0, 5, 11))
    assert all(v == 0 for v in report.max_abs_diff.values())


def test_lossless_trace_and_hermiticity():
    sc = load_config("paper-d2", ["n_subpulses=2"])
    out = evolve(build_generators(sc.derived), sc.train)
    assert np.max(np.abs(out.trace - 1)) < 1e-8
    assert np.max(out.hermiticity_error) < 1e-10
    assert np.min(out.min_eigenvalue) > -1e-10
    assert np.array_equal(out.flux, sc.derived.kappa * out.mean_photon)


def test_trace_decay_rate():
    sc = load_config("paper-d1", ["n_subpulses=1"])
    gen = build_generators(sc.derived)
    grid = default_time_grid(sc.train)
    out = evolve(gen, sc.train, grid=grid)
    rhs = liouvillian_rhs(gen, sc.train)
    for i in range(0, grid.size, 37):
        dtrace = np.trace(rhs(grid[i], out.rho[i])).real
        expected = -(gen.Gamma1_out * sc.train.f1(grid[i]) * out.p11[i]
                     + gen.Gamma2_out * sc.train.f2(grid[i]) * out.p22[i])
        assert dtrace == pytest.approx(expected, abs=1e-12)
    assert out.trace[-1] < 1


def test_agrees_with_reduced_model_at_reference_point():
    sc = load_config("paper-d1")
    grid = default_time_grid(sc.train)
    traj = simulate(sc.derived, sc.train, grid)
    out = evolve(build_generators(sc.derived), sc.train, grid=grid)
    summary = compare_with_adiabatic(out, traj)
    assert summary["n_out_rel_deviation"] < 0.10
    assert summary["p11_final_deviation"] < 0.05 and summary["p22_final_deviation"] < 0.05


def test_elimination_error_shrinks_at_fixed_rates():
    # g -> c g, k -> c^2 k keeps every reduced-model rate and lowers G/k by c
    devs = []
    for c in (1.0, math.sqrt(3.0), 3.0):
        sc = load_config("paper-d2", ["n_subpulses=1", f"g1_mhz={10 * c!r}", f"g2_mhz={10 * c!r}",
                                      f"kappa_mhz={3 * c * c!r}"])
        grid = default_time_grid(sc.train)
        traj = simulate(sc.derived, sc.train, grid)
        out = evolve(build_generators(sc.derived), sc.train, grid=grid)
        devs.append(compare_with_adiabatic(out, traj)["max_rel_flux_deviation"])
    assert devs[0] > devs[1] > devs[2]


def test_fock_convergence_ordering():
    sc = load_config("paper-d2", ["n_subpulses=1"])
    report = fock_convergence(sc.derived, sc.train, [1, 2, 3])
    assert report.max_rel_diff[(2, 3)] < 1e-4
    assert report.max_rel_diff[(1, 2)] > report.max_rel_diff[(2, 3)]
    with pytest.raises(ValueError):
        fock_convergence(sc.derived, sc.train, [3, 2])


def test_positivity_violation_aborts():
    sc = load_config("paper-d2", ["n_subpulses=1"])
    with pytest.raises(PositivityError, match="n_max"):
        evolve(build_generators(sc.derived), sc.train, rel_tol=1e-3, abs_tol=1e-3)


def test_invalid_initial_state(gen):
    sc = load_config("paper-d2", ["n_subpulses=1"])
    rho = ground_state(gen)
    rho[0, 1] = 0.5
    with pytest.raises(ValueError):
        evolve(gen, sc.train, rho0=rho)
    with pytest.raises(ValueError):
        evolve(gen, sc.train, rho0=2 * ground_state(gen))


def test_stark_shift_ratios():
    report = stark_shift_report(load_config("paper-d1").raw_params)
    assert report["laser_shift1_over_kappa"] == pytest.approx(1 / 3)
    assert report["cavity_shift1_over_kappa"] == pytest.approx(1 / 3)
