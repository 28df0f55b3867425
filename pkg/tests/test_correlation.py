import numpy as np
import pytest
from scipy.signal import find_peaks

from photontrain.config import load_config
from photontrain.correlation import g2_grid, step_propagators
from photontrain.dynamics import AtomState, default_time_grid, simulate


def run(*overrides, ppf=40, **kw):
    sc = load_config("paper-d2", list(overrides))
    traj = simulate(sc.derived, sc.train, default_time_grid(sc.train, ppf))
    return sc, traj, g2_grid(sc.derived, sc.train, traj, **kw)


def test_zero_delay_formula():
    sc, traj, corr = run()
    d = sc.derived
    expected = np.trapezoid(d.alpha1 * d.alpha2 * traj.f1 * traj.f2 * traj.pop_total, traj.times)
    assert corr.g2_of_tau[0] == pytest.approx(expected, rel=1e-12)


def test_compact_pulses_give_exact_zero_at_zero_delay():
    _, _, corr = run("shape=sine-squared")
    assert corr.g2_of_tau[0] == 0.0
    assert corr.g2_of_tau.max() > 0


def test_nonnegative_and_normalized():
    _, _, corr = run("n_subpulses=2")
    assert np.all(corr.g2_of_tau >= 0)
    assert corr.g2_normalized.max() == pytest.approx(1.0)


def test_peak_positions_and_decay():
    sc, _, corr = run()
    idx, _ = find_peaks(corr.g2_of_tau, prominence=1e-3 * corr.g2_of_tau.max())
    assert np.allclose(corr.taus[idx], sc.train.tau_d * np.arange(1, 8), atol=0.05)
    assert np.all(np.diff(corr.g2_of_tau[idx]) < 0)


def test_propagators_compose():
    sc = load_config("paper-d1")
    starts = np.array([0.0, 0.5])
    M = step_propagators(sc.derived, sc.train, starts, 0.5)
    M_full = step_propagators(sc.derived, sc.train, starts[:1], 1.0)[0]
    assert np.allclose(M[1] @ M[0], M_full, rtol=1e-8, atol=1e-12)


def pair_oracle(sc, traj):
    """Expected ordered photon pairs by conditional re-simulation after each emission time."""
    d, train = sc.derived, sc.train
    end = traj.times[-1]
    rows = np.zeros(traj.times.size)
    for i, t in enumerate(traj.times[:-1]):
        if traj.flux[i] <= 0:
            continue
        z1 = d.alpha2 * train.f2(t) * traj.p22[i]
        z2 = d.alpha1 * train.f1(t) * traj.p11[i]
        cond = simulate(d, train, np.array([t, end]), AtomState(z1 / (z1 + z2), z2 / (z1 + z2)))
        rows[i] = traj.flux[i] * cond.n_out_cum[-1]
    return np.trapezoid(rows, traj.times)


def test_sum_rule_against_pair_oracle():
    sc, traj, corr = run("n_subpulses=1", "omega1_mhz=6", "omega2_mhz=6", ppf=20)
    pairs = np.trapezoid(corr.g2_of_tau, corr.taus)
    assert pairs == pytest.approx(pair_oracle(sc, traj), rel=0.01)
    assert 0 < pairs < 1


def test_grid_convergence():
    _, _, coarse = run("n_subpulses=2", ppf=40)
    _, _, fine = run("n_subpulses=2", ppf=80)
    idx, _ = find_peaks(coarse.g2_of_tau, prominence=1e-3 * coarse.g2_of_tau.max())
    fine_at = np.interp(coarse.taus[idx], fine.taus, fine.g2_of_tau)
    assert np.all(np.abs(fine_at / coarse.g2_of_tau[idx] - 1) < 5e-3)


def test_loss_switch():
    sc = load_config("paper-d1", ["n_subpulses=2"])
    traj = simulate(sc.derived, sc.train)
    with_loss = g2_grid(sc.derived, sc.train, traj)
    without = g2_grid(sc.derived, sc.train, traj, include_loss=False)
    assert with_loss.g2_of_tau[0] == without.g2_of_tau[0]
    assert np.all(without.g2_of_tau >= with_loss.g2_of_tau - 1e-12)
    assert without.g2_of_tau.max() > with_loss.g2_of_tau.max()


def test_two_time_table():
    _, traj, corr = run("n_subpulses=1", keep_two_time=True, taus=[0.0, 3.0])
    assert corr.two_time.shape == (traj.times.size, 2)
    assert np.trapezoid(corr.two_time[:, 1], traj.times) == pytest.approx(corr.g2_of_tau[1])


@pytest.mark.parametrize("taus", [[-0.025], [0.01]])
def test_bad_delays(taus):
    sc = load_config("paper-d2", ["n_subpulses=1"])
    traj = simulate(sc.derived, sc.train)
    with pytest.raises(ValueError):
        g2_grid(sc.derived, sc.train, traj, taus)


def test_nonuniform_grid_rejected():
    sc = load_config("paper-d2", ["n_subpulses=1"])
    traj = simulate(sc.derived, sc.train, np.array([-5.0, -1.0, 0.0, 3.0, 8.0]))
    with pytest.raises(ValueError):
        g2_grid(sc.derived, sc.train, traj, [0.0])
