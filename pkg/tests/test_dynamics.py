import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from photontrain.config import load_config
from photontrain.dynamics import (AtomState, RegimeWarning, analytic_single_pulse_flux,
                                  analytic_single_pulse_total, flux_fwhm_per_pulse,
                                  leakage_prediction, photons_per_pulse, simulate)
from photontrain.pulses import PulseTrain, SubpulseShape, integral_f


def scenario(preset="paper-d2", *overrides):
    return load_config(preset, list(overrides))


def test_no_pulses_is_static():
    sc = scenario("paper-d1", "n_subpulses=0")
    traj = simulate(sc.derived, sc.train, np.linspace(0, 10, 21))
    assert np.all(traj.p11 == 1) and np.all(traj.p22 == 0)
    assert not traj.flux.any() and not traj.n_out_cum.any()


def test_single_pulse_final_state():
    sc = scenario("paper-d2", "n_subpulses=1", "omega2_mhz=0")
    d = sc.derived
    traj = simulate(d, sc.train)
    p11_inf = math.exp(-d.alpha1 * 1.06447)
    assert traj.p11[-1] == pytest.approx(1.35e-4, rel=0.01)
    assert traj.p11[-1] == pytest.approx(p11_inf, rel=1e-4)
    assert traj.n_out_cum[-1] == pytest.approx(1 - traj.p11[-1], abs=1e-9)


def test_d2_train_efficiency():
    sc = scenario("paper-d2")
    traj = simulate(sc.derived, sc.train)
    assert traj.n_out_cum[-1] == pytest.approx(8.0, abs=1e-3 * 8)
    per = photons_per_pulse(traj, sc.train)
    assert per.size == 8
    assert per.sum() == pytest.approx(traj.n_out_cum[-1], abs=1e-9)
    assert np.all(np.abs(per - 1) < 2e-3)


def test_flux_pulse_width():
    sc = scenario("paper-d2")
    traj = simulate(sc.derived, sc.train)
    widths = flux_fwhm_per_pulse(traj, sc.train)
    assert np.all((widths > 0.3) & (widths < 0.7))


def test_coherence_stays_zero():
    sc = scenario("paper-d1")
    traj = simulate(sc.derived, sc.train)
    assert np.all(traj.coh21 == 0)


def test_coherence_decoupled_and_decays():
    sc = scenario("paper-d1", "gamma_42_mhz=1.5")
    d = sc.derived
    base = simulate(d, sc.train, init=AtomState(0.5, 0.5, 0.0))
    pert = simulate(d, sc.train, init=AtomState(0.5, 0.5, 0.3 + 0.1j))
    assert np.array_equal(base.p11, pert.p11)
    assert np.array_equal(base.p22, pert.p22)
    assert np.array_equal(base.n_out_cum, pert.n_out_cum)
    t = pert.times
    expo = 0.5 * ((d.alpha1 + d.Gamma1) * sc.train.cumulative1(t)
                  + (d.alpha2 + d.Gamma2) * sc.train.cumulative2(t))
    assert np.allclose(pert.coh21, (0.3 + 0.1j) * np.exp(-expo), rtol=1e-7, atol=1e-9)


def test_bookkeeping_during_train1_pulse():
    # compact pulses: inside a train-1 window f2 is exactly zero
    sc = scenario("paper-d2", "shape=sine-squared", "n_subpulses=3")
    traj = simulate(sc.derived, sc.train)
    for c in sc.train.centers1:
        lo, hi = c - 1.0, c + 1.0
        dn = np.diff(np.interp([lo, hi], traj.times, traj.n_out_cum))[0]
        dp22 = np.diff(np.interp([lo, hi], traj.times, traj.p22))[0]
        assert dn == pytest.approx(dp22, abs=1e-8)


def test_monotone_leakage():
    sc = scenario("paper-d1")
    traj = simulate(sc.derived, sc.train)
    assert np.all(np.diff(traj.pop_total) <= 1e-14)
    assert traj.pop_total[-1] < 1


def test_regime_warning_when_cavity_not_bad():
    sc = scenario("paper-d2", "omega1_mhz=20", "n_subpulses=1")
    with pytest.warns(RegimeWarning, match="G1/kappa"):
        simulate(sc.derived, sc.train)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["gaussian", "sine-squared", "flat-top"]), st.floats(0.3, 1.5),
       st.integers(1, 3), st.floats(2.0, 20.0), st.floats(0.0, 3.0))
def test_lossless_conservation(shape, T, n, omega, gamma_pump):
    sc = scenario("paper-d2", f"shape={shape}", f"duration_us={T!r}", f"n_subpulses={n}",
                  f"tau_d_us={3 * T!r}", "period_us=auto", f"omega1_mhz={omega!r}",
                  f"gamma_42_mhz={gamma_pump!r}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        traj = simulate(sc.derived, sc.train)
    assert np.max(np.abs(traj.pop_total - 1)) <= 10 * sc.rel_tol
    assert np.all(traj.flux >= 0)
    assert np.all(np.diff(traj.n_out_cum) >= 0)


def test_analytic_flux_limits():
    sc = scenario("paper-d2", "n_subpulses=1", "omega2_mhz=0")
    d = sc.derived
    assert analytic_single_pulse_flux(d, sc.train, -100.0) == 0.0
    shape = sc.train.shape
    total, _ = quad(lambda t: analytic_single_pulse_flux(d, shape, t), -5, 5,
                    epsabs=1e-13, epsrel=1e-13, limit=200)
    assert total == pytest.approx(1 - math.exp(-d.alpha1 * integral_f(shape)), abs=1e-10)
    strong = load_config("paper-d2", ["n_subpulses=1", "omega2_mhz=0", "omega1_mhz=60"]).derived
    assert analytic_single_pulse_total(strong, shape) == pytest.approx(1.0, abs=1e-12)


def test_analytic_flux_rejects_multi_pulse_and_losses():
    sc = scenario("paper-d2")
    with pytest.raises(ValueError):
        analytic_single_pulse_flux(sc.derived, sc.train, 0.0)
    lossy = scenario("paper-d1", "n_subpulses=1", "omega2_mhz=0")
    with pytest.raises(ValueError):
        analytic_single_pulse_flux(lossy.derived, lossy.train, 0.0)


def test_leakage_prediction_examples():
    d1 = scenario("paper-d1").derived
    assert leakage_prediction(scenario("paper-d2").derived, 50) == 1.0
    capacity = d1.alpha1 / d1.Gamma1_out
    assert capacity == pytest.approx(70.0)
    assert leakage_prediction(d1, round(capacity)) == pytest.approx(0.0, abs=1e-12)
    assert leakage_prediction(d1, 500) == 0.0
    assert leakage_prediction(d1, 7) == pytest.approx(0.9)
    with pytest.raises(ValueError):
        leakage_prediction(scenario("paper-d1", "omega2_mhz=5").derived, 2)


def test_leakage_prediction_matches_run_at_n8():
    sc = scenario("paper-d1")
    traj = simulate(sc.derived, sc.train)
    assert traj.pop_total[-1] == pytest.approx(leakage_prediction(sc.derived, 8), rel=0.10)


def test_atom_state_validation():
    with pytest.raises(ValueError):
        AtomState(-0.1, 0.5)
    with pytest.raises(ValueError):
        AtomState(0.7, 0.7)
    with pytest.raises(ValueError):
        AtomState(0.5, 0.5, 0.6)


def test_grid_starting_late_uses_given_initial_state():
    train = PulseTrain(SubpulseShape("gaussian", 1.0), n_subpulses=1, tau_d=3.0)
    sc = scenario("paper-d2")
    traj = simulate(sc.derived, train, np.linspace(10, 12, 5), AtomState(0.25, 0.75))
    assert np.allclose(traj.p11, 0.25) and np.allclose(traj.p22, 0.75)
