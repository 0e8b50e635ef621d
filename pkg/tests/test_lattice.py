import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kppfront.errors import BlowUp, PoorFit, StabilityCapViolated, ValidationError
from kppfront.lattice import (LatticeState, integrate, level_crossing, measure_speed, rhs,
                              simulate_profile, stability_cap)


@pytest.mark.parametrize("value", [0.0, 1.0])
def test_equilibria_are_stationary(fisher, kernels, value):
    u = np.full(41, value)
    for k in kernels.values():
        np.testing.assert_array_equal(rhs(u, k, 0.1, fisher), 0.0)


def test_rhs_needs_enough_sites(fisher, kernels):
    with pytest.raises(ValidationError):
        rhs(np.zeros(3), kernels["sign_changing"], 0.1, fisher)


def test_stability_cap_nearest(kernels):
    h = 0.1
    assert stability_cap(kernels["nearest"], h) == pytest.approx(0.8 * h ** 2 / 4)


def test_cap_enforced(fisher, kernels):
    state = LatticeState(np.zeros(21), 0.1)
    with pytest.raises(StabilityCapViolated):
        integrate(state, kernels["nearest"], fisher, dt=0.01, T=1.0)


@given(st.floats(-5, 5), st.floats(0.2, 2.0))
def test_level_crossing_of_ramp(x0, width):
    x = np.linspace(-10, 10, 401)
    u = np.clip(0.5 - (x - x0) / width, 0, 1)
    assert level_crossing(u, x) == pytest.approx(x0, abs=1e-9)


def test_level_crossing_absent():
    assert np.isnan(level_crossing(np.ones(10), np.arange(10.0)))


def test_measure_speed():
    t = np.linspace(0, 10, 201)
    speed, r2 = measure_speed(t, 2.0 * t + 1.0)
    assert speed == pytest.approx(2.0) and r2 == pytest.approx(1.0)
    assert measure_speed(t, np.full_like(t, np.nan)) == (0.0, 1.0)
    assert measure_speed(t, np.full_like(t, 3.0)) == (0.0, 1.0)
    with pytest.raises(PoorFit):
        measure_speed(t[:10], t[:10])
    with pytest.raises(PoorFit):
        measure_speed(t, np.sin(7 * t))


def test_rk4_logistic_ode(fisher, kernels):
    """Spatially constant data follow u' = u(1 - u) at fourth order."""
    u0 = 0.1
    state = LatticeState(np.full(11, u0), 0.5)
    traj = integrate(state, kernels["nearest"], fisher, dt=0.01, T=2.0)
    exact = u0 * np.exp(2.0) / (1 - u0 + u0 * np.exp(2.0))
    np.testing.assert_allclose(traj.final.u, exact, rtol=1e-9)


def test_pulled_front_speed(fisher, kernels):
    """A step spreads at roughly the minimal speed 2; the guard never trips."""
    x = (np.arange(401) - 200) * 0.25
    state = LatticeState((x < 0).astype(float), 0.25)
    cap = stability_cap(kernels["nearest"], 0.25)
    traj = integrate(state, kernels["nearest"], fisher, dt=cap / 2, T=20.0, n_snapshots=3)
    assert traj.snapshots.shape == (3, 401)
    speed, _ = measure_speed(traj.times, traj.track, burn_in=10.0, min_r2=0.99)
    assert 1.6 < speed < 2.05


def test_simulate_exact_continuum_front(fisher, kernels, tmp_path):
    """The continuum front is a lattice wave up to O(h^2); the speed is close to c."""
    c = 5 / np.sqrt(6)
    s = np.sqrt(2) - 1
    prof = lambda y: 1 / (1 + s * np.exp(np.asarray(y) / np.sqrt(6))) ** 2
    rep, traj = simulate_profile(prof, kernels["nearest"], fisher, 0.2, c, T=4.0, margin=20.0)
    assert rep.relative_speed_error < 1e-2
    assert rep.shape_error < 1e-2
    rep.write(tmp_path / "s.json")
    assert json.loads((tmp_path / "s.json").read_text())["J"] == rep.J
    traj.write_snapshots(tmp_path / "snap.csv", stride=5)
    assert (tmp_path / "snap.csv").read_text().startswith("t,x,u\n")


def test_sign_changing_kernel_blows_up(fisher, kernels):
    x = (np.arange(201) - 100) * 0.1
    rng = np.random.default_rng(0)
    u = 1 / (1 + np.exp(x)) + 1e-10 * rng.standard_normal(x.size)
    cap = stability_cap(kernels["sign_changing"], 0.1)
    T = 5.0
    dt = T / np.ceil(T / cap)
    with pytest.raises(BlowUp):
        integrate(LatticeState(u, 0.1), kernels["sign_changing"], fisher, dt=dt, T=T)
