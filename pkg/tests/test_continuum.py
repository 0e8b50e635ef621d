import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kppfront.continuum import (choose_theta, decompose_front, fast_decay_rate, indicator_minus,
                                indicator_plus, left_decay_rate, smooth_step, solve_continuous_front,
                                spatial_decay_rate)
from kppfront.errors import CriticalOrSubcriticalSpeed, NoAdmissibleTheta

C_EXACT = 5.0 / math.sqrt(6.0)


def exact_fisher_front(x):
    """Closed-form Fisher front at c = 5/sqrt(6), normalized to 1/2 at 0."""
    return 1.0 / (1.0 + (math.sqrt(2.0) - 1.0) * np.exp(x / math.sqrt(6.0))) ** 2


@pytest.fixture(scope="module")
def exact_case(fisher):
    return solve_continuous_front(fisher, C_EXACT, half_length=40.0, step=0.05)


def test_decay_rates(kappa0_fisher):
    assert spatial_decay_rate(3.0, 1.0) == pytest.approx(kappa0_fisher, abs=1e-15)
    assert fast_decay_rate(3.0, 1.0) == pytest.approx((3 + math.sqrt(5)) / 2)
    assert left_decay_rate(3.0, -1.0) == pytest.approx((-3 + math.sqrt(13)) / 2)
    with pytest.raises(CriticalOrSubcriticalSpeed):
        spatial_decay_rate(2.0, 1.0)


@given(st.floats(2.01, 20.0), st.floats(0.1, 5.0))
def test_decay_rate_is_root(c, gp0):
    if c * c <= 4 * gp0 * 1.0001:
        return
    k = spatial_decay_rate(c, gp0)
    assert abs(k * k - c * k + gp0) <= 1e-12 * max(1.0, c * k)
    assert 0 < k < c / 2


def test_exact_front(exact_case):
    x = exact_case.profile.grid.x
    assert np.max(np.abs(exact_case.profile.values - exact_fisher_front(x))) < 1e-6
    assert abs(exact_case.kappa0_fitted - 2 / math.sqrt(6)) < 1e-6
    assert exact_case.evaluate(0.0) == pytest.approx(0.5, abs=1e-14)


def test_front_derivatives(exact_case):
    x = np.linspace(-5, 5, 21)
    s = math.sqrt(2.0) - 1.0
    e = np.exp(x / math.sqrt(6.0))
    d1 = -2 * s * e / math.sqrt(6) / (1 + s * e) ** 3
    np.testing.assert_allclose(exact_case.evaluate(x, 1), d1, atol=1e-8)


def test_front_is_monotone_and_connects(fisher_config):
    v = fisher_config.front.profile.values
    assert np.all(np.diff(v) <= 0)
    assert abs(v[0] - 1) < 1e-10 and abs(v[-1]) < 1e-10


def test_cubic_front(cubic):
    f = solve_continuous_front(cubic, 2.5, half_length=30.0, step=0.05)
    assert f.kappa0_fitted == pytest.approx(spatial_decay_rate(2.5, 1.0), abs=1e-6)


def test_partition_of_unity():
    x = np.linspace(-1.5, 1.5, 301)
    np.testing.assert_allclose(indicator_minus(x) + indicator_plus(x), 1.0, atol=0)
    assert smooth_step(np.array([0.0]))[0] == 0.5
    p, dp, ddp = smooth_step(x, 2)
    assert np.all(dp <= 0)
    fd = np.gradient(p, x)
    np.testing.assert_allclose(dp[5:-5], fd[5:-5], atol=2e-3)


def test_decomposition_certificates(fisher_config):
    dec = fisher_config.decomposition
    assert all(np.isfinite(v) for v in dec.certificates.values())
    x = np.linspace(-10, 10, 41)
    np.testing.assert_allclose(dec.reconstruct(x), fisher_config.front.evaluate(x), atol=1e-14)


def test_theta_choice_frozen(kappa0_fisher):
    delta = kappa0_fisher / 2
    t = choose_theta(3.0, 1.0, kappa0_fisher, delta)
    assert t.theta == pytest.approx(kappa0_fisher + delta / 4, abs=1e-15)
    assert t.theta == pytest.approx(0.4297118, abs=1e-7)
    assert t.margin_spectral == pytest.approx(-(t.theta ** 2 - 3 * t.theta + 1))
    assert t.margin_transport == pytest.approx(3 - 2 * t.theta)
    with pytest.raises(NoAdmissibleTheta):
        choose_theta(3.0, 1.0, kappa0_fisher, 0.0)


def test_fisher_configuration_values(fisher_config, kappa0_fisher):
    assert fisher_config.front.kappa0 == pytest.approx(kappa0_fisher, abs=1e-14)
    assert fisher_config.decomposition.delta == pytest.approx(kappa0_fisher / 2, abs=1e-12)
    assert fisher_config.theta.margin_spectral == pytest.approx(0.104483, abs=1e-6)
