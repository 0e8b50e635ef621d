import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kppfront.grid import Grid
from kppfront.identities import (IDENTITY_TOL, TrigSum, consistency_errors, integration_by_parts,
                                 observed_orders, random_compact_grid_function, run_suite,
                                 summation_by_parts, unbalanced_difference, unbalanced_mean,
                                 upper_semicontinuity)
from kppfront.model import validate_kernel

seeds = st.integers(0, 2 ** 32 - 1)
steps = st.sampled_from([(0.05, 1), (0.1, 2), (0.2, 3), (0.1, 5)])


def data(seed, h):
    rng = np.random.default_rng(seed)
    grid = Grid(8.0, h, 2)
    return rng, grid, TrigSum.random(rng), random_compact_grid_function(grid, rng, 6.0)


@given(seeds, steps)
def test_unbalanced_mean(seed, hk):
    h, k = hk
    _, _, f, v = data(seed, h)
    err, rem, bound = unbalanced_mean(f, v, k * h)
    assert err <= IDENTITY_TOL
    assert rem <= bound


@given(seeds, steps)
def test_unbalanced_difference(seed, hk):
    h, k = hk
    _, _, f, v = data(seed, h)
    err, rem, bound = unbalanced_difference(f, v, k * h)
    assert err <= IDENTITY_TOL
    assert rem <= bound


@given(seeds, steps)
def test_integration_by_parts(seed, hk):
    h, k = hk
    _, _, f, v = data(seed, h)
    assert integration_by_parts(f, v, k * h) <= IDENTITY_TOL


@given(seeds, steps)
def test_summation_by_parts(seed, hk):
    h, k = hk
    rng, grid, _, v = data(seed, h)
    u = random_compact_grid_function(grid, rng, 6.0)
    assert summation_by_parts(u, v, k * h) <= 1e-13


@given(seeds, st.integers(1, 4), st.integers(1, 6))
def test_upper_semicontinuity(seed, k, steps_):
    a, b = upper_semicontinuity(np.random.default_rng(seed), k=k, h_steps=steps_)
    assert a <= b * (1 + IDENTITY_TOL)


def test_trig_sum_derivatives():
    f = TrigSum(np.array([1.0]), np.array([2.0]), np.array([0.0]))
    x = np.linspace(0, 1, 5)
    np.testing.assert_allclose(f(x, 1), 2 * np.cos(2 * x))
    np.testing.assert_allclose(f.taylor(2, x, 0.1), np.sin(2 * x + 0.2) - np.sin(2 * x) - 0.1 * f(x, 1))


def test_consistency_orders():
    hs = [0.2, 0.1, 0.05]
    assert np.all(observed_orders(hs, consistency_errors(validate_kernel([1.0]), hs)) >= 2 - 0.05)
    o = observed_orders(hs, consistency_errors(validate_kernel([4 / 3, -1 / 3]), hs))
    np.testing.assert_allclose(o, 4.0, atol=0.2)


def test_suite_passes():
    rows = run_suite(n_pairs=20, seed=3)
    assert all(r.passed for r in rows), [r.line() for r in rows if not r.passed]
    assert rows[0].line().startswith("PASS")
