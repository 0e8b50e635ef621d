import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kppfront.errors import GridMismatch
from kppfront.grid import (Grid, GridFunction, Tail, centered_mean, centered_transport, derivative,
                           diffusion_symbol, discrete_diffusion, exp_symbol_diffusion, inner, l2_norm,
                           one_sided_difference, shift, symbol_minimum, sup_norm)
from kppfront.model import validate_kernel


def test_grid_contains_origin_and_ends():
    g = Grid(10.03, 0.1, 2)
    assert g.dx == pytest.approx(0.05)
    assert g.x[g.n_half] == 0.0
    assert g.x[0] == -g.half_length and g.x[-1] == g.half_length
    assert g.half_length >= 10.03


def test_index_offset_rejects_fractions():
    g = Grid(5.0, 0.1, 2)
    assert g.index_offset(0.3) == 6
    with pytest.raises(GridMismatch):
        g.index_offset(0.07)


def test_grid_function_shape_checked():
    with pytest.raises(GridMismatch):
        GridFunction(Grid(1.0, 0.1, 1), np.zeros(3))


def test_tails_extend_exponentials_exactly():
    g = Grid(5.0, 0.1, 1)
    f = GridFunction(g, np.exp(-0.7 * g.x), Tail.exponential(np.exp(3.5), 0.7, -5.0),
                     Tail.exponential(np.exp(-3.5), 0.7, 5.0))
    y = np.array([-7.3, -5.05, 5.2, 9.0])
    np.testing.assert_allclose(f(y), np.exp(-0.7 * y), rtol=1e-14)
    assert f.tail_mismatch() < 1e-14


def test_shift_uses_tails():
    g = Grid(2.0, 0.1, 1)
    f = GridFunction(g, np.ones(g.size), Tail.constant(1.0), Tail.constant(1.0))
    np.testing.assert_array_equal(shift(f, 3).values, 1.0)


@pytest.mark.parametrize("coeffs", [[1.0], [4 / 3, -1 / 3], [-0.5, 1.5]])
def test_diffusion_of_exponential_matches_symbol(coeffs):
    k = validate_kernel(coeffs)
    h, rate = 0.1, 0.6
    g = Grid(4.0, h, 2)
    L = g.half_length
    f = GridFunction(g, np.exp(-rate * g.x), Tail.exponential(np.exp(rate * L), rate, -L),
                     Tail.exponential(np.exp(-rate * L), rate, L))
    lap = discrete_diffusion(k, h, f)
    np.testing.assert_allclose(lap.values, exp_symbol_diffusion(k, h, rate) * f.values, rtol=1e-11)


def test_constants_are_annihilated_and_averaged():
    k = validate_kernel([4 / 3, -1 / 3])
    g = Grid(3.0, 0.1, 1)
    one = GridFunction(g, np.ones(g.size), Tail.constant(1.0), Tail.constant(1.0))
    assert sup_norm(discrete_diffusion(k, 0.1, one)) < 1e-12
    assert sup_norm(centered_transport(k, 0.1, one)) < 1e-12
    np.testing.assert_allclose(centered_mean(k, 0.1, one).values, 1.0)


def test_transport_approximates_derivative():
    k = validate_kernel([1.0])
    h = 0.01
    g = Grid(3.0, h, 1)
    f = GridFunction(g, np.sin(g.x))
    t = centered_transport(k, h, f).values[5:-5]
    np.testing.assert_allclose(t, np.cos(g.x[5:-5]), atol=h ** 2)


@pytest.mark.parametrize("n", [1, 2])
def test_eighth_order_derivative(n):
    g = Grid(3.0, 0.05, 1)
    f = GridFunction(g, np.sin(g.x))
    d = derivative(f, n=n).values[10:-10]
    exact = np.cos(g.x) if n == 1 else -np.sin(g.x)
    np.testing.assert_allclose(d, exact[10:-10], atol=1e-9)


def test_one_sided_differences():
    g = Grid(2.0, 0.1, 1)
    f = GridFunction(g, g.x ** 2)
    up = one_sided_difference(f, 0.2, "up").values[:-2]
    np.testing.assert_allclose(up, 2 * g.x[:-2] + 0.2, atol=1e-12)
    with pytest.raises(ValueError):
        one_sided_difference(f, 0.2, "sideways")


def test_symbol_sign_of_sign_changing_kernel():
    h = 0.1
    assert symbol_minimum(validate_kernel([1.0]), h) == pytest.approx(-4 / h ** 2)
    s = diffusion_symbol(validate_kernel([-0.5, 1.5]), h, np.pi / h)
    assert s == pytest.approx(2 / h ** 2)


@given(st.lists(st.floats(-5, 5), min_size=5, max_size=5), st.lists(st.floats(-5, 5), min_size=5, max_size=5))
def test_inner_product_symmetric_and_bounded(a, b):
    g = Grid(0.2, 0.1, 1)
    f, k = GridFunction(g, np.array(a)), GridFunction(g, np.array(b))
    assert inner(f, k) == pytest.approx(inner(k, f))
    assert abs(inner(f, k)) <= l2_norm(f) * l2_norm(k) + 1e-12


def test_grid_function_arithmetic_keeps_tails():
    g = Grid(1.0, 0.5, 1)
    f = GridFunction(g, np.ones(g.size), Tail.constant(2.0), Tail.exponential(1.0, 1.0, 1.0))
    h = (f * 3.0) - f
    assert h.left_tail(-5.0) == pytest.approx(4.0)
    assert h.right_tail(2.0) == pytest.approx(2.0 * np.exp(-1.0))
    with pytest.raises(GridMismatch):
        f + GridFunction(Grid(1.0, 0.25, 1), np.zeros(9))
