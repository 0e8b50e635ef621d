import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import brentq

from kppfront.errors import AmplitudeTooLarge, LeftBall, NotContracting, ResidualGrowth
from kppfront.front import (FarField, dispersion, kappa_expansion_coefficient, picard_solve,
                            profile_residual, quadratic_term, residual, residual_decay_fit,
                            solve_decay_rate, solve_front, spectral_probe)
from kppfront.grid import Grid, GridFunction, l2_norm
from kppfront.io import read_csv
from kppfront.linear import OperatorAssembly, assemble_direct
import scipy.sparse as sp

C = 3.0


@pytest.fixture(scope="module")
def solution(fisher_config, kernels):
    return solve_front(fisher_config, kernels["nearest"], 0.05)


def brentq_kappa(h):
    G = lambda k: 1.0 - C * k + 4.0 * math.sinh(k * h / 2) ** 2 / h ** 2
    return brentq(G, 0.2, 0.6, xtol=1e-16)


@pytest.mark.parametrize("h", [0.1, 0.05, 0.025])
def test_decay_rate_matches_bracketing_oracle(kernels, h):
    sol = solve_decay_rate(kernels["nearest"], h, C, 1.0)
    assert sol.kappa_h == pytest.approx(brentq_kappa(h), abs=1e-14)
    assert abs(sol.residual_G) <= 1e-13


def test_decay_rate_at_zero_spacing_limit(kernels, kappa0_fisher):
    sol = solve_decay_rate(kernels["nearest"], 1e-4, C, 1.0)
    assert sol.kappa_h - kappa0_fisher == pytest.approx(7.933e-4 * 1e-8, rel=1e-2)


def test_expansion_coefficients(kernels):
    k0 = (3 - math.sqrt(5)) / 2
    assert kappa_expansion_coefficient(kernels["nearest"], C, 1.0) == pytest.approx(k0 ** 4 / (12 * (C - 2 * k0)))
    assert kappa_expansion_coefficient(kernels["nearest"], C, 1.0) == pytest.approx(7.93e-4, rel=1e-3)
    assert kappa_expansion_coefficient(kernels["fourth_order"], C, 1.0) == pytest.approx(0.0, abs=1e-18)


@given(st.floats(0.01, 0.3))
def test_sign_changing_kernel_rate_is_root(h):
    from kppfront.model import validate_kernel
    k = validate_kernel([-0.5, 1.5])
    sol = solve_decay_rate(k, h, C, 1.0)
    assert abs(dispersion(k, h, C, 1.0, sol.kappa_h)) <= 1e-13


def test_far_field_matches_front_up_to_rate(fisher_config):
    far = FarField(fisher_config.decomposition, fisher_config.front.kappa0)
    x = np.linspace(-20, 20, 81)
    np.testing.assert_allclose(far.evaluate(x), fisher_config.front.evaluate(x), atol=1e-14)
    # phi_inf - E is bounded, although E blows up on the left
    assert np.all(np.abs(far.localized(np.linspace(0, 40, 81))) < 2)


def test_residual_rejects_wrong_rate(fisher_config, kernels):
    far = FarField(fisher_config.decomposition, fisher_config.front.kappa0 * 1.01)
    grid = Grid(20.0, 0.1, 2)
    with pytest.raises(ResidualGrowth):
        residual(far, fisher_config.weight, kernels["nearest"], 0.1, C, fisher_config.g, grid)


def test_residual_small_and_decaying(fisher_config, kernels):
    h = 0.05
    k = kernels["nearest"]
    far = FarField(fisher_config.decomposition, solve_decay_rate(k, h, C, 1.0).kappa_h)
    grid = Grid(fisher_config.front.profile.grid.half_length, h, 2)
    R = residual(far, fisher_config.weight, k, h, C, fisher_config.g, grid)
    assert l2_norm(R) < 1e-4
    eta, const = residual_decay_fit(R)
    assert eta > 0.1 and np.isfinite(const)


def test_quadratic_term(fisher_config):
    grid = Grid(5.0, 0.1, 2)
    phi = GridFunction(grid, fisher_config.front.evaluate(grid.x))
    w = fisher_config.weight
    v = 0.01 * np.ones(grid.size)
    # Fisher: T2(phi, s) = -s^2, so Q = -w v^2
    np.testing.assert_allclose(quadratic_term(v, phi, w, fisher_config.g).values, -w(grid.x) * v ** 2, atol=1e-17)
    with pytest.raises(AmplitudeTooLarge):
        quadratic_term(2 * v / 0.01, phi, w, fisher_config.g)


def _identity_system(n, scale):
    grid = Grid(float(n // 2), 1.0, 1)
    return OperatorAssembly(sp.identity(grid.size, format="csr") * -1.0, grid, "direct"), grid


def test_picard_linear_contraction():
    L, grid = _identity_system(10, 1.0)
    R = np.full(grid.size, 0.01)
    v, diag = picard_solve(L, R, lambda u: 0.5 * u)
    # v = R + 0.5 v  =>  v = 2 R
    np.testing.assert_allclose(v.values, 0.02, atol=1e-12)
    assert diag.contraction_ratio == pytest.approx(0.5, rel=1e-6)


def test_picard_failures():
    L, grid = _identity_system(10, 1.0)
    with pytest.raises(LeftBall):
        picard_solve(L, np.full(grid.size, 0.5), lambda u: 0 * u)
    with pytest.raises(NotContracting):
        picard_solve(L, np.full(grid.size, 1e-3), lambda u: 1.5 * u, ball_radius=1e6)


def test_end_to_end_nearest_neighbour(solution):
    assert solution.picard_iterations <= 5
    assert solution.contraction_ratio < 1
    assert solution.profile_residual_norm <= 1e-8
    assert solution.kappa_h == pytest.approx(brentq_kappa(0.05), abs=1e-14)
    v = solution.phi_h.values
    assert abs(v[0] - 1) < 1e-6 and abs(v[-1]) < 1e-6
    assert np.max(np.abs(solution.v.values)) < 1e-4


def test_profile_residual_of_reconstruction(solution, fisher_config, kernels):
    res = profile_residual(solution.phi_h, kernels["nearest"], 0.05, C, fisher_config.g)
    assert res < 1e-6
    # the continuum front is only O(h^2) accurate on the lattice
    cont = profile_residual(solution.phi_infinity, kernels["nearest"], 0.05, C, fisher_config.g)
    assert cont > 100 * solution.profile_residual_norm


def test_solution_files(solution, tmp_path):
    solution.write(tmp_path / "f.csv", tmp_path / "f.json")
    data = read_csv(tmp_path / "f.csv")
    np.testing.assert_array_equal(data["phi_h"], solution.phi_h.values)
    summary = json.loads((tmp_path / "f.json").read_text())
    assert summary["picard_iterations"] == solution.picard_iterations


def test_spectral_probe_positive(fisher_config, kernels):
    rep = spectral_probe(fisher_config, kernels["sign_changing"], 0.1)
    assert rep.lambda_h > 0 and rep.lambda_h_adjoint > 0 and rep.numerical_range_margin > 0
