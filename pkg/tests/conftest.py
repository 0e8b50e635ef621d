import math

import numpy as np
import pytest
from hypothesis import settings

from kppfront.front import prepare
from kppfront.model import named_nonlinearity, validate_kernel

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")

FISHER_C = 3.0
KERNELS = {
    "nearest": [1.0],
    "fourth_order": [4.0 / 3.0, -1.0 / 3.0],
    "sign_changing": [-0.5, 1.5],
}


@pytest.fixture(scope="session")
def fisher():
    return named_nonlinearity("fisher")


@pytest.fixture(scope="session")
def cubic():
    return named_nonlinearity("cubic")


@pytest.fixture(scope="session")
def kernels():
    return {name: validate_kernel(a, name=name) for name, a in KERNELS.items()}


@pytest.fixture(scope="session")
def fisher_config(fisher):
    """Continuum front, decomposition, theta and weight for Fisher at c = 3."""
    return prepare(fisher, FISHER_C)


@pytest.fixture(scope="session")
def kappa0_fisher():
    return (3.0 - math.sqrt(5.0)) / 2.0


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# criterion number -> list of (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, list] = {}


def record(criterion: int, passed: bool, detail: str) -> None:
    ACCEPTANCE.setdefault(criterion, []).append((bool(passed), detail))
    print(f"criterion {criterion}: {'PASS' if passed else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[n]
        ok = all(p for p, _ in parts)
        detail = "; ".join(d for _, d in parts)
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
