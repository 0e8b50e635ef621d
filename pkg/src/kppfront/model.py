"""Reaction nonlinearity, diffusion kernel and Taylor remainders."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .errors import (
    EmptyKernel,
    NotConcave,
    NotNormalized,
    ValidationError,
    WrongSlopeSign,
    ZeroMismatch,
)

RealFunc = Callable[[np.ndarray], np.ndarray]

ZERO_TOL = 1e-14
CONCAVITY_TOL = 1e-12
# looser bound when g'' itself comes from finite differences (noise ~ eps/step^2)
CONCAVITY_TOL_NUMERIC = 1e-6
CONCAVITY_POINTS = 10_000
FD_STEP = 1e-4
NORMALIZATION_TOL = 1e-12
RHO_FLOOR = 1e-3


def _central_difference(f: RealFunc, order: int, step: float = FD_STEP) -> RealFunc:
    """Fourth-order central difference for derivative ``order`` in 1..3."""
    s = step

    if order == 1:
        def df(x):
            x = np.asarray(x, dtype=float)
            return (-f(x + 2 * s) + 8 * f(x + s) - 8 * f(x - s) + f(x - 2 * s)) / (12 * s)
    elif order == 2:
        def df(x):
            x = np.asarray(x, dtype=float)
            return (-f(x + 2 * s) + 16 * f(x + s) - 30 * f(x) + 16 * f(x - s)
                    - f(x - 2 * s)) / (12 * s * s)
    elif order == 3:
        def df(x):
            x = np.asarray(x, dtype=float)
            return (-f(x + 3 * s) + 8 * f(x + 2 * s) - 13 * f(x + s) + 13 * f(x - s)
                    - 8 * f(x - 2 * s) + f(x - 3 * s)) / (8 * s ** 3)
    else:
        raise ValueError(f"unsupported derivative order {order}")
    return df


@dataclass(frozen=True)
class Nonlinearity:
    """Validated KPP reaction term with derivative oracles.

    Use :func:`validate_nonlinearity` (or :func:`named_nonlinearity`) rather
    than constructing this directly.
    """

    evaluate: RealFunc
    derivative_1: RealFunc
    derivative_2: RealFunc
    derivative_3: RealFunc
    gprime0: float
    gprime1: float
    name: str = "custom"
    analytic: bool = True

    def __call__(self, u):
        return self.evaluate(u)

    def derivative(self, order: int) -> RealFunc:
        return (self.evaluate, self.derivative_1, self.derivative_2,
                self.derivative_3)[order]


def validate_nonlinearity(
    evaluate: RealFunc,
    derivative_1: RealFunc | None = None,
    derivative_2: RealFunc | None = None,
    derivative_3: RealFunc | None = None,
    *,
    name: str = "custom",
) -> Nonlinearity:
    """Check the monostable KPP assumptions and return a :class:`Nonlinearity`.

    Missing derivatives are replaced by fourth-order central differences with
    step ``1e-4``.

    Raises
    ------
    ZeroMismatch
        ``g(0)`` or ``g(1)`` differs from zero by more than ``1e-14``.
    WrongSlopeSign
        ``g'(0) <= 0`` or ``g'(1) >= 0``.
    NotConcave
        ``g''`` exceeds the concavity tolerance somewhere on ``[0, 1]``.
    """
    def vec(f):
        return lambda u: np.asarray(f(np.asarray(u, dtype=float)), dtype=float) + 0.0 * np.asarray(u, dtype=float)

    g = vec(evaluate)
    analytic = derivative_2 is not None
    d1 = vec(derivative_1) if derivative_1 is not None else _central_difference(g, 1)
    d2 = vec(derivative_2) if derivative_2 is not None else _central_difference(g, 2)
    d3 = vec(derivative_3) if derivative_3 is not None else _central_difference(g, 3)

    g0, g1 = float(g(0.0)), float(g(1.0))
    if abs(g0) > ZERO_TOL or abs(g1) > ZERO_TOL:
        raise ZeroMismatch(f"g(0)={g0:.3e}, g(1)={g1:.3e}; both must vanish")
    gp0, gp1 = float(d1(0.0)), float(d1(1.0))
    if not gp1 < 0.0 < gp0:
        raise WrongSlopeSign(f"need g'(1) < 0 < g'(0), got g'(0)={gp0:.6g}, g'(1)={gp1:.6g}")
    u = np.linspace(0.0, 1.0, CONCAVITY_POINTS)
    tol = CONCAVITY_TOL if analytic else CONCAVITY_TOL_NUMERIC
    curvature = d2(u)
    worst = int(np.argmax(curvature))
    if curvature[worst] > tol:
        raise NotConcave(f"g''({u[worst]:.4f}) = {curvature[worst]:.3e} > {tol:g}")
    return Nonlinearity(g, d1, d2, d3, gp0, gp1, name=name, analytic=analytic)


def polynomial_nonlinearity(coefficients: Sequence[float], name: str | None = None) -> Nonlinearity:
    """Nonlinearity ``g(u) = sum_i coefficients[i] * u**i`` (ascending powers)."""
    p = Polynomial(np.asarray(coefficients, dtype=float))
    d = [p.deriv(k) for k in (1, 2, 3)]
    return validate_nonlinearity(p, d[0], d[1], d[2],
                                 name=name or f"poly{list(map(float, coefficients))}")


NAMED_NONLINEARITIES = {
    "fisher": (0.0, 1.0, -1.0),      # u(1-u)
    "cubic": (0.0, 1.0, 0.0, -1.0),  # u - u^3
}


def named_nonlinearity(name: str) -> Nonlinearity:
    try:
        coeffs = NAMED_NONLINEARITIES[name]
    except KeyError:
        raise ValidationError(f"unknown nonlinearity {name!r}; "
                              f"choose from {sorted(NAMED_NONLINEARITIES)}") from None
    return polynomial_nonlinearity(coeffs, name=name)


def nonlinearity_from_spec(spec) -> Nonlinearity:
    """Build from a config entry: a name string or a coefficient list."""
    if isinstance(spec, str):
        return named_nonlinearity(spec)
    if isinstance(spec, (list, tuple)):
        return polynomial_nonlinearity(spec)
    raise ValidationError(f"nonlinearity spec must be a name or coefficient list, got {spec!r}")


@dataclass(frozen=True)
class Kernel:
    """Coefficients ``(a_1, ..., a_K)`` of the long-range second difference.

    ``|a_k| <= decay_C * decay_rho**k`` holds for every stored k.
    """

    coefficients: tuple[float, ...]
    decay_C: float
    decay_rho: float
    sum: float
    name: str = field(default="", compare=False)

    @property
    def K(self) -> int:
        return len(self.coefficients)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.coefficients, dtype=float)

    @property
    def ks(self) -> np.ndarray:
        return np.arange(1, self.K + 1)

    @property
    def second_moment(self) -> float:
        """``sum_k a_k k^2`` (drives the O(h^2) correction of the decay rate)."""
        return float(np.sum(self.array * self.ks ** 2))

    @property
    def kernel_id(self) -> str:
        return self.name or "a=(" + ",".join(f"{a:.6g}" for a in self.coefficients) + ")"


def validate_kernel(coeffs: Sequence[float], name: str = "") -> Kernel:
    """Validate a finite kernel and fit a geometric decay certificate.

    ``rho`` comes from a least-squares fit of ``log|a_k|`` against ``k`` over
    the nonzero entries; it is clipped to ``1/2`` when the fit does not decay
    (singletons, or kernels whose largest entry is not the first) and floored
    at ``1e-3``. ``C`` is
    then the smallest constant making the bound hold for every entry.
    """
    a = np.asarray(list(coeffs), dtype=float)
    if a.ndim != 1 or a.size == 0:
        raise EmptyKernel("kernel needs at least one coefficient")
    if not np.all(np.isfinite(a)):
        raise ValidationError("kernel coefficients must be finite")
    total = float(math.fsum(a))
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise NotNormalized(f"sum of kernel coefficients is {total!r}, must be 1")
    k = np.arange(1, a.size + 1)
    nz = a != 0.0
    rho = 0.5
    if np.count_nonzero(nz) >= 2:
        slope = np.polyfit(k[nz], np.log(np.abs(a[nz])), 1)[0]
        if slope < 0.0:
            rho = max(float(np.exp(slope)), RHO_FLOOR)
    # log space: rho**k underflows for long, fast-decaying kernels
    C = float(np.exp(np.max(np.log(np.abs(a[nz])) - k[nz] * math.log(rho))))
    return Kernel(tuple(float(x) for x in a), C, rho, total, name=name)


def truncate_kernel(coefficient: Callable[[int], float], C: float, rho: float,
                    tail_tol: float = 1e-14, name: str = "") -> Kernel:
    """Cut an infinite geometrically decaying kernel and renormalize.

    Keeps ``a_1..a_K`` with ``K`` the first index whose tail bound
    ``C rho^K / (1 - rho)`` is below ``tail_tol``; the kept entries are
    rescaled so that they sum to one.
    """
    if not 0.0 < rho < 1.0 or C <= 0.0:
        raise ValidationError("need C > 0 and 0 < rho < 1")
    K = 1
    while C * rho ** K / (1.0 - rho) >= tail_tol:
        K += 1
    a = np.array([coefficient(k) for k in range(1, K + 1)], dtype=float)
    total = math.fsum(a)
    if total <= 0.0:
        raise NotNormalized("truncated kernel has non-positive sum")
    return validate_kernel(a / total, name=name)


def taylor_remainder(f, j: int, a, b, derivatives: Sequence[RealFunc] | None = None):
    """``f(a+b) - sum_{k<j} f^(k)(a) b^k / k!`` by direct evaluation.

    ``f`` is a :class:`Nonlinearity` (derivatives up to order 3 available) or
    a plain callable; for a plain callable and ``j >= 2`` pass
    ``derivatives=[f', f'', ...]``.
    """
    if j < 1:
        raise ValueError("Taylor remainder order must be >= 1")
    if isinstance(f, Nonlinearity):
        oracles = [f.derivative(i) for i in range(4)]
    else:
        oracles = [f] + list(derivatives or [])
    if len(oracles) < j:
        raise ValueError(f"order {j} remainder needs {j - 1} derivatives, got {len(oracles) - 1}")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = oracles[0](a + b) - oracles[0](a)
    bk = np.ones_like(b)
    for order in range(1, j):
        bk = bk * b / order
        out = out - oracles[order](a) * bk
    return out
