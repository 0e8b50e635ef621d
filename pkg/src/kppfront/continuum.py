"""Continuous KPP front, its far-field decomposition, and the weight rate.

The profile solves ``-c phi' = phi'' + g(phi)`` with ``phi(-inf) = 1`` and
``phi(+inf) = 0``. It is computed by shooting along the unstable manifold of
``(1, 0)``; the target ``(0, 0)`` is a stable node for supercritical speeds,
so forward integration is well conditioned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import expit

from .errors import (
    CriticalOrSubcriticalSpeed,
    DecayCertificateFailure,
    NoAdmissibleTheta,
    NonMonotoneProfile,
    TailFitFailure,
)
from .grid import Grid, GridFunction, Tail
from .model import Nonlinearity

DISCRIMINANT_TOL = 1e-12
MANIFOLD_OFFSET = 1e-8
ODE_RTOL = 1e-13
# near (1, 0) roundoff in g(phi) is ~1e-16 absolute, so the shooting leg uses
# an absolute floor; the tail leg is controlled relatively because the
# weighted formulation multiplies it by exp(theta x).
ODE_ATOL_SHOOT = 1e-15
ODE_ATOL_TAIL = 1e-250
KAPPA_FIT_TOL = 1e-6


def spatial_decay_rate(c: float, gprime0: float) -> float:
    """Smaller root of ``k^2 - c k + g'(0) = 0``.

    >>> round(spatial_decay_rate(3.0, 1.0), 7)
    0.381966
    """
    disc = c * c - 4.0 * gprime0
    if disc <= DISCRIMINANT_TOL:
        raise CriticalOrSubcriticalSpeed(
            f"c={c} is not above the critical speed 2*sqrt(g'(0))={2 * math.sqrt(max(gprime0, 0)):.6g}")
    # cancellation-free form of (c - sqrt(disc)) / 2
    return 2.0 * gprime0 / (c + math.sqrt(disc))


def fast_decay_rate(c: float, gprime0: float) -> float:
    """Larger root of ``k^2 - c k + g'(0) = 0``."""
    return c - spatial_decay_rate(c, gprime0)


def left_decay_rate(c: float, gprime1: float) -> float:
    """Rate ``mu > 0`` with ``1 - phi ~ exp(mu x)`` as ``x -> -inf``."""
    return 0.5 * (-c + math.sqrt(c * c - 4.0 * gprime1))


def smooth_step(x, derivatives: int = 0):
    """The partition function ``1_-`` and optionally its first two derivatives.

    ``1_-(x) = 1 / (1 + exp(2x / (1 - x^2)))`` on ``(-1, 1)``, equal to 1 for
    ``x <= -1`` and 0 for ``x >= 1``; it is C-infinity.
    Returns an array (``derivatives=0``) or a list ``[p, p', p'']`` truncated
    to ``derivatives + 1`` entries.
    """
    x = np.asarray(x, dtype=float)
    p = np.where(x <= -1.0, 1.0, 0.0)
    d1 = np.zeros_like(x)
    d2 = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    if np.any(inside):
        t = x[inside]
        one = 1.0 - t * t
        z = 2.0 * t / one
        pin = expit(-z)
        q = expit(z) * pin
        zp = 2.0 * (1.0 + t * t) / one ** 2
        zpp = 4.0 * t * (t * t + 3.0) / one ** 3
        far = np.abs(z) > 700.0
        with np.errstate(over="ignore", invalid="ignore"):
            dp = np.where(far, 0.0, -q * zp)
            ddp = np.where(far, 0.0, q * ((1.0 - 2.0 * pin) * zp ** 2 - zpp))
        p[inside] = pin
        d1[inside] = dp
        d2[inside] = ddp
    out = [p, d1, d2][: derivatives + 1]
    return out[0] if derivatives == 0 else out


def indicator_minus(x, derivatives: int = 0):
    return smooth_step(x, derivatives)


def indicator_plus(x, derivatives: int = 0):
    vals = smooth_step(x, max(derivatives, 0))
    if derivatives == 0:
        return 1.0 - vals
    return [1.0 - vals[0]] + [-v for v in vals[1:]]


@dataclass(frozen=True, eq=False)
class ContinuousFront:
    """Normalized continuous front ``phi0`` (``phi0(0) = 1/2``) with tail data.

    ``evaluate(x, n)`` returns the n-th derivative (n <= 2) anywhere on the
    real line; ``profile`` holds samples on the grid requested at solve time.
    """

    profile: GridFunction
    speed: float
    kappa0: float
    amplitude: float
    delta: float
    kappa0_fitted: float
    next_exponent: float
    left_rate: float
    nonlinearity: Nonlinearity
    _evaluator: Callable = None

    def evaluate(self, x, n: int = 0):
        return self._evaluator(np.asarray(x, dtype=float), n)

    def sample(self, grid: Grid) -> GridFunction:
        L = grid.half_length
        return GridFunction(grid, self.evaluate(grid.x),
                            Tail.constant(1.0),
                            Tail.exponential(self.amplitude * math.exp(-self.kappa0 * L), self.kappa0, L))

    def derivative_samples(self, grid: Grid, n: int = 1) -> np.ndarray:
        return self.evaluate(grid.x, n)


def _front_rhs(c, g):
    def rhs(x, y):
        return [y[1], -c * y[1] - g(y[0])]
    return rhs


def solve_continuous_front(g: Nonlinearity, c: float, half_length: float = 40.0,
                           step: float = 0.05, offset: float = MANIFOLD_OFFSET,
                           rtol: float = ODE_RTOL) -> ContinuousFront:
    """Shoot the heteroclinic front from the unstable manifold of ``(1, 0)``.

    The integration starts at ``(1 - offset, -offset * mu)`` along the unstable
    eigenvector, stops at the ``phi = 1/2`` crossing (which becomes ``x = 0``),
    and continues far enough into the right tail to fit ``kappa0``,
    the amplitude of ``exp(-kappa0 x)`` and the next-order exponent.
    Left of the starting point the linearized manifold is used.
    """
    kappa0 = spatial_decay_rate(c, g.gprime0)
    kappa_fast = fast_decay_rate(c, g.gprime0)
    mu = left_decay_rate(c, g.gprime1)
    rhs = _front_rhs(c, g)

    def half(x, y):
        return y[0] - 0.5
    half.terminal = True
    half.direction = -1

    y0 = [1.0 - offset, -offset * mu]
    stage1 = solve_ivp(rhs, (0.0, 1e4 / mu), y0, method="DOP853", rtol=rtol,
                       atol=ODE_ATOL_SHOOT, dense_output=True, events=half)
    if stage1.status != 1 or not stage1.t_events[0].size:
        raise NonMonotoneProfile("front never crossed 1/2 from the unstable manifold")
    s_half = float(stage1.t_events[0][0])
    y_half = stage1.sol(s_half)
    x_start = -s_half

    # far enough that exp(-kappa0 x) reaches ~1e-40, well past any L in use
    x_end = max(half_length + 1.0, 92.0 / kappa0)

    def undershoot(x, y):
        return y[0]
    undershoot.terminal = True

    stage2 = solve_ivp(rhs, (0.0, x_end), [0.5, y_half[1]], method="DOP853", rtol=rtol,
                       atol=ODE_ATOL_TAIL, dense_output=True, events=undershoot)
    if stage2.status == 1:
        raise NonMonotoneProfile("profile dropped below 0 (speed too small or integration failure)")
    if stage2.status != 0:
        raise NonMonotoneProfile(f"integration failed: {stage2.message}")

    # --- tail fit ------------------------------------------------------------
    xs = np.linspace(0.5 * x_end, x_end, 400)
    y = stage2.sol(xs)
    if np.any(y[0] <= 0.0):
        raise TailFitFailure("non-positive samples in the tail fit window")
    kappa_fit = float(np.median(-y[1] / y[0]))
    if not abs(kappa_fit - kappa0) <= KAPPA_FIT_TOL:
        raise TailFitFailure(f"tail log-slope {kappa_fit:.10g} differs from kappa0={kappa0:.10g}")
    scaled = y[0] * np.exp(kappa0 * xs)
    amplitude = float(np.median(scaled[-100:]))

    # next-order exponent from exp(kappa0 x) phi0 - A over a moderate window
    xw = np.linspace(1.0, 0.5 * x_end, 600)
    dev = np.abs(stage2.sol(xw)[0] * np.exp(kappa0 * xw) - amplitude)
    ok = (dev < 1e-3 * amplitude) & (dev > 1e-9 * amplitude)
    if np.count_nonzero(ok) < 10:
        next_exponent = min(kappa0, kappa_fast - kappa0)
    else:
        next_exponent = float(-np.polyfit(xw[ok], np.log(dev[ok]), 1)[0])
    if not next_exponent > 0.0:
        raise TailFitFailure(f"non-positive next-order tail exponent {next_exponent}")
    delta = min(0.5 * kappa0, next_exponent, mu)

    def evaluator(x, n=0):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        left = x < x_start
        mid = (x >= x_start) & (x <= 0.0)
        right = (x > 0.0) & (x <= x_end)
        beyond = x > x_end
        if np.any(left):
            e = offset * np.exp(mu * (x[left] - x_start))
            out[left] = (1.0 - e) if n == 0 else -(mu ** n) * e
        for mask, sol, sh in ((mid, stage1.sol, s_half), (right, stage2.sol, 0.0)):
            if np.any(mask):
                yy = sol(x[mask] + sh)
                if n == 0:
                    out[mask] = yy[0]
                elif n == 1:
                    out[mask] = yy[1]
                else:
                    out[mask] = -c * yy[1] - g(yy[0])
        if np.any(beyond):
            out[beyond] = amplitude * (-kappa0) ** n * np.exp(-kappa0 * x[beyond])
        return out

    grid = Grid(half_length, step, 1)
    L = grid.half_length
    profile = GridFunction(grid, evaluator(grid.x), Tail.constant(1.0),
                           Tail.exponential(amplitude * math.exp(-kappa0 * L), kappa0, L))
    steps = np.diff(profile.values)
    # far left the step in 1 - phi0 drops below one ulp of 1, so ties are roundoff
    saturated = profile.values[1:] >= 1.0 - 1e-12
    if np.any(steps > 0.0) or np.any((steps == 0.0) & ~saturated):
        raise NonMonotoneProfile("profile is not strictly decreasing on the grid")
    return ContinuousFront(profile, c, kappa0, amplitude, delta, kappa_fit, next_exponent,
                           mu, g, evaluator)


@dataclass(frozen=True, eq=False)
class FarFieldDecomposition:
    """``phi0 = 1_- + w0 + 1_+ * amplitude * exp(-kappa0 x)``."""

    front: ContinuousFront
    kappa0: float
    delta: float
    amplitude: float
    certificates: dict

    def w0(self, x, n: int = 0):
        """n-th derivative of the localized remainder ``w0`` (n <= 2)."""
        x = np.asarray(x, dtype=float)
        return self.front.evaluate(x, n) - self.indicator_part(x, n, self.kappa0)

    def indicator_part(self, x, n: int, kappa: float):
        """n-th derivative of ``1_- + 1_+ * amplitude * exp(-kappa x)``."""
        x = np.asarray(x, dtype=float)
        m = smooth_step(x, 2)
        plus = [1.0 - m[0], -m[1], -m[2]]
        e = self.amplitude * np.exp(-kappa * x)
        de = [e, -kappa * e, kappa * kappa * e]
        # Leibniz rule for 1_+ * e
        prod = sum(math.comb(n, j) * plus[j] * de[n - j] for j in range(n + 1))
        return m[n] + prod

    def indicator_minus(self, x):
        return smooth_step(x)

    def indicator_plus(self, x):
        return 1.0 - smooth_step(x)

    def reconstruct(self, x):
        return self.indicator_minus(x) + self.w0(x) + self.indicator_plus(x) * self.amplitude * np.exp(-self.kappa0 * np.asarray(x))

    def w0_samples(self, grid: Grid) -> GridFunction:
        return GridFunction(grid, self.w0(grid.x))


def decompose_front(front: ContinuousFront, delta: float | None = None,
                    divergence_ratio: float = 10.0) -> FarFieldDecomposition:
    """Split off the asymptotic pieces and certify the decay of ``w0``.

    The certificate evaluates ``sup |e^{-delta x} w0^{(n)}|`` on ``x < 0`` and
    ``sup |e^{(kappa0+delta) x} w0^{(n)}|`` on ``x > 0`` for ``n = 0, 1, 2``,
    over ``[0, L/2]`` and ``[0, L]`` separately; a sup that grows by more than
    ``divergence_ratio`` when the window doubles is treated as divergent.
    """
    delta = front.delta if delta is None else delta
    dec = FarFieldDecomposition(front, front.kappa0, delta, front.amplitude, {})
    L = front.profile.grid.half_length
    xl = np.linspace(-L, 0.0, 4001)
    xr = np.linspace(0.0, L, 4001)
    certificates = {}
    for n in range(3):
        wl = np.abs(dec.w0(xl, n) * np.exp(-delta * xl))
        wr = np.abs(dec.w0(xr, n) * np.exp((front.kappa0 + delta) * xr))
        for side, w in (("left", wl[::-1]), ("right", wr)):
            inner_sup = float(np.max(w[: w.size // 2 + 1]))
            full_sup = float(np.max(w))
            if not np.isfinite(full_sup) or full_sup > divergence_ratio * max(inner_sup, 1e-300):
                raise DecayCertificateFailure(
                    f"weighted sup of w0^({n}) on the {side} grows with the domain "
                    f"({inner_sup:.3e} -> {full_sup:.3e})")
            certificates[f"{side}_d{n}"] = full_sup
    object.__setattr__(dec, "certificates", certificates)
    return dec


@dataclass(frozen=True)
class ThetaChoice:
    """Weight rate with its two certificates.

    ``margin_spectral = -(theta^2 - c theta + g'(0)) > 0`` and
    ``margin_transport = c - 2 theta > 0``.
    """

    theta: float
    margin_spectral: float
    margin_transport: float


def choose_theta(c: float, gprime0: float, kappa0: float, delta: float) -> ThetaChoice:
    """``theta = kappa0 + min(delta/4, (c/2 - kappa0)/2, (kappa_fast - kappa0)/2)``."""
    if c * c - 4.0 * gprime0 <= DISCRIMINANT_TOL:
        raise CriticalOrSubcriticalSpeed(f"c={c} is not supercritical")
    if delta <= 0.0:
        raise NoAdmissibleTheta("delta must be positive")
    kappa_fast = c - kappa0
    theta = kappa0 + min(delta / 4.0, (c / 2.0 - kappa0) / 2.0, (kappa_fast - kappa0) / 2.0)
    spectral = -(theta * theta - c * theta + gprime0)
    transport = c - 2.0 * theta
    if not (kappa0 < theta < kappa0 + delta / 2.0 and spectral > 0.0 and transport > 0.0):
        raise NoAdmissibleTheta(f"theta={theta} violates the admissibility conditions")
    return ThetaChoice(theta, spectral, transport)
