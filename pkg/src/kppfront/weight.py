"""Over-localized exponential weight and its smooth version.

The reference weight is ``w~ = exp(-theta S~)`` with

    S~(x) = 0              for x <= -1
            (x + 1)^2 / 4  for -1 < x < 1
            x              for x >= 1,

which is only C^1. The smooth weight mollifies the exponent instead of the
weight: ``w = exp(-theta S)`` with ``S = S~ * eta_r`` for a C-infinity bump
``eta_r`` of half-width ``r``. Since ``S~'`` is the clipped ramp
``clip((x + 1)/2, 0, 1)``, every derivative of ``S`` is a closed form in the
partial moments of the bump; no numerical differentiation is involved.

Consequences used elsewhere:

* ``w = w~`` exactly for ``|x| >= 1 + r``;
* ``w'/w = -theta s`` with ``0 <= s <= 1``, hence ``|w'/w| <= theta`` and
  ``w`` takes values in ``(0, 1]``;
* ``w(y)/w(x) = exp(-theta (S(y) - S(x)))`` is evaluated without forming
  either factor, so large ``|x|`` never under- or overflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SmoothingFailure, ValidationError

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(128)
# normalisation of exp(-1 / (1 - t^2)) on (-1, 1)
_BUMP_MASS = 0.4439938161680793
INITIAL_WIDTH = 0.75
MAX_HALVINGS = 50
CHECK_POINTS = 100_000


def _bump(t):
    """Unit-mass C-infinity bump supported on ``[-1, 1]``."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2)) / _BUMP_MASS
    return out


def _partial_moments(u):
    """``int_{-1}^{u} t^j bump(t) dt`` for ``j = 0, 1, 2`` (``u`` clipped to [-1, 1])."""
    u = np.clip(np.asarray(u, dtype=float), -1.0, 1.0)
    M = np.zeros((3,) + u.shape)
    M[0] = np.where(u >= 1.0, 1.0, 0.0)
    M[2] = np.where(u >= 1.0, _full_second_moment(), 0.0)
    inner = (u > -1.0) & (u < 1.0)
    if np.any(inner):
        ui = u[inner]
        half = 0.5 * (ui + 1.0)
        t = -1.0 + np.multiply.outer(half, _GL_NODES + 1.0)
        f = _bump(t) * _GL_WEIGHTS * half[:, None]
        M[0][inner] = f.sum(axis=1)
        M[1][inner] = (f * t).sum(axis=1)
        M[2][inner] = (f * t * t).sum(axis=1)
    return M


def _full_second_moment() -> float:
    t = _GL_NODES
    return float(np.sum(_GL_WEIGHTS * t * t * _bump(t)))


def reference_weight(x, theta: float, n: int = 0):
    """n-th derivative (n <= 2) of the piecewise reference weight ``w~``."""
    x = np.asarray(x, dtype=float)
    s = np.clip(0.5 * (x + 1.0), 0.0, 1.0)
    S = np.where(x <= -1.0, 0.0, np.where(x >= 1.0, x, 0.25 * (x + 1.0) ** 2))
    w = np.exp(-theta * S)
    if n == 0:
        return w
    if n == 1:
        return -theta * s * w
    ds = np.where(np.abs(x) < 1.0, 0.5, 0.0)
    return (theta ** 2 * s ** 2 - theta * ds) * w


@dataclass(frozen=True)
class WeightProfile:
    """Smooth weight ``w = exp(-theta S)`` with mollifier half-width ``width``.

    ``distance_w1`` and ``distance_w2`` are the sup distances to the reference
    weight measured up to the first and second derivative on ``[-2, 2]``.
    """

    theta: float
    epsilon: float
    width: float
    distance_w1: float
    distance_w2: float

    # --- exponent and its derivatives -----------------------------------------
    def _ramp(self, y):
        """Mollified ``y_+`` (and the mollified ``y_+^2``), plus bump moments."""
        r = self.width
        M = _partial_moments(y / r)
        M0, M1, M2 = M[0], r * M[1], r * r * M[2]
        psi = y * M0 - M1
        phi = y * y * M0 - 2.0 * y * M1 + M2
        return phi, psi, M0

    def jet(self, x):
        """``(S, S', S'')`` from a single pass over the bump moments."""
        x = np.asarray(x, dtype=float)
        r = self.width
        out = np.zeros((3,) + x.shape)
        right = x >= 1.0 + r
        mid = (x > -1.0 - r) & ~right
        out[0][right] = x[right]
        out[1][right] = 1.0
        if np.any(mid):
            xm = x[mid]
            pa, sa, ma = self._ramp(xm + 1.0)
            pb, sb, mb = self._ramp(xm - 1.0)
            out[0][mid] = 0.25 * (pa - pb)
            out[1][mid] = 0.5 * (sa - sb)
            out[2][mid] = 0.5 * (ma - mb)
        return out

    def exponent(self, x, n: int = 0):
        """``S`` (n=0) and its derivatives up to n=3."""
        if n < 3:
            return self.jet(x)[n]
        x = np.asarray(x, dtype=float)
        r = self.width
        return 0.5 * (_bump((x + 1.0) / r) - _bump((x - 1.0) / r)) / r

    def log_weight(self, x):
        return -self.theta * self.exponent(x)

    # --- weight ------------------------------------------------------------------
    def __call__(self, x):
        return np.exp(self.log_weight(x))

    def log_derivative(self, x):
        """``w'/w = -theta S'``."""
        return -self.theta * self.exponent(x, 1)

    def derivative_ratio(self, x, n: int):
        """``w^(n) / w`` for n = 0..3."""
        th = self.theta
        if n == 0:
            return np.ones_like(np.asarray(x, dtype=float))
        _, s, ds = self.jet(x)
        if n == 1:
            return -th * s
        if n == 2:
            return th ** 2 * s ** 2 - th * ds
        dds = self.exponent(x, 3)
        return -th ** 3 * s ** 3 + 3.0 * th ** 2 * s * ds - th * dds

    def derivative(self, x, n: int = 1):
        return self.derivative_ratio(x, n) * self(x)

    def ratio(self, x, y):
        """``w(y) / w(x)`` evaluated through the exponent difference."""
        return np.exp(-self.theta * (self.exponent(y) - self.exponent(x)))

    def log_derivative_prime(self, x):
        """``(w'/w)' = -theta S''``."""
        return -self.theta * self.exponent(x, 2)

    def to_rows(self, x):
        x = np.asarray(x, dtype=float)
        return zip(x, self(x), self.derivative(x, 1), self.derivative(x, 2))


def _distances(theta: float, width: float):
    x = np.linspace(-2.0, 2.0, CHECK_POINTS)
    S, s, ds = WeightProfile(theta, 0.0, width, 0.0, 0.0).jet(x)
    w = np.exp(-theta * S)
    smooth = (w, -theta * s * w, (theta ** 2 * s ** 2 - theta * ds) * w)
    d = [float(np.max(np.abs(smooth[n] - reference_weight(x, theta, n)))) for n in range(3)]
    return max(d[0], d[1]), max(d)


def build_weight(theta: float, epsilon: float, initial_width: float = INITIAL_WIDTH) -> WeightProfile:
    """Smooth weight within ``epsilon`` of the reference weight in ``W^{1,inf}``.

    The mollifier half-width starts at ``initial_width`` and is halved until
    the distance (value and first derivative, sampled on ``[-2, 2]``) is at
    most ``epsilon``. The second derivative of the reference weight jumps by
    ``theta/2`` at ``x = +-1``, so no smooth weight can approach it in
    ``W^{2,inf}``; that distance is recorded in ``distance_w2`` only.

    Raises
    ------
    SmoothingFailure
        if 50 halvings do not reach ``epsilon``.
    """
    if not theta > 0.0 or not epsilon > 0.0:
        raise ValidationError("need theta > 0 and epsilon > 0")
    width = float(initial_width)
    for _ in range(MAX_HALVINGS + 1):
        d1, d2 = _distances(theta, width)
        if d1 <= epsilon:
            return WeightProfile(float(theta), float(epsilon), width, d1, d2)
        width *= 0.5
    raise SmoothingFailure(f"W^(1,inf) distance {d1:.3e} still above {epsilon:.3e}")


def unit_weight() -> WeightProfile:
    """``w = 1``; turns every weighted operator into its unweighted form."""
    return WeightProfile(0.0, 0.0, INITIAL_WIDTH, 0.0, 0.0)


def default_epsilon(margin_spectral: float) -> float:
    """Smoothing tolerance tied to the spectral margin of the chosen theta."""
    return 0.1 * min(1.0, margin_spectral)


def weight_ratio_bound(w: WeightProfile, span: float) -> float:
    """``sup_x sup_{|y - x| <= span} w(y)/w(x)``.

    ``S`` is nondecreasing with ``S' <= 1``, so the supremum is attained at
    ``y = x - span`` and equals ``exp(theta * span)`` once the whole window
    lies in the exponential region. The transition region is scanned on a
    fine grid and combined with that closed form.
    """
    if span < 0:
        raise ValueError("span must be nonnegative")
    if span == 0:
        return 1.0
    lo, hi = -1.0 - w.width, 1.0 + w.width + span
    x = np.linspace(lo, hi, 20_001)
    scanned = float(np.max(w.exponent(x) - w.exponent(x - span)))
    return float(math.exp(w.theta * max(scanned, span)))
