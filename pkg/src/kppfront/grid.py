"""Uniform grids, sampled functions with analytic tails, and lattice operators.

Lattice shifts by ``k h`` are exact index shifts because the grid spacing is
``h / m``. Samples requested outside ``[-L, L]`` are produced by the analytic
tail descriptors, so operators never need an ad hoc boundary rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import GridMismatch
from .model import Kernel

# centered finite-difference weights, offsets -p/2..p/2
FIRST_DERIVATIVE_WEIGHTS = {
    4: np.array([1 / 12, -2 / 3, 0.0, 2 / 3, -1 / 12]),
    6: np.array([-1 / 60, 3 / 20, -3 / 4, 0.0, 3 / 4, -3 / 20, 1 / 60]),
    8: np.array([1 / 280, -4 / 105, 1 / 5, -4 / 5, 0.0, 4 / 5, -1 / 5, 4 / 105, -1 / 280]),
}
SECOND_DERIVATIVE_WEIGHTS = {
    4: np.array([-1 / 12, 4 / 3, -5 / 2, 4 / 3, -1 / 12]),
    6: np.array([1 / 90, -3 / 20, 3 / 2, -49 / 18, 3 / 2, -3 / 20, 1 / 90]),
    8: np.array([-1 / 560, 8 / 315, -1 / 5, 8 / 5, -205 / 72, 8 / 5, -1 / 5, 8 / 315, -1 / 560]),
}
DEFAULT_DERIVATIVE_ORDER = 8


@dataclass(frozen=True)
class Grid:
    """Points ``x_i = -L + i dx``, ``dx = h / m``, ``i = 0..N``.

    ``L`` is rounded up to a multiple of ``dx`` so that ``x = 0`` is a grid
    point and ``N dx = 2 L`` holds exactly in index arithmetic.
    """

    half_length: float
    h: float
    m: int = 2
    n_half: int = field(init=False)

    def __post_init__(self):
        if self.h <= 0 or self.m < 1 or self.half_length <= 0:
            raise ValueError("need h > 0, m >= 1, L > 0")
        dx = self.h / self.m
        n_half = int(np.ceil(self.half_length / dx - 1e-9))
        object.__setattr__(self, "n_half", n_half)
        object.__setattr__(self, "half_length", n_half * dx)

    @property
    def dx(self) -> float:
        return self.h / self.m

    @property
    def N(self) -> int:
        return 2 * self.n_half

    @property
    def size(self) -> int:
        return self.N + 1

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.size) - self.n_half) * self.dx

    def index_offset(self, distance: float) -> int:
        """Number of grid steps in ``distance``; it must be a multiple of ``dx``."""
        s = distance / self.dx
        n = int(round(s))
        if abs(s - n) > 1e-9 * max(1.0, abs(s)):
            raise GridMismatch(f"shift {distance} is not a multiple of dx={self.dx}")
        return n

    def compatible(self, other: "Grid") -> bool:
        return self.n_half == other.n_half and np.isclose(self.dx, other.dx, rtol=1e-14, atol=0)


@dataclass(frozen=True)
class Tail:
    """``const + sum_i amp_i exp(-rate_i (x - anchor))`` beyond one end of the grid."""

    const: float = 0.0
    terms: tuple[tuple[float, float], ...] = ()
    anchor: float = 0.0

    @classmethod
    def zero(cls, anchor: float = 0.0) -> "Tail":
        return cls(0.0, (), anchor)

    @classmethod
    def constant(cls, value: float, anchor: float = 0.0) -> "Tail":
        return cls(float(value), (), anchor)

    @classmethod
    def exponential(cls, amp: float, rate: float, anchor: float) -> "Tail":
        return cls(0.0, ((float(amp), float(rate)),), anchor)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.full_like(x, self.const)
        for amp, rate in self.terms:
            out = out + amp * np.exp(-rate * (x - self.anchor))
        return out

    def map_terms(self, const_factor: float, exp_factor) -> "Tail":
        """Apply a translation-invariant linear operator with exponential symbol."""
        terms = tuple((amp * exp_factor(rate), rate) for amp, rate in self.terms)
        return Tail(self.const * const_factor, tuple(t for t in terms if t[0] != 0.0), self.anchor)

    def shifted(self, s: float) -> "Tail":
        """Tail of ``x -> f(x + s)``, keeping the same anchor."""
        return self.map_terms(1.0, lambda r: np.exp(-r * s))

    def scaled(self, c: float) -> "Tail":
        return self.map_terms(c, lambda r: c)

    def __add__(self, other: "Tail") -> "Tail":
        if isinstance(other, (int, float)):
            return Tail(self.const + other, self.terms, self.anchor)
        other = other.reanchored(self.anchor)
        return Tail(self.const + other.const, self.terms + other.terms, self.anchor)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return self.scaled(float(other))
        other = other.reanchored(self.anchor)
        terms = [(self.const * a, r) for a, r in other.terms]
        terms += [(other.const * a, r) for a, r in self.terms]
        terms += [(a1 * a2, r1 + r2) for a1, r1 in self.terms for a2, r2 in other.terms]
        return Tail(self.const * other.const, tuple(t for t in terms if t[0] != 0.0), self.anchor)

    def reanchored(self, anchor: float) -> "Tail":
        return Tail(self.const, tuple((a * np.exp(-r * (anchor - self.anchor)), r)
                                      for a, r in self.terms), anchor)

    def derivative(self) -> "Tail":
        return Tail(0.0, tuple((-r * a, r) for a, r in self.terms if r != 0.0), self.anchor)

    @property
    def is_zero(self) -> bool:
        return self.const == 0.0 and not self.terms


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples on a :class:`Grid` plus analytic left and right tails."""

    grid: Grid
    values: np.ndarray
    left_tail: Tail = None
    right_tail: Tail = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.size,):
            raise GridMismatch(f"expected {self.grid.size} samples, got {v.shape}")
        object.__setattr__(self, "values", v)
        L = self.grid.half_length
        lt = self.left_tail if self.left_tail is not None else Tail.zero()
        rt = self.right_tail if self.right_tail is not None else Tail.zero()
        object.__setattr__(self, "left_tail", lt.reanchored(-L))
        object.__setattr__(self, "right_tail", rt.reanchored(L))

    @classmethod
    def from_callable(cls, grid: Grid, f, left_tail: Tail | None = None,
                      right_tail: Tail | None = None) -> "GridFunction":
        return cls(grid, f(grid.x), left_tail, right_tail)

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def tail_mismatch(self) -> float:
        """Largest relative jump between the stored end samples and the tails."""
        L = self.grid.half_length
        out = 0.0
        for sample, tail, xe in ((self.values[0], self.left_tail, -L),
                                 (self.values[-1], self.right_tail, L)):
            t = float(tail(xe))
            out = max(out, abs(t - sample) / max(abs(sample), abs(t), 1e-300)
                      if (t != 0.0 or sample != 0.0) else 0.0)
        return out

    def extended(self, pad: int) -> np.ndarray:
        """Samples at indices ``-pad .. N + pad``, tails filling the padding."""
        if pad <= 0:
            return self.values.copy()
        dx = self.grid.dx
        L = self.grid.half_length
        left = self.left_tail(-L - dx * np.arange(pad, 0, -1))
        right = self.right_tail(L + dx * np.arange(1, pad + 1))
        return np.concatenate([left, self.values, right])

    def with_values(self, values, left_tail=None, right_tail=None) -> "GridFunction":
        return GridFunction(self.grid, values,
                            self.left_tail if left_tail is None else left_tail,
                            self.right_tail if right_tail is None else right_tail)

    def __call__(self, x):
        """Evaluate anywhere: cubic spline inside the grid, tails outside."""
        x = np.asarray(x, dtype=float)
        L = self.grid.half_length
        spline = CubicSpline(self.grid.x, self.values)
        out = np.where(np.abs(x) <= L, spline(np.clip(x, -L, L)), 0.0)
        out = np.where(x < -L, self.left_tail(x), out)
        return np.where(x > L, self.right_tail(x), out)

    def _binary(self, other, op):
        if isinstance(other, GridFunction):
            if not self.grid.compatible(other.grid):
                raise GridMismatch("grid functions live on different grids")
            return other.values, other.left_tail, other.right_tail
        c = float(other)
        return c, Tail.constant(c), Tail.constant(c)

    def __add__(self, other):
        v, lt, rt = self._binary(other, "+")
        return GridFunction(self.grid, self.values + v, self.left_tail + lt, self.right_tail + rt)

    __radd__ = __add__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other if isinstance(other, GridFunction) else -float(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        v, lt, rt = self._binary(other, "*")
        return GridFunction(self.grid, self.values * v, self.left_tail * lt, self.right_tail * rt)

    __rmul__ = __mul__

    def to_csv_rows(self):
        return zip(self.grid.x, self.values)


def interior_mask(grid: Grid, pad: int) -> np.ndarray:
    """Points at least ``pad`` grid steps away from both ends."""
    i = np.arange(grid.size)
    return (i >= pad) & (i <= grid.N - pad)


def shift(f: GridFunction, offset: int) -> GridFunction:
    """``x -> f(x + offset dx)`` with out-of-domain samples taken from the tails."""
    pad = abs(offset)
    ext = f.extended(pad)
    vals = ext[pad + offset: pad + offset + f.grid.size]
    s = offset * f.grid.dx
    return GridFunction(f.grid, vals, f.left_tail.shifted(s), f.right_tail.shifted(s))


def _shift_offsets(kernel: Kernel, h: float, grid: Grid) -> list[int]:
    return [grid.index_offset(k * h) for k in kernel.ks]


def _lattice_combination(kernel: Kernel, h: float, f: GridFunction, combine, const_factor, exp_factor):
    grid = f.grid
    offsets = _shift_offsets(kernel, h, grid)
    pad = max(offsets)
    ext = f.extended(pad)
    n = grid.size
    out = np.zeros(n)
    for a, k, s in zip(kernel.array, kernel.ks, offsets):
        if a == 0.0:
            continue
        plus = ext[pad + s: pad + s + n]
        minus = ext[pad - s: pad - s + n]
        centre = ext[pad: pad + n]
        out += a * combine(plus, centre, minus, k * h)
    return GridFunction(grid, out,
                        f.left_tail.map_terms(const_factor, exp_factor),
                        f.right_tail.map_terms(const_factor, exp_factor))


def exp_symbol_diffusion(kernel: Kernel, h: float, rate) -> float:
    """``Delta_{a,h}`` applied to ``exp(-rate x)`` divided by ``exp(-rate x)``."""
    kh = kernel.ks * h
    # e^{-t} - 2 + e^{t} = 4 sinh^2(t/2)
    return float(np.sum(kernel.array * 4.0 * np.sinh(rate * kh / 2.0) ** 2 / kh ** 2))


def exp_symbol_transport(kernel: Kernel, h: float, rate) -> float:
    kh = kernel.ks * h
    return float(np.sum(-kernel.array * np.sinh(rate * kh) / kh))


def exp_symbol_mean(kernel: Kernel, h: float, rate) -> float:
    kh = kernel.ks * h
    return float(np.sum(kernel.array * np.cosh(rate * kh)))


def discrete_diffusion(kernel: Kernel, h: float, f: GridFunction) -> GridFunction:
    """``sum_k a_k (f(.+kh) - 2 f + f(.-kh)) / (kh)^2``."""
    return _lattice_combination(
        kernel, h, f, lambda p, c, m, kh: (p - 2.0 * c + m) / kh ** 2,
        0.0, lambda r: exp_symbol_diffusion(kernel, h, r))


def centered_transport(kernel: Kernel, h: float, f: GridFunction) -> GridFunction:
    """``sum_k a_k (f(.+kh) - f(.-kh)) / (2 kh)``."""
    return _lattice_combination(
        kernel, h, f, lambda p, c, m, kh: (p - m) / (2.0 * kh),
        0.0, lambda r: exp_symbol_transport(kernel, h, r))


def centered_mean(kernel: Kernel, h: float, f: GridFunction) -> GridFunction:
    """``sum_k a_k (f(.+kh) + f(.-kh)) / 2``."""
    return _lattice_combination(
        kernel, h, f, lambda p, c, m, kh: 0.5 * (p + m),
        kernel.sum, lambda r: exp_symbol_mean(kernel, h, r))


def one_sided_difference(f: GridFunction, kh: float, side: str) -> GridFunction:
    """Forward (``side="up"``) or backward (``"down"``) difference over ``kh``."""
    s = f.grid.index_offset(kh)
    if side == "up":
        g = shift(f, s) - f
    elif side == "down":
        g = f - shift(f, -s)
    else:
        raise ValueError("side must be 'up' or 'down'")
    return g * (1.0 / kh)


def one_sided_differences(f: GridFunction, kh: float, side: str) -> GridFunction:
    return one_sided_difference(f, kh, side)


def derivative(f: GridFunction, order: int = DEFAULT_DERIVATIVE_ORDER, n: int = 1) -> GridFunction:
    """Continuum derivative ``f'`` (``n=1``) or ``f''`` (``n=2``) by centered stencils.

    Stencil points beyond the domain come from the tails, which are
    differentiated analytically.
    """
    weights = (FIRST_DERIVATIVE_WEIGHTS if n == 1 else SECOND_DERIVATIVE_WEIGHTS)[order]
    half = len(weights) // 2
    ext = f.extended(half)
    size = f.grid.size
    out = np.zeros(size)
    for j, w in enumerate(weights):
        if w != 0.0:
            out += w * ext[j: j + size]
    out /= f.grid.dx ** n
    lt, rt = f.left_tail.derivative(), f.right_tail.derivative()
    if n == 2:
        lt, rt = lt.derivative(), rt.derivative()
    return GridFunction(f.grid, out, lt, rt)


def diffusion_symbol(kernel: Kernel, h: float, xi) -> np.ndarray:
    """Fourier symbol ``sum_k a_k 2 (cos(k h xi) - 1) / (k h)^2``."""
    xi = np.asarray(xi, dtype=float)
    kh = kernel.ks * h
    arg = np.multiply.outer(xi, kh)
    # 2(cos t - 1) = -4 sin^2(t/2), accurate for small t
    return np.sum(kernel.array * (-4.0 * np.sin(arg / 2.0) ** 2) / kh ** 2, axis=-1)


def symbol_minimum(kernel: Kernel, h: float, samples: int = 4097) -> float:
    """Most negative value of the diffusion symbol over one period ``[0, pi/h]``."""
    xi = np.linspace(0.0, np.pi / h, samples)
    return float(np.min(diffusion_symbol(kernel, h, xi)))


def inner(f, g) -> float:
    """Discrete L2 pairing ``dx * sum f g`` (functions vanish beyond the grid)."""
    fv = f.values if isinstance(f, GridFunction) else np.asarray(f)
    gv = g.values if isinstance(g, GridFunction) else np.asarray(g)
    dx = (f if isinstance(f, GridFunction) else g).grid.dx
    return float(dx * np.dot(fv, gv))


def l2_norm(f: GridFunction) -> float:
    return float(np.sqrt(f.grid.dx * np.dot(f.values, f.values)))


def sup_norm(f: GridFunction) -> float:
    return float(np.max(np.abs(f.values)))


def write_grid_function_csv(path, f: GridFunction, columns: Sequence[str] = ("x", "value")) -> None:
    from .io import write_csv
    write_csv(path, list(columns), [f.grid.x, f.values])
