"""Property checks for the lattice difference calculus.

Each check takes explicit data and returns the worst discrepancy together
with the quantities entering the corresponding bound; :func:`run_suite`
draws random smooth data and tabulates pass/fail. All identities are exact
algebra, so they hold to round-off.

With ``T2(x, s) = f(x+s) - f(x) - s f'(x)`` and
``T3(x, s) = T2(x, s) - s^2 f''(x) / 2``:

* unbalanced mean:
  ``(d+ f) v(.+kh) + (d- f) v(.-kh) = 2 f' M0 v + (T2(.,kh) v(.+kh) - T2(.,-kh) v(.-kh)) / kh``,
  the last term bounded in L2 by ``kh ||f||_{W^{2,inf}} ||v||``;
* unbalanced difference:
  ``((d+ f) v(.+kh) - (d- f) v(.-kh)) / kh = 2 f' d0 v + f'' M0 v + (v(.+kh) T3(.,kh) + v(.-kh) T3(.,-kh)) / (kh)^2``,
  the last term bounded by ``kh ||f||_{W^{3,inf}} ||v||``;
* integration by parts:
  ``<f d0 v, v> = -1/2 <f' M0 v, v> - 1/(4 kh) <T2(.,kh) v(.+kh) - T2(.,-kh) v(.-kh), v>``;
* upper semicontinuity: ``||d0 v|| <= ||v'||``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid, GridFunction, discrete_diffusion, l2_norm
from .model import Kernel, validate_kernel

IDENTITY_TOL = 1e-12
SBP_TOL = 1e-13


@dataclass(frozen=True)
class TrigSum:
    """``f(x) = sum_j amp_j sin(freq_j x + phase_j)`` with exact derivatives."""

    amp: np.ndarray
    freq: np.ndarray
    phase: np.ndarray

    @classmethod
    def random(cls, rng, terms: int = 4, max_freq: float = 3.0) -> "TrigSum":
        return cls(rng.normal(size=terms), rng.uniform(0.1, max_freq, terms),
                   rng.uniform(0, 2 * np.pi, terms))

    def __call__(self, x, n: int = 0):
        x = np.asarray(x, dtype=float)
        arg = np.multiply.outer(x, self.freq) + self.phase + 0.5 * np.pi * n
        return np.sum(self.amp * self.freq ** n * np.sin(arg), axis=-1)

    def taylor(self, j: int, x, s):
        """``T_{j,f}(x, s)`` by direct evaluation."""
        out = self(x + s) - self(x)
        term = np.ones_like(np.asarray(x, dtype=float))
        for order in range(1, j):
            term = term * s / order
            out = out - self(x, order) * term
        return out

    def sobolev_sup(self, order: int, x) -> float:
        """``max_{n <= order} sup |f^(n)|`` sampled on ``x``."""
        return float(max(np.max(np.abs(self(x, n))) for n in range(order + 1)))


def random_compact_grid_function(grid: Grid, rng, support: float) -> GridFunction:
    """White noise times a smooth envelope vanishing outside ``|x| < support``."""
    x = grid.x
    env = np.where(np.abs(x) < support, np.cos(0.5 * np.pi * x / support) ** 2, 0.0)
    return GridFunction(grid, rng.normal(size=x.size) * env)


def _shifts(v: GridFunction, kh: float):
    s = v.grid.index_offset(kh)
    vals = v.values
    plus = np.concatenate([vals[s:], np.zeros(s)])
    minus = np.concatenate([np.zeros(s), vals[:-s]])
    return plus, minus


def _parts(f: TrigSum, v: GridFunction, kh: float):
    x = v.grid.x
    vp, vm = _shifts(v, kh)
    dplus = (f(x + kh) - f(x)) / kh
    dminus = (f(x) - f(x - kh)) / kh
    return x, vp, vm, dplus, dminus


def _relative(a, b) -> float:
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-300)
    return float(np.max(np.abs(a - b)) / scale)


def unbalanced_mean(f: TrigSum, v: GridFunction, kh: float):
    """Returns ``(relative identity error, remainder / kh in L2, bound)``."""
    x, vp, vm, dp, dm = _parts(f, v, kh)
    lhs = dp * vp + dm * vm
    rem = f.taylor(2, x, kh) * vp - f.taylor(2, x, -kh) * vm
    rhs = 2.0 * f(x, 1) * 0.5 * (vp + vm) + rem / kh
    dx = v.grid.dx
    rem_norm = float(np.sqrt(dx * np.sum((rem / kh) ** 2)))
    xs = np.linspace(x[0] - kh, x[-1] + kh, 20 * x.size)
    bound = kh * f.sobolev_sup(2, xs) * l2_norm(v)
    return _relative(lhs, rhs), rem_norm, bound


def unbalanced_difference(f: TrigSum, v: GridFunction, kh: float):
    x, vp, vm, dp, dm = _parts(f, v, kh)
    lhs = (dp * vp - dm * vm) / kh
    rem = (vp * f.taylor(3, x, kh) + vm * f.taylor(3, x, -kh)) / kh ** 2
    rhs = 2.0 * f(x, 1) * (vp - vm) / (2.0 * kh) + f(x, 2) * 0.5 * (vp + vm) + rem
    dx = v.grid.dx
    rem_norm = float(np.sqrt(dx * np.sum(rem ** 2)))
    xs = np.linspace(x[0] - kh, x[-1] + kh, 20 * x.size)
    bound = kh * f.sobolev_sup(3, xs) * l2_norm(v)
    return _relative(lhs, rhs), rem_norm, bound


def integration_by_parts(f: TrigSum, v: GridFunction, kh: float) -> float:
    """Relative defect of ``<f d0 v, v> + 1/2 <f' M0 v, v> + 1/(4kh) <T2 term, v>``."""
    x, vp, vm, _, _ = _parts(f, v, kh)
    vv = v.values
    dx = v.grid.dx
    a = dx * np.sum(f(x) * (vp - vm) / (2.0 * kh) * vv)
    b = 0.5 * dx * np.sum(f(x, 1) * 0.5 * (vp + vm) * vv)
    rem = f.taylor(2, x, kh) * vp - f.taylor(2, x, -kh) * vm
    c = dx * np.sum(rem * vv) / (4.0 * kh)
    scale = max(abs(a), abs(b), abs(c), dx * np.sum(np.abs(f(x)) * vv ** 2) / kh)
    return float(abs(a + b + c) / scale)


def upper_semicontinuity(rng, n_points: int = 2048, period: float = 20.0, modes: int = 8,
                         k: int = 1, h_steps: int = 4):
    """``(||d0_{kh} v||, ||v'||)`` for a random periodic band-limited ``v``.

    Frequencies stay below ``pi / (10 dx)``; on a full period the discrete
    L2 norm of trigonometric polynomials is exact.
    """
    dx = period / n_points
    x = np.arange(n_points) * dx
    nmax = max(1, n_points // 20 - 1)
    ns = rng.choice(np.arange(1, nmax + 1), size=min(modes, nmax), replace=False)
    xi = 2.0 * np.pi * ns / period
    a, b = rng.normal(size=(2, xi.size))
    v = np.sum(a * np.cos(np.outer(x, xi)) + b * np.sin(np.outer(x, xi)), axis=1)
    dv = np.sum(xi * (-a * np.sin(np.outer(x, xi)) + b * np.cos(np.outer(x, xi))), axis=1)
    s = k * h_steps
    kh = s * dx
    d0 = (np.roll(v, -s) - np.roll(v, s)) / (2.0 * kh)
    return float(np.sqrt(dx * d0 @ d0)), float(np.sqrt(dx * dv @ dv))


def summation_by_parts(u: GridFunction, v: GridFunction, kh: float) -> float:
    """Relative defect of ``<d+ u, v> + <u, d- v>``."""
    up, _ = _shifts(u, kh)
    _, vm = _shifts(v, kh)
    dx = u.grid.dx
    a = dx * np.dot((up - u.values) / kh, v.values)
    b = dx * np.dot(u.values, (v.values - vm) / kh)
    scale = max(abs(a), abs(b), l2_norm(u) * l2_norm(v) / kh)
    return float(abs(a + b) / scale)


def consistency_errors(kernel: Kernel, hs, L: float = 2.0 * np.pi):
    """``sup |Del_{a,h} sin - sin''|`` on the grid for each ``h``."""
    errs = []
    for h in hs:
        grid = Grid(L, h, 1)
        # tails are irrelevant: only points at least K h inside are compared
        f = GridFunction(grid, np.sin(grid.x))
        lap = discrete_diffusion(kernel, h, f).values
        pad = grid.index_offset(kernel.K * h)
        inner_pts = slice(pad, grid.size - pad)
        errs.append(float(np.max(np.abs(lap[inner_pts] + np.sin(grid.x[inner_pts])))))
    return np.array(errs)


def observed_orders(hs, errors) -> np.ndarray:
    hs = np.asarray(hs, dtype=float)
    errors = np.asarray(errors, dtype=float)
    return np.log(errors[:-1] / errors[1:]) / np.log(hs[:-1] / hs[1:])


@dataclass(frozen=True)
class IdentityResult:
    name: str
    passed: bool
    worst: float
    tolerance: float

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name:<38s} worst={self.worst:.3e}  tol={self.tolerance:.1e}"


def run_suite(n_pairs: int = 100, seed: int = 0) -> list[IdentityResult]:
    """Identities on ``n_pairs`` random ``(f, v)`` pairs, plus consistency orders."""
    rng = np.random.default_rng(seed)
    worst = {"unbalanced mean": 0.0, "unbalanced difference": 0.0, "integration by parts": 0.0,
             "summation by parts": 0.0}
    bound_ratio = {"mean remainder bound": 0.0, "difference remainder bound": 0.0}
    usc = 0.0
    for _ in range(n_pairs):
        h = float(rng.choice([0.05, 0.1, 0.2]))
        k = int(rng.integers(1, 4))
        kh = k * h
        grid = Grid(8.0, h, 2)
        f = TrigSum.random(rng)
        v = random_compact_grid_function(grid, rng, 6.0)
        u = random_compact_grid_function(grid, rng, 6.0)
        e1, r1, b1 = unbalanced_mean(f, v, kh)
        e2, r2, b2 = unbalanced_difference(f, v, kh)
        worst["unbalanced mean"] = max(worst["unbalanced mean"], e1)
        worst["unbalanced difference"] = max(worst["unbalanced difference"], e2)
        worst["integration by parts"] = max(worst["integration by parts"], integration_by_parts(f, v, kh))
        worst["summation by parts"] = max(worst["summation by parts"], summation_by_parts(u, v, kh))
        bound_ratio["mean remainder bound"] = max(bound_ratio["mean remainder bound"], r1 / b1)
        bound_ratio["difference remainder bound"] = max(bound_ratio["difference remainder bound"], r2 / b2)
        a, b = upper_semicontinuity(rng, k=k, h_steps=int(rng.integers(1, 6)))
        usc = max(usc, (a - b) / b)
    results = [IdentityResult(n, w <= (SBP_TOL if n == "summation by parts" else IDENTITY_TOL), w,
                              SBP_TOL if n == "summation by parts" else IDENTITY_TOL)
               for n, w in worst.items()]
    results += [IdentityResult(n, r <= 1.0, r, 1.0) for n, r in bound_ratio.items()]
    results.append(IdentityResult("upper semicontinuity", usc <= IDENTITY_TOL, max(usc, 0.0), IDENTITY_TOL))
    hs = [0.2, 0.1, 0.05]
    o1 = observed_orders(hs, consistency_errors(validate_kernel([1.0]), hs))
    o4 = observed_orders(hs, consistency_errors(validate_kernel([4 / 3, -1 / 3]), hs))
    results.append(IdentityResult("consistency order, kernel (1)", bool(np.all(o1 >= 2.0 - 0.2)),
                                  float(o1.min()), 2.0))
    results.append(IdentityResult("consistency order, kernel (4/3,-1/3)",
                                  bool(np.all(np.abs(o4 - 4.0) <= 0.2)), float(o4.min()), 4.0))
    return results
