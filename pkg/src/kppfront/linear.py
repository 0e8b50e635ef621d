"""Weighted linearization ``L_h v = w^{-1} A_h(phi_inf)(w v)`` and its diagnostics.

All operators act on grid samples with the Dirichlet closure ``v = 0``
outside ``[-L, L]``; the L2 pairing is ``dx * sum u v``, so the discrete
adjoint is the plain matrix transpose.

Four assemblies are provided:

``direct``
    exact weight ratios inside the lattice sum, ``c (D v + (w'/w) v)`` for the
    transport term and ``g'(phi_inf) v``.
``expanded``
    ``Del v + c D v + 2 b d0 v + (g' + c b) v + (w''/w) M0 v`` with
    ``b = w'/w``; the difference to ``direct`` is the remainder ``R``.
``adjoint_expanded``
    ``Del v - c D v - 2 b d0 v + (g' + c b) v + (w''/w - 2 b') M0 v``.
``continuous``
    ``v'' + (c + 2 b) v' + (w''/w + c b + g') v`` with centered stencils.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh, splu

from .errors import EigSolverNoConvergence, GridMismatch, NonPositiveMargin, SingularOperator
from .grid import (DEFAULT_DERIVATIVE_ORDER, FIRST_DERIVATIVE_WEIGHTS, SECOND_DERIVATIVE_WEIGHTS,
                   Grid, GridFunction)
from .io import append_csv_row
from .model import Kernel, Nonlinearity
from .weight import WeightProfile, unit_weight

FORMS = ("direct", "expanded", "adjoint_expanded", "continuous")
DENSE_LIMIT = 2000
SOLVE_TOL = 1e-10


@dataclass(eq=False)
class OperatorAssembly:
    """Sparse matrix of one of the four forms on ``grid``."""

    matrix: sp.csr_matrix
    grid: Grid
    form_tag: str
    _lu: object = field(default=None, repr=False)

    def __post_init__(self):
        if self.form_tag not in FORMS:
            raise ValueError(f"unknown form {self.form_tag!r}")
        n = self.grid.size
        if self.matrix.shape != (n, n):
            raise GridMismatch(f"matrix shape {self.matrix.shape} does not match grid size {n}")

    def apply(self, v):
        values = v.values if isinstance(v, GridFunction) else np.asarray(v)
        return self.matrix @ values

    def transpose(self) -> "OperatorAssembly":
        return OperatorAssembly(self.matrix.T.tocsr(), self.grid, self.form_tag)

    def factor(self):
        if self._lu is None:
            try:
                self._lu = splu(self.matrix.tocsc())
            except RuntimeError as exc:
                raise SingularOperator(f"{self.form_tag} operator is singular: {exc}") from exc
        return self._lu


# --- building blocks ---------------------------------------------------------


def shift_matrix(n: int, s: int) -> sp.csr_matrix:
    """``(S v)_i = v_{i+s}``, zero beyond the grid."""
    return sp.eye(n, n, k=s, format="csr")


def derivative_matrix(grid: Grid, n: int = 1, order: int = DEFAULT_DERIVATIVE_ORDER) -> sp.csr_matrix:
    """Centered ``d^n/dx^n`` stencil with zero extension (antisymmetric for n=1)."""
    weights = (FIRST_DERIVATIVE_WEIGHTS if n == 1 else SECOND_DERIVATIVE_WEIGHTS)[order]
    half = len(weights) // 2
    offsets = [j - half for j in range(len(weights)) if weights[j] != 0.0]
    diagonals = [weights[j + half] for j in offsets]
    size = grid.size
    return sp.diags(diagonals, offsets, shape=(size, size), format="csr") / grid.dx ** n


def _lattice_matrix(kernel: Kernel, h: float, grid: Grid, combine) -> sp.csr_matrix:
    n = grid.size
    out = sp.csr_matrix((n, n))
    for a, k in zip(kernel.array, kernel.ks):
        if a == 0.0:
            continue
        s = grid.index_offset(k * h)
        out = out + a * combine(shift_matrix(n, s), shift_matrix(n, -s), sp.eye(n, format="csr"), k * h)
    return out.tocsr()


def diffusion_matrix(kernel: Kernel, h: float, grid: Grid) -> sp.csr_matrix:
    return _lattice_matrix(kernel, h, grid, lambda p, m, I, kh: (p - 2.0 * I + m) / kh ** 2)


def transport_matrix(kernel: Kernel, h: float, grid: Grid) -> sp.csr_matrix:
    return _lattice_matrix(kernel, h, grid, lambda p, m, I, kh: (p - m) / (2.0 * kh))


def mean_matrix(kernel: Kernel, h: float, grid: Grid) -> sp.csr_matrix:
    return _lattice_matrix(kernel, h, grid, lambda p, m, I, kh: 0.5 * (p + m))


def weighted_diffusion_matrix(kernel: Kernel, h: float, grid: Grid, w: WeightProfile) -> sp.csr_matrix:
    """``v -> w^{-1} Del_{a,h}(w v)`` with exact ratios ``w(x +- kh)/w(x)``."""
    x = grid.x
    n = grid.size
    diagonals, offsets = [], []
    centre = np.zeros(n)
    for a, k in zip(kernel.array, kernel.ks):
        if a == 0.0:
            continue
        kh = k * h
        s = grid.index_offset(kh)
        coef = a / kh ** 2
        centre -= 2.0 * coef
        if s < n:
            diagonals.append(coef * w.ratio(x[: n - s], x[: n - s] + kh))
            offsets.append(s)
            diagonals.append(coef * w.ratio(x[s:], x[s:] - kh))
            offsets.append(-s)
    diagonals.append(centre)
    offsets.append(0)
    return sp.diags(diagonals, offsets, shape=(n, n), format="csr")


def _check_grid(phi_inf: GridFunction, grid: Grid | None) -> Grid:
    if grid is not None and not grid.compatible(phi_inf.grid):
        raise GridMismatch("phi_inf lives on a different grid")
    return phi_inf.grid


def _potential_parts(phi_inf, w, g, linearize_at_zero):
    x = phi_inf.grid.x
    if linearize_at_zero:
        gp = np.full_like(x, g.gprime0)
    else:
        gp = g.derivative_1(phi_inf.values)
    b = w.derivative_ratio(x, 1)
    b2 = w.derivative_ratio(x, 2)
    return x, gp, b, b2


# --- assemblies --------------------------------------------------------------


def assemble_direct(phi_inf: GridFunction, w: WeightProfile | None, kernel: Kernel, h: float,
                    c: float, g: Nonlinearity, *, linearize_at_zero: bool = False,
                    grid: Grid | None = None) -> OperatorAssembly:
    """``v -> w^{-1}(Del(w v) + c (w v)' + g'(phi_inf) w v)``.

    ``w=None`` means ``w = 1``; ``linearize_at_zero`` replaces ``g'(phi_inf)``
    by ``g'(0)``, which turns the operator into ``A_h(0)``.
    """
    grid = _check_grid(phi_inf, grid)
    w = unit_weight() if w is None else w
    x, gp, b, _ = _potential_parts(phi_inf, w, g, linearize_at_zero)
    D = derivative_matrix(grid)
    M = weighted_diffusion_matrix(kernel, h, grid, w) + c * (D + sp.diags(b)) + sp.diags(gp)
    return OperatorAssembly(M.tocsr(), grid, "direct")


def assemble_expanded(phi_inf: GridFunction, w: WeightProfile | None, kernel: Kernel, h: float,
                      c: float, g: Nonlinearity, *, linearize_at_zero: bool = False,
                      grid: Grid | None = None) -> OperatorAssembly:
    grid = _check_grid(phi_inf, grid)
    w = unit_weight() if w is None else w
    x, gp, b, b2 = _potential_parts(phi_inf, w, g, linearize_at_zero)
    D = derivative_matrix(grid)
    M = (diffusion_matrix(kernel, h, grid) + c * D
         + 2.0 * sp.diags(b) @ transport_matrix(kernel, h, grid)
         + sp.diags(gp + c * b) + sp.diags(b2) @ mean_matrix(kernel, h, grid))
    return OperatorAssembly(M.tocsr(), grid, "expanded")


def assemble_adjoint_expanded(phi_inf: GridFunction, w: WeightProfile | None, kernel: Kernel,
                              h: float, c: float, g: Nonlinearity, *,
                              linearize_at_zero: bool = False,
                              grid: Grid | None = None) -> OperatorAssembly:
    """Expanded form of the adjoint, without its O(h) remainder.

    The ``-2 (w'/w)'`` correction multiplies ``M0 v`` rather than ``v``; the
    two differ by ``O(h) ||v'||`` only, and the ``M0`` placement keeps the
    remainder ``O(h)`` in L2 for rough ``v`` as well.
    """
    grid = _check_grid(phi_inf, grid)
    w = unit_weight() if w is None else w
    x, gp, b, b2 = _potential_parts(phi_inf, w, g, linearize_at_zero)
    db = w.log_derivative_prime(x)
    D = derivative_matrix(grid)
    M = (diffusion_matrix(kernel, h, grid) - c * D
         - 2.0 * sp.diags(b) @ transport_matrix(kernel, h, grid)
         + sp.diags(gp + c * b) + sp.diags(b2 - 2.0 * db) @ mean_matrix(kernel, h, grid))
    return OperatorAssembly(M.tocsr(), grid, "adjoint_expanded")


def assemble_continuous(phi_inf: GridFunction, w: WeightProfile | None, c: float,
                        g: Nonlinearity, *, grid: Grid | None = None) -> OperatorAssembly:
    """Weighted continuum linearization ``w^{-1} A(phi_inf)(w v)``."""
    grid = _check_grid(phi_inf, grid)
    w = unit_weight() if w is None else w
    x, gp, b, b2 = _potential_parts(phi_inf, w, g, False)
    M = (derivative_matrix(grid, 2) + sp.diags(c + 2.0 * b) @ derivative_matrix(grid)
         + sp.diags(b2 + c * b + gp))
    return OperatorAssembly(M.tocsr(), grid, "continuous")


def assemble(form: str, phi_inf, w, kernel, h, c, g, **kw) -> OperatorAssembly:
    if form == "direct":
        return assemble_direct(phi_inf, w, kernel, h, c, g, **kw)
    if form == "expanded":
        return assemble_expanded(phi_inf, w, kernel, h, c, g, **kw)
    if form == "adjoint_expanded":
        return assemble_adjoint_expanded(phi_inf, w, kernel, h, c, g, **kw)
    if form == "continuous":
        return assemble_continuous(phi_inf, w, c, g, **kw)
    raise ValueError(f"unknown form {form!r}")


def potential(phi_inf: GridFunction, w: WeightProfile, c: float, g: Nonlinearity) -> np.ndarray:
    """``(w'/w)^2 + c w'/w + g'(phi_inf)``, the multiplier in Re<Lu, u>."""
    b = w.derivative_ratio(phi_inf.grid.x, 1)
    return b * b + c * b + g.derivative_1(phi_inf.values)


# --- solve -------------------------------------------------------------------


def solve_linear(op: OperatorAssembly, f, tol: float = SOLVE_TOL) -> GridFunction:
    """LU solve with one step of iterative refinement.

    Raises
    ------
    SingularOperator
        if the factorization fails or the refined residual exceeds
        ``tol * ||f||``.
    """
    rhs = f.values if isinstance(f, GridFunction) else np.asarray(f, dtype=float)
    lu = op.factor()
    v = lu.solve(rhs)
    r = rhs - op.matrix @ v
    v = v + lu.solve(r)
    res = np.linalg.norm(rhs - op.matrix @ v)
    scale = np.linalg.norm(rhs)
    if not np.all(np.isfinite(v)) or res > tol * max(scale, 1e-300):
        raise SingularOperator(f"relative residual {res / max(scale, 1e-300):.3e} after refinement")
    return GridFunction(op.grid, v)


# --- spectral diagnostics ----------------------------------------------------


def h1_gram(grid: Grid) -> sp.csr_matrix:
    """``I + D^T D`` (the common factor ``dx`` cancels in every quotient)."""
    D = derivative_matrix(grid)
    return (sp.eye(grid.size, format="csr") + D.T @ D).tocsr()


def h1_norm(v, grid: Grid) -> float:
    vals = v.values if isinstance(v, GridFunction) else np.asarray(v)
    return float(np.sqrt(grid.dx * vals @ (h1_gram(grid) @ vals)))


def lambda_probe(op: OperatorAssembly, adjoint: bool = False) -> float:
    """``min_v ||L v||_{L2} / ||v||_{H1}`` from the pencil ``(L^T L, G)``.

    With ``adjoint=True`` the transpose (exact discrete adjoint) is probed.
    Dense generalized eigensolver below 2000 unknowns, shift-invert Lanczos
    at zero (through the LU factors of ``L``) above.
    """
    A = op.matrix.T.tocsr() if adjoint else op.matrix
    G = h1_gram(op.grid)
    n = op.grid.size
    if n < DENSE_LIMIT:
        Ad = A.toarray()
        lam = scipy.linalg.eigh(Ad.T @ Ad, G.toarray(), eigvals_only=True, subset_by_index=[0, 0])[0]
        return float(np.sqrt(max(lam, 0.0)))
    try:
        lu = splu(A.tocsc())
    except RuntimeError as exc:
        raise SingularOperator(str(exc)) from exc
    # (A^T A)^{-1} y = A^{-1} A^{-T} y
    opinv = LinearOperator((n, n), matvec=lambda y: lu.solve(lu.solve(np.ravel(y), trans="T")),
                           dtype=float)
    AtA = LinearOperator((n, n), matvec=lambda y: A.T @ (A @ np.ravel(y)), dtype=float)
    try:
        lam = eigsh(AtA, k=1, M=G, sigma=0.0, which="LM", OPinv=opinv, tol=1e-10,
                    maxiter=5000, return_eigenvectors=False)[0]
    except ArpackNoConvergence as exc:
        raise EigSolverNoConvergence(str(exc)) from exc
    return float(np.sqrt(max(lam, 0.0)))


def _smooth_probes(grid: Grid, count: int, modes: int, rng) -> np.ndarray:
    L = grid.half_length
    x = grid.x
    j = np.arange(1, modes + 1)
    basis = np.sin(np.outer(x + L, j) * np.pi / (2.0 * L))
    decay = 1.0 / j
    coef = (rng.standard_normal((modes, count)) + 1j * rng.standard_normal((modes, count)))
    return basis @ (coef * decay[:, None])


def numerical_range_margin(op: OperatorAssembly, seed: int = 0, n_random: int = 200,
                           n_lanczos: int = 50, transport_bound: float | None = None) -> float:
    """Certified distance of the numerical range from the imaginary axis.

    With ``C = sup_x |transport coefficient|`` the numerical range of a
    sectorial operator whose potential is at most ``-delta`` satisfies
    ``Re q <= -delta - (Im q)^2 / C^2``. ``C`` defaults to an estimate read
    off the antisymmetric part of the matrix. The returned margin is the smallest
    value of ``-Re q - (Im q)^2 / C^2`` over the leading eigenvectors of the
    symmetric part (Lanczos, shift-invert at 0) and ``n_random`` smooth random
    complex probes.

    Raises
    ------
    NonPositiveMargin
        if the margin is not positive.
    """
    A = op.matrix
    S = (0.5 * (A + A.T)).tocsc()
    n = op.grid.size
    k = min(n_lanczos, n - 2)
    try:
        vals, vecs = eigsh(S, k=k, sigma=0.0, which="LM", tol=1e-10)
    except ArpackNoConvergence as exc:
        raise EigSolverNoConvergence(str(exc)) from exc
    rng = np.random.default_rng(seed)
    probes = np.concatenate([vecs.astype(complex), _smooth_probes(op.grid, n_random, 40, rng)], axis=1)
    Au = A @ probes
    q = np.einsum("ij,ij->j", np.conj(probes), Au) / np.einsum("ij,ij->j", np.conj(probes), probes)
    if transport_bound is None:
        # antisymmetric part ~ (transport coefficient) * D, compare row sums
        K = (0.5 * (A - A.T)).tocsr()
        Dnorm = float(np.abs(derivative_matrix(op.grid)).sum(axis=1).max())
        transport_bound = float(np.abs(K).sum(axis=1).max()) / Dnorm
    C = max(transport_bound, 1e-12)
    margins = -q.real - q.imag ** 2 / C ** 2
    delta = float(min(-vals.max(), margins.min()))
    if not delta > 0.0:
        raise NonPositiveMargin(f"numerical range reaches Re z = {-delta:.3e} >= 0")
    return delta


@dataclass(frozen=True)
class SpectralReport:
    h: float
    c: float
    kernel_id: str
    lambda_h: float
    lambda_h_adjoint: float
    numerical_range_margin: float

    HEADER = ("h", "c", "kernel_id", "lambda_h", "lambda_h_adjoint", "range_margin")

    def row(self):
        return (self.h, self.c, self.kernel_id, self.lambda_h, self.lambda_h_adjoint,
                self.numerical_range_margin)

    def append_to(self, path) -> None:
        append_csv_row(path, self.HEADER, self.row())
