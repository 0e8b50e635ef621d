"""Discrete front ``phi_h = phi_inf + w v`` by the weighted fixed point.

Pipeline for one ``(g, c, kernel, h)``:

1. ``kappa(h)`` from ``G(h, kappa) = 0``;
2. far field ``phi_inf = 1_- + w0 + 1_+ A exp(-kappa(h) x)``;
3. residual ``R = w^{-1}(A_h(0)(phi_inf - E) + T_2(0, phi_inf))`` with the
   exact tail ``E = A exp(-kappa(h) x)`` removed analytically, since
   ``A_h(0) E = 0``;
4. Picard iteration for ``0 = R + L_h v + Q(v)``, i.e.
   ``v <- -L_h^{-1}(R + Q(v))`` from ``v = 0``;
5. reconstruction and an unweighted check of the profile equation.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .continuum import (ContinuousFront, FarFieldDecomposition, ThetaChoice, choose_theta,
                        decompose_front, left_decay_rate, smooth_step, solve_continuous_front, spatial_decay_rate)
from .errors import (AmplitudeTooLarge, NoAdmissibleTheta, DerivativeNearZero, LeftBall, NewtonDiverged,
                     NotContracting, ResidualGrowth, VerificationFailure)
from .grid import (FIRST_DERIVATIVE_WEIGHTS, Grid, GridFunction, Tail, exp_symbol_diffusion,
                   l2_norm, sup_norm)
from .io import write_csv, write_json
from .linear import (OperatorAssembly, SpectralReport, assemble_continuous, assemble_direct, lambda_probe,
                     numerical_range_margin, solve_linear)
from .model import Kernel, Nonlinearity, taylor_remainder
from .weight import WeightProfile, build_weight, default_epsilon

G_TOL = 1e-13
NEWTON_MAX_ITER = 50
DERIVATIVE_FLOOR = 1e-10
PICARD_TOL = 1e-12
PICARD_MAX_ITER = 100
BALL_RADIUS = 0.1
HETEROCLINIC_TOL = 1e-6
# tail growth below these levels is ODE round-off amplified by 1/w
GROWTH_FRACTION = 0.1
GROWTH_FLOOR = 1e-6


# --- decay rate ----------------------------------------------------------------


def dispersion(kernel: Kernel, h: float, c: float, gprime0: float, kappa: float) -> float:
    """``G(h, kappa) = g'(0) - c kappa + sum_k a_k (e^{-kappa kh} - 2 + e^{kappa kh})/(kh)^2``."""
    return gprime0 - c * kappa + exp_symbol_diffusion(kernel, h, kappa)


def dispersion_slope(kernel: Kernel, h: float, c: float, kappa: float) -> float:
    kh = kernel.ks * h
    return float(-c + np.sum(kernel.array * 2.0 * np.sinh(kappa * kh) / kh))


def kappa_expansion_coefficient(kernel: Kernel, c: float, gprime0: float) -> float:
    """Leading coefficient of ``kappa(h) - kappa0 ~ coefficient * h^2``."""
    k0 = spatial_decay_rate(c, gprime0)
    return k0 ** 4 * kernel.second_moment / (12.0 * (c - 2.0 * k0))


@dataclass(frozen=True)
class DecayRateSolution:
    h: float
    kappa_h: float
    residual_G: float
    newton_iterations: int


def _bisect(fun, lo, hi, tol=1e-15, max_iter=200):
    flo = fun(lo)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = fun(mid)
        if fm == 0.0 or hi - lo < tol * max(1.0, abs(mid)):
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_decay_rate(kernel: Kernel, h: float, c: float, gprime0: float,
                     tol: float = G_TOL) -> DecayRateSolution:
    """Newton's method for ``G(h, kappa) = 0`` started at ``kappa0``.

    Falls back to bisection on ``[kappa0/2, min(2 kappa0, c/2)]`` when Newton
    leaves that bracket and the bracket has a sign change.

    Raises
    ------
    DerivativeNearZero
        if ``|dG/dkappa|`` drops below ``1e-10``.
    NewtonDiverged
        if neither Newton nor the bracket fallback reaches ``|G| <= tol``.
    """
    k0 = spatial_decay_rate(c, gprime0)
    G = lambda k: dispersion(kernel, h, c, gprime0, k)
    lo, hi = 0.5 * k0, min(2.0 * k0, 0.5 * c)
    kappa = k0
    for it in range(1, NEWTON_MAX_ITER + 1):
        slope = dispersion_slope(kernel, h, c, kappa)
        if abs(slope) < DERIVATIVE_FLOOR:
            raise DerivativeNearZero(f"dG/dkappa = {slope:.3e} at kappa = {kappa:.12g}")
        step = G(kappa) / slope
        kappa -= step
        if not (np.isfinite(kappa) and lo <= kappa <= hi):
            break
        if abs(G(kappa)) <= tol and abs(step) <= 1e-15 * max(1.0, kappa):
            return DecayRateSolution(h, float(kappa), float(G(kappa)), it)
        if abs(step) <= 1e-16 * max(1.0, kappa):
            break
    if lo <= kappa <= hi and np.isfinite(kappa) and abs(G(kappa)) <= tol:
        return DecayRateSolution(h, float(kappa), float(G(kappa)), it)
    if G(lo) * G(hi) < 0.0:
        kb = _bisect(G, lo, hi)
        if abs(G(kb)) <= tol:
            return DecayRateSolution(h, float(kb), float(G(kb)), it)
    raise NewtonDiverged(f"no root of G(h={h}, .) with |G| <= {tol:g}", last_iterate=float(kappa))


# --- far field -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FarField:
    """``phi_inf = 1_- + w0 + 1_+ A exp(-kappa_h x)``, evaluable on the whole line."""

    decomposition: FarFieldDecomposition
    kappa_h: float

    @property
    def amplitude(self) -> float:
        return self.decomposition.amplitude

    def tail(self, x, n: int = 0):
        """n-th derivative of ``E = A exp(-kappa_h x)``."""
        x = np.asarray(x, dtype=float)
        return self.amplitude * (-self.kappa_h) ** n * np.exp(-self.kappa_h * x)

    def evaluate(self, x, n: int = 0):
        dec = self.decomposition
        return dec.w0(x, n) + dec.indicator_part(x, n, self.kappa_h)

    def localized(self, x, n: int = 0):
        """n-th derivative of ``phi_inf - E = 1_- (1 - E) + w0``."""
        x = np.asarray(x, dtype=float)
        m = smooth_step(x, 2)
        one_minus_e = [1.0 - self.tail(x), -self.tail(x, 1), -self.tail(x, 2)]
        prod = sum(math.comb(n, j) * m[j] * one_minus_e[n - j] for j in range(n + 1))
        return self.decomposition.w0(x, n) + prod

    def sample(self, grid: Grid) -> GridFunction:
        dec = self.decomposition
        front = dec.front
        L = grid.half_length
        left = Tail(1.0, ((float(dec.w0(-L)), -front.left_rate),))
        right = Tail(0.0, ((float(self.tail(L)), self.kappa_h),
                           (float(dec.w0(L)), front.kappa0 + front.next_exponent)))
        return GridFunction(grid, self.evaluate(grid.x), left, right)


def build_far_field(dec: FarFieldDecomposition, kappa_h: float, grid: Grid) -> GridFunction:
    """Samples of ``phi_inf`` with analytic tails (constant 1 left, exponential right)."""
    return FarField(dec, kappa_h).sample(grid)


# --- residual and quadratic term ------------------------------------------------


def _lattice_apply(fun, x, kernel: Kernel, h: float):
    """``sum_k a_k (f(x+kh) - 2 f(x) + f(x-kh)) / (kh)^2`` by direct evaluation."""
    centre = fun(x)
    out = np.zeros_like(centre)
    for a, k in zip(kernel.array, kernel.ks):
        if a != 0.0:
            kh = k * h
            out += a * (fun(x + kh) - 2.0 * centre + fun(x - kh)) / kh ** 2
    return out


def residual(far: FarField, w: WeightProfile, kernel: Kernel, h: float, c: float,
             g: Nonlinearity, grid: Grid, growth_check: bool = True) -> GridFunction:
    """``R = w^{-1}(A_h(0)(phi_inf - E) + T_2(0, phi_inf))`` on the grid.

    Raises
    ------
    ResidualGrowth
        if ``|R|`` near ``x = L`` exceeds its size around ``x = L/2``, the
        signature of a mismatched ``kappa_h``.
    """
    G = dispersion(kernel, h, c, g.gprime0, far.kappa_h)
    if abs(G) > 1e-12:
        raise ResidualGrowth(f"G(h, kappa_h) = {G:.3e}: the exponential tail is not annihilated")
    x = grid.x
    phi = far.evaluate(x)
    T2 = taylor_remainder(g, 2, np.zeros_like(phi), phi)
    # E is huge for x << 0, so it is only subtracted on the right half
    left = x <= 0.0
    AU = np.empty_like(x)
    xl, xr = x[left], x[~left]
    AU[left] = (_lattice_apply(far.evaluate, xl, kernel, h) + c * far.evaluate(xl, 1)
                + g.gprime0 * phi[left])
    AU[~left] = (_lattice_apply(far.localized, xr, kernel, h) + c * far.localized(xr, 1)
                 + g.gprime0 * far.localized(xr))
    R = (AU + T2) / w(x)
    if growth_check:
        L = grid.half_length
        outer = np.abs(R[x >= 0.8 * L]).max()
        middle = np.abs(R[(x >= 0.4 * L) & (x <= 0.6 * L)]).max()
        if outer > middle and outer > max(GROWTH_FRACTION * np.abs(R).max(), GROWTH_FLOOR):
            raise ResidualGrowth(f"|R| grows toward +L ({middle:.3e} -> {outer:.3e})")
    return GridFunction(grid, R)


def residual_decay_fit(R: GridFunction, x_min: float = 1.0, x_max: float | None = None,
                       bins: int = 20):
    """Fit ``|R(x)| <= C exp(-eta |x|)`` on both half-lines.

    Binned maxima of ``|R|`` over ``x_min <= |x| <= x_max`` (default ``L/3``)
    are fitted in log scale; ``C`` is then the smallest constant making the
    bound hold on the whole fitting window. Returns ``(eta, C)`` with ``eta``
    the smaller of the two one-sided rates.
    """
    x = R.grid.x
    x_max = R.grid.half_length / 3.0 if x_max is None else x_max
    etas = []
    for sign in (-1.0, 1.0):
        edges = np.linspace(x_min, x_max, bins + 1)
        centres, peaks = [], []
        for a, b in zip(edges[:-1], edges[1:]):
            sel = (sign * x >= a) & (sign * x < b)
            if np.any(sel):
                peak = np.abs(R.values[sel]).max()
                if peak > 0.0:
                    centres.append(0.5 * (a + b))
                    peaks.append(peak)
        if len(peaks) >= 3:
            etas.append(-np.polyfit(centres, np.log(peaks), 1)[0])
    eta = float(min(etas)) if etas else 0.0
    window = (np.abs(x) >= x_min) & (np.abs(x) <= x_max)
    C = float(np.max(np.abs(R.values[window]) * np.exp(eta * np.abs(x[window]))))
    return eta, C


def quadratic_term(v, phi_inf: GridFunction, w: WeightProfile, g: Nonlinearity) -> GridFunction:
    """``Q(v) = w^{-1} T_2(phi_inf, w v)``.

    Raises
    ------
    AmplitudeTooLarge
        if ``||v||_inf > 1``.
    """
    vals = v.values if isinstance(v, GridFunction) else np.asarray(v, dtype=float)
    if np.max(np.abs(vals), initial=0.0) > 1.0:
        raise AmplitudeTooLarge(f"||v||_inf = {np.max(np.abs(vals)):.3e} > 1")
    x = phi_inf.grid.x
    wx = w(x)
    Q = taylor_remainder(g, 2, phi_inf.values, wx * vals) / wx
    return GridFunction(phi_inf.grid, Q)


# --- Picard ------------------------------------------------------------------


@dataclass(frozen=True)
class PicardDiagnostics:
    iterations: int
    contraction_ratio: float
    step_norms: tuple
    ball_radius: float
    final_sup: float


def _combined_norm(f: np.ndarray, dx: float) -> float:
    return float(np.sqrt(dx * f @ f) + np.max(np.abs(f), initial=0.0))


def picard_solve(Lh: OperatorAssembly, R, Q, max_iter: int = PICARD_MAX_ITER,
                 tol: float = PICARD_TOL, ball_radius: float = BALL_RADIUS):
    """Fixed point of ``v = -L_h^{-1}(R + Q(v))`` from ``v = 0``.

    ``Q`` maps a value array to a value array (or GridFunction). Stops when
    the step in ``||.||_{L2} + ||.||_inf`` is at most ``tol``; the contraction
    ratio is the median of successive step ratios.

    Raises
    ------
    LeftBall
        if an iterate leaves ``||v||_inf <= ball_radius``.
    NotContracting
        if the step ratio is not below one or ``max_iter`` is exhausted.
    """
    dx = Lh.grid.dx
    r = R.values if isinstance(R, GridFunction) else np.asarray(R, dtype=float)
    v = np.zeros_like(r)
    steps = []
    for it in range(1, max_iter + 1):
        q = Q(v)
        q = q.values if isinstance(q, GridFunction) else np.asarray(q)
        new = -solve_linear(Lh, r + q).values
        sup = float(np.max(np.abs(new), initial=0.0))
        if sup > ball_radius:
            raise LeftBall(f"iterate {it} has ||v||_inf = {sup:.3e} > {ball_radius:g}")
        step = _combined_norm(new - v, dx)
        steps.append(step)
        v = new
        if step <= tol:
            break
        if len(steps) >= 4 and np.median(np.array(steps[-3:]) / np.array(steps[-4:-1])) >= 1.0:
            raise NotContracting(f"step norms stopped decreasing: {steps[-4:]}")
    else:
        raise NotContracting(f"no convergence to {tol:g} in {max_iter} iterations "
                             f"(last step {steps[-1]:.3e})")
    ratios = [b / a for a, b in zip(steps[:-1], steps[1:]) if a > 0.0]
    ratio = float(np.median(ratios)) if ratios else 0.0
    if ratio >= 1.0:
        raise NotContracting(f"contraction ratio {ratio:.3f} >= 1")
    diag = PicardDiagnostics(it, ratio, tuple(steps), ball_radius, float(np.max(np.abs(v), initial=0.0)))
    return GridFunction(Lh.grid, v), diag


# --- verification ------------------------------------------------------------


def profile_residual_values(values: np.ndarray, grid: Grid, outside, kernel: Kernel, h: float,
                            c: float, g: Nonlinearity) -> np.ndarray:
    """``Del_{a,h} phi + c phi' + g(phi)`` at the grid points.

    ``outside(x)`` supplies the profile beyond ``[-L, L]`` for the lattice
    shifts and the derivative stencil.
    """
    weights = FIRST_DERIVATIVE_WEIGHTS[8]
    half = len(weights) // 2
    pad = max(max(grid.index_offset(k * h) for k in kernel.ks), half)
    n = grid.size
    dx = grid.dx
    L = grid.half_length
    left = outside(-L - dx * np.arange(pad, 0, -1))
    right = outside(L + dx * np.arange(1, pad + 1))
    ext = np.concatenate([left, values, right])
    centre = ext[pad: pad + n]
    lap = np.zeros(n)
    for a, k in zip(kernel.array, kernel.ks):
        if a != 0.0:
            s = grid.index_offset(k * h)
            lap += a * (ext[pad + s: pad + s + n] - 2.0 * centre + ext[pad - s: pad - s + n]) / (k * h) ** 2
    d1 = np.zeros(n)
    for j, wgt in enumerate(weights):
        if wgt != 0.0:
            o = j - half
            d1 += wgt * ext[pad + o: pad + o + n]
    d1 /= dx
    return lap + c * d1 + g(centre)


def profile_residual(phi: GridFunction, kernel: Kernel, h: float, c: float, g: Nonlinearity,
                     outside=None) -> float:
    """L2 norm of the profile-equation defect; tails of ``phi`` fill the outside."""
    L = phi.grid.half_length
    if outside is None:
        outside = lambda y: np.where(y < 0, phi.left_tail(y), phi.right_tail(y))
    res = profile_residual_values(phi.values, phi.grid, outside, kernel, h, c, g)
    return float(np.sqrt(phi.grid.dx * res @ res))


@dataclass(frozen=True, eq=False)
class FrontSolution:
    phi_h: GridFunction
    v: GridFunction
    phi_infinity: GridFunction
    kappa_h: float
    c: float
    h: float
    picard_iterations: int
    contraction_ratio: float
    profile_residual_norm: float
    R_norm_L2: float = float("nan")
    R_norm_Linf: float = float("nan")
    weight: WeightProfile | None = None
    theta: float = float("nan")
    kernel_id: str = ""
    extras: dict = field(default_factory=dict)

    def summary(self) -> dict:
        out = {
            "h": self.h, "c": self.c, "kappa_h": self.kappa_h, "kernel_id": self.kernel_id,
            "picard_iterations": self.picard_iterations,
            "contraction_ratio": self.contraction_ratio,
            "profile_residual_norm": self.profile_residual_norm,
            "R_norm": self.R_norm_L2, "R_norm_L2": self.R_norm_L2, "R_norm_Linf": self.R_norm_Linf,
            "theta": self.theta, "half_length": self.phi_h.grid.half_length,
            "m": self.phi_h.grid.m, "v_sup": float(np.max(np.abs(self.v.values))),
        }
        out.update(self.extras)
        return out

    def write(self, csv_path, json_path=None) -> None:
        write_csv(csv_path, ["x", "phi_h", "v", "phi_inf"],
                  [self.phi_h.grid.x, self.phi_h.values, self.v.values, self.phi_infinity.values])
        if json_path is not None:
            write_json(json_path, self.summary())


def reconstruct_and_verify(far: FarField, phi_inf: GridFunction, w: WeightProfile, v: GridFunction,
                           kernel: Kernel, h: float, c: float, g: Nonlinearity,
                           threshold: float | None = None):
    """``phi_h = phi_inf + w v`` and the unweighted profile-equation defect.

    Beyond ``[-L, L]`` the correction vanishes (Dirichlet closure), so
    ``phi_h = phi_inf`` is evaluated exactly there.

    Raises
    ------
    VerificationFailure
        if the limits at ``-+L`` are off by more than ``1e-6`` or the defect
        exceeds ``threshold`` (default ``10 (dx^4 + 1e-10)``).
    """
    grid = phi_inf.grid
    x = grid.x
    vals = phi_inf.values + w(x) * v.values
    phi_h = phi_inf.with_values(vals)
    res = profile_residual_values(vals, grid, lambda y: far.evaluate(y), kernel, h, c, g)
    norm = float(np.sqrt(grid.dx * res @ res))
    if threshold is None:
        threshold = 10.0 * (grid.dx ** 4 + 1e-10)
    if abs(vals[0] - 1.0) > HETEROCLINIC_TOL or abs(vals[-1]) > HETEROCLINIC_TOL:
        raise VerificationFailure(f"limits not reached: phi_h(-L) = {vals[0]!r}, phi_h(L) = {vals[-1]!r}")
    if not norm <= threshold:
        raise VerificationFailure(f"profile residual {norm:.3e} above {threshold:.3e}")
    return phi_h, norm


# --- full pipeline -------------------------------------------------------------


@dataclass(frozen=True)
class SolverSettings:
    half_length: float | None = None
    m: int = 2
    epsilon: float | None = None
    tol: float = PICARD_TOL
    max_iter: int = PICARD_MAX_ITER
    ball_radius: float = BALL_RADIUS
    front_step: float = 0.01


def default_half_length(g: Nonlinearity, c: float) -> float:
    """``32 / min(kappa0, mu)``: far field below ~1e-14 at both ends.

    Larger domains only amplify the relative ODE error of the tail through
    ``w^{-1} ~ exp(theta x)`` without changing the solution.
    """
    return 32.0 / min(spatial_decay_rate(c, g.gprime0), left_decay_rate(c, g.gprime1))


@dataclass(frozen=True, eq=False)
class Configuration:
    """Everything that depends on ``(g, c)`` only, shared across ``h``."""

    g: Nonlinearity
    c: float
    front: ContinuousFront
    decomposition: FarFieldDecomposition
    theta: ThetaChoice
    weight: WeightProfile


def prepare(g: Nonlinearity, c: float, settings: SolverSettings = SolverSettings()) -> Configuration:
    L = settings.half_length or default_half_length(g, c)
    front = solve_continuous_front(g, c, half_length=L, step=settings.front_step)
    dec = decompose_front(front)
    theta = choose_theta(c, g.gprime0, front.kappa0, dec.delta)
    eps = settings.epsilon if settings.epsilon is not None else default_epsilon(theta.margin_spectral)
    w = build_weight(theta.theta, eps)
    if not c - 2.0 * theta.theta - 2.0 * w.distance_w1 > 0.0:
        raise NoAdmissibleTheta("transport coercivity c - 2 theta - 2 eps is not positive")
    return Configuration(g, c, front, dec, theta, w)


def solve_front(config: Configuration, kernel: Kernel, h: float,
                settings: SolverSettings = SolverSettings()) -> FrontSolution:
    g, c, w = config.g, config.c, config.weight
    L = settings.half_length or config.front.profile.grid.half_length
    grid = Grid(L, h, settings.m)
    rate = solve_decay_rate(kernel, h, c, g.gprime0)
    far = FarField(config.decomposition, rate.kappa_h)
    phi_inf = far.sample(grid)
    R = residual(far, w, kernel, h, c, g, grid)
    Lh = assemble_direct(phi_inf, w, kernel, h, c, g)
    v, diag = picard_solve(Lh, R, lambda u: quadratic_term(u, phi_inf, w, g),
                           max_iter=settings.max_iter, tol=settings.tol,
                           ball_radius=settings.ball_radius)
    phi_h, res = reconstruct_and_verify(far, phi_inf, w, v, kernel, h, c, g)
    eta, eta_C = residual_decay_fit(R)
    extras = {"kappa0": config.front.kappa0, "residual_eta": eta, "residual_eta_C": eta_C,
              "kappa_h_minus_kappa0_over_h2": (rate.kappa_h - config.front.kappa0) / h ** 2,
              "newton_iterations": rate.newton_iterations, "residual_G": rate.residual_G,
              "epsilon": w.epsilon, "mollifier_width": w.width}
    return FrontSolution(phi_h, v, phi_inf, rate.kappa_h, c, h, diag.iterations,
                         diag.contraction_ratio, res, l2_norm(R), sup_norm(R), w,
                         config.theta.theta, kernel.kernel_id, extras)


def spectral_probe(config: Configuration, kernel: Kernel, h: float,
                   half_length: float | None = None, m: int = 2, seed: int = 0,
                   n_random: int = 200) -> SpectralReport:
    """``Lambda(h)``, ``Lambda^ad(h)`` and the numerical-range margin of ``L_h``.

    The probe domain defaults to the solve domain. Dirichlet walls raise
    ``Lambda`` on short domains (0.50 at ``L = 12.5`` against 0.12 at the
    default ``L`` for Fisher, ``c = 3``), so only the solve domain bounds
    the inverse actually used.
    """
    if half_length is None:
        half_length = config.front.profile.grid.half_length
    grid = Grid(half_length, h, m)
    rate = solve_decay_rate(kernel, h, config.c, config.g.gprime0)
    phi_inf = FarField(config.decomposition, rate.kappa_h).sample(grid)
    Lh = assemble_direct(phi_inf, config.weight, kernel, h, config.c, config.g)
    # the margin belongs to the continuous operator; a sign-changing kernel has
    # positive symbol near pi/h, so the discrete numerical range is not sectorial
    Lc = assemble_continuous(phi_inf, config.weight, config.c, config.g)
    margin = numerical_range_margin(Lc, seed=seed, n_random=n_random, transport_bound=config.c)
    return SpectralReport(h, config.c, kernel.kernel_id, lambda_probe(Lh),
                          lambda_probe(Lh, adjoint=True), margin)
