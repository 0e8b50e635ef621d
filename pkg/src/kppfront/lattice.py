"""Time integration of the lattice equation as an independent check of fronts.

``u_j' = sum_k a_k (u_{j+k} - 2 u_j + u_{j-k}) / (kh)^2 + g(u_j)`` on sites
``j = -J..J`` with clamped ends, integrated by classical RK4. A traveling
wave ``u_j(t) = phi_h(jh - ct)`` must move rigidly at speed ``c``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BlowUp, PoorFit, StabilityCapViolated, ValidationError
from .grid import diffusion_symbol
from .io import write_csv, write_json
from .model import Kernel, Nonlinearity

LOWER_GUARD, UPPER_GUARD = -0.1, 1.1
MIN_TRACK_SAMPLES = 50
BURN_IN_FRACTION = 0.2
MIN_R2 = 0.999
STABILITY_FACTOR = 0.8


@dataclass(frozen=True)
class LatticeState:
    u: np.ndarray
    h: float
    t: float = 0.0

    @property
    def J(self) -> int:
        return (self.u.size - 1) // 2

    @property
    def positions(self) -> np.ndarray:
        return (np.arange(self.u.size) - self.J) * self.h


def rhs(u, kernel: Kernel, h: float, g: Nonlinearity) -> np.ndarray:
    """Right-hand side with ``u`` extended by its end values."""
    u = np.asarray(u, dtype=float)
    K = kernel.K
    if u.size <= 2 * K:
        raise ValidationError(f"need more than {2 * K} sites for a kernel of length {K}")
    ext = np.concatenate([np.full(K, u[0]), u, np.full(K, u[-1])])
    n = u.size
    out = g(u)
    for a, k in zip(kernel.array, kernel.ks):
        if a != 0.0:
            out = out + a * (ext[K + k: K + k + n] - 2.0 * u + ext[K - k: K - k + n]) / (k * h) ** 2
    return out


def stability_cap(kernel: Kernel, h: float) -> float:
    """Largest admissible RK4 step: ``0.8 / |min symbol|``."""
    xi = np.linspace(0.0, np.pi / h, 4097)
    lo = float(np.min(diffusion_symbol(kernel, h, xi)))
    return STABILITY_FACTOR / abs(lo) if lo < 0 else np.inf


def level_crossing(u, positions, level: float = 0.5) -> float:
    """Leftmost downward crossing of ``level`` (linear interpolation), NaN if none."""
    above = u >= level
    idx = np.flatnonzero(above[:-1] & ~above[1:])
    if idx.size == 0:
        return float("nan")
    j = idx[0]
    u0, u1 = u[j], u[j + 1]
    return float(positions[j] + (u0 - level) / (u0 - u1) * (positions[j + 1] - positions[j]))


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    track: np.ndarray
    snapshot_times: np.ndarray
    snapshots: np.ndarray
    final: LatticeState
    dt: float

    def write_snapshots(self, path, stride: int = 1) -> None:
        x = self.final.positions[::stride]
        rows = [(t, xx, uu) for t, snap in zip(self.snapshot_times, self.snapshots)
                for xx, uu in zip(x, snap[::stride])]
        write_csv(path, ["t", "x", "u"], rows=rows)


def integrate(state: LatticeState, kernel: Kernel, g: Nonlinearity, dt: float, T: float,
              n_snapshots: int = 11, guard: bool = True) -> Trajectory:
    """Classical RK4 with a fixed step; the level-1/2 crossing is tracked every step.

    Raises
    ------
    StabilityCapViolated
        if ``dt`` exceeds :func:`stability_cap`.
    BlowUp
        if the solution leaves ``[-0.1, 1.1]`` (checked every step when
        ``guard`` is set).
    """
    cap = stability_cap(kernel, state.h)
    if dt > cap * (1 + 1e-12):
        raise StabilityCapViolated(f"dt = {dt:.3e} exceeds the stability cap {cap:.3e}")
    steps = int(round(T / dt))
    if steps < 1 or abs(steps * dt - T) > 1e-9 * T:
        raise ValidationError(f"T = {T} is not a multiple of dt = {dt}")
    h = state.h
    x = state.positions
    u = state.u.astype(float).copy()
    f = lambda w: rhs(w, kernel, h, g)
    snap_at = set(np.linspace(0, steps, n_snapshots).round().astype(int).tolist())
    times = np.empty(steps + 1)
    track = np.empty(steps + 1)
    snaps, snap_t = [], []
    times[0], track[0] = state.t, level_crossing(u, x)
    if 0 in snap_at:
        snaps.append(u.copy())
        snap_t.append(state.t)
    for n in range(1, steps + 1):
        k1 = f(u)
        k2 = f(u + 0.5 * dt * k1)
        k3 = f(u + 0.5 * dt * k2)
        k4 = f(u + dt * k3)
        u = u + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = state.t + n * dt
        if guard and not (np.all(np.isfinite(u)) and u.min() >= LOWER_GUARD and u.max() <= UPPER_GUARD):
            raise BlowUp(f"solution left [{LOWER_GUARD}, {UPPER_GUARD}] at t = {t:.4g} "
                         f"(min {np.nanmin(u):.3e}, max {np.nanmax(u):.3e})")
        times[n], track[n] = t, level_crossing(u, x)
        if n in snap_at:
            snaps.append(u.copy())
            snap_t.append(t)
    return Trajectory(times, track, np.array(snap_t), np.array(snaps),
                      LatticeState(u, h, state.t + steps * dt), dt)


def measure_speed(times, track, burn_in: float | None = None, min_r2: float = MIN_R2):
    """Least-squares slope of the crossing track after the burn-in.

    The burn-in defaults to one fifth of the time span. A track without any
    crossing, or with zero variance, is stationary: speed 0 and ``r^2 = 1``.

    Raises
    ------
    PoorFit
        if fewer than 50 samples remain or ``r^2 < min_r2``.
    """
    times = np.asarray(times, dtype=float)
    track = np.asarray(track, dtype=float)
    if burn_in is None:
        burn_in = BURN_IN_FRACTION * (times[-1] - times[0])
    sel = times >= times[0] + burn_in
    t, xs = times[sel], track[sel]
    if t.size < MIN_TRACK_SAMPLES:
        raise PoorFit(f"only {t.size} samples after burn-in, need {MIN_TRACK_SAMPLES}")
    if np.all(np.isnan(xs)):
        return 0.0, 1.0
    if np.any(np.isnan(xs)):
        raise PoorFit("level crossing lost during the run")
    if np.ptp(xs) == 0.0:
        return 0.0, 1.0
    slope, intercept = np.polyfit(t, xs, 1)
    resid = xs - (slope * t + intercept)
    ss_tot = float(np.sum((xs - xs.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot
    if r2 < min_r2:
        raise PoorFit(f"r^2 = {r2:.6f} below {min_r2}")
    return float(slope), float(r2)


@dataclass(frozen=True)
class SimulationReport:
    speed: float
    r2: float
    c: float
    h: float
    T: float
    dt: float
    shape_error: float
    J: int

    @property
    def relative_speed_error(self) -> float:
        return abs(self.speed - self.c) / self.c if self.c else abs(self.speed)

    def write(self, path) -> None:
        d = dict(self.__dict__)
        d["relative_speed_error"] = self.relative_speed_error
        write_json(path, d)


def simulate_profile(profile, kernel: Kernel, g: Nonlinearity, h: float, c: float,
                     T: float = 10.0, dt: float | None = None, J: int | None = None,
                     margin: float = 40.0):
    """Seed the lattice with ``u_j = profile(jh + cT/2)`` and run to ``T``.

    ``profile`` is any callable on the real line (e.g. a :class:`GridFunction`).
    The shape error compares ``u_j(T)`` with ``profile(jh - cT/2)`` on sites
    at least ``max(5 K, margin/2)`` away from both ends.
    """
    shift = 0.5 * c * T
    if J is None:
        J = int(np.ceil((shift + margin) / h))
    dt = stability_cap(kernel, h) if dt is None else dt
    steps = max(1, int(np.ceil(T / dt - 1e-9)))
    dt = T / steps
    x = (np.arange(2 * J + 1) - J) * h
    state = LatticeState(np.asarray(profile(x + shift), dtype=float), h)
    traj = integrate(state, kernel, g, dt, T)
    speed, r2 = measure_speed(traj.times, traj.track)
    keep = max(5 * kernel.K, int(np.ceil(0.5 * margin / h)))
    inner = slice(keep, x.size - keep)
    target = np.asarray(profile(x - shift), dtype=float)
    shape = float(np.max(np.abs(traj.final.u[inner] - target[inner])))
    return SimulationReport(speed, r2, c, h, T, dt, shape, J), traj
