"""Declarative run configuration (a single JSON document)."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .errors import CriticalOrSubcriticalSpeed, ValidationError
from .front import BALL_RADIUS, PICARD_MAX_ITER, PICARD_TOL, SolverSettings
from .model import Kernel, Nonlinearity, nonlinearity_from_spec, validate_kernel


@dataclass
class GridConfig:
    L: float | None = None  # None: 32 / min(kappa0, mu)
    m: int = 2


@dataclass
class WeightConfig:
    epsilon: float | None = None  # None: 0.1 min(1, spectral margin)


@dataclass
class SolverConfig:
    tol: float = PICARD_TOL
    max_iter: int = PICARD_MAX_ITER
    ball_radius: float = BALL_RADIUS
    front_step: float = 0.01


@dataclass
class SimConfig:
    dt: float | None = None  # None: stability cap
    T: float = 10.0
    J: int | None = None
    in_sweep: bool = False


@dataclass
class ProbeConfig:
    half_length: float | None = None  # None: solve domain
    n_random: int = 200


@dataclass
class RunConfig:
    nonlinearity: str | list = "fisher"
    kernel: list = field(default_factory=lambda: [1.0])
    c: float = 3.0
    h_list: list = field(default_factory=lambda: [0.1, 0.05, 0.025])
    grid: GridConfig = field(default_factory=GridConfig)
    weight: WeightConfig = field(default_factory=WeightConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    sim: SimConfig = field(default_factory=SimConfig)
    probe: ProbeConfig = field(default_factory=ProbeConfig)
    seed: int = 0
    output: str = "out"

    _SECTIONS = {"grid": GridConfig, "weight": WeightConfig, "solver": SolverConfig,
                 "sim": SimConfig, "probe": ProbeConfig}

    # --- serialization -----------------------------------------------------------
    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ValidationError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        kw = {}
        for key, value in data.items():
            section = cls._SECTIONS.get(key)
            if section is not None:
                if not isinstance(value, dict):
                    raise ValidationError(f"config section {key!r} must be an object")
                sub = {f.name for f in fields(section)}
                bad = set(value) - sub
                if bad:
                    raise ValidationError(f"unknown keys in {key!r}: {sorted(bad)}")
                kw[key] = section(**value)
            else:
                kw[key] = value
        return cls(**kw)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def load(cls, path) -> "RunConfig":
        return cls.from_json(Path(path).read_text())

    # --- interpretation ----------------------------------------------------------
    def build_nonlinearity(self) -> Nonlinearity:
        return nonlinearity_from_spec(self.nonlinearity)

    def build_kernel(self) -> Kernel:
        if not isinstance(self.kernel, (list, tuple)):
            raise ValidationError("kernel must be a JSON array of reals")
        return validate_kernel([float(a) for a in self.kernel])

    def settings(self) -> SolverSettings:
        return SolverSettings(half_length=self.grid.L, m=self.grid.m, epsilon=self.weight.epsilon,
                              tol=self.solver.tol, max_iter=self.solver.max_iter,
                              ball_radius=self.solver.ball_radius,
                              front_step=self.solver.front_step)

    def validate(self):
        """Check every invariant; returns ``(g, kernel)``.

        Raises
        ------
        ValidationError
            (or a subclass such as ``CriticalOrSubcriticalSpeed``) on the first
            violated invariant.
        """
        g = self.build_nonlinearity()
        kernel = self.build_kernel()
        c = float(self.c)
        if not c > 2.0 * math.sqrt(g.gprime0):
            raise CriticalOrSubcriticalSpeed(
                f"c = {c} must exceed 2 sqrt(g'(0)) = {2.0 * math.sqrt(g.gprime0)}")
        hs = list(self.h_list)
        if not hs:
            raise ValidationError("h_list is empty")
        if any(not h > 0 for h in hs):
            raise ValidationError("every h must be positive")
        if any(b >= a for a, b in zip(hs, hs[1:])):
            raise ValidationError("h_list must be strictly decreasing")
        positives = {"solver.tol": self.solver.tol, "solver.ball_radius": self.solver.ball_radius,
                     "solver.front_step": self.solver.front_step, "sim.T": self.sim.T}
        if self.weight.epsilon is not None:
            positives["weight.epsilon"] = self.weight.epsilon
        if self.sim.dt is not None:
            positives["sim.dt"] = self.sim.dt
        if self.grid.L is not None:
            positives["grid.L"] = self.grid.L
        if self.probe.half_length is not None:
            positives["probe.half_length"] = self.probe.half_length
        for name, value in positives.items():
            if not value > 0:
                raise ValidationError(f"{name} must be positive, got {value}")
        if int(self.grid.m) < 1 or int(self.solver.max_iter) < 1:
            raise ValidationError("grid.m and solver.max_iter must be at least 1")
        return g, kernel
