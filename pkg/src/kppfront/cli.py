"""Command-line driver: ``kppfront {solve,sweep,simulate,probe,identities}``.

Exit codes: 0 success, 1 failed identity table, 2 invalid input, 3 solver
failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .config import RunConfig
from .errors import KPPFrontError, SolverError, ValidationError
from .front import Configuration, prepare, solve_front, spectral_probe
from .identities import run_suite
from .io import read_csv, write_csv, write_json
from .lattice import simulate_profile
from .linear import SpectralReport

log = logging.getLogger("kppfront")

EXIT_OK, EXIT_FAILED, EXIT_INVALID, EXIT_SOLVER = 0, 1, 2, 3

SWEEP_HEADER = ("h", "kappa_h", "kappa_h_minus_kappa0_over_h2", "R_norm_L2", "R_norm_Linf",
                "lambda_h", "lambda_h_adjoint", "contraction_ratio", "profile_residual",
                "measured_speed")


class SolveFailure(Exception):
    def __init__(self, h, cause):
        super().__init__(f"h = {h}: {type(cause).__name__}: {cause}")
        self.h = h
        self.cause = cause


def _tag(h: float) -> str:
    return f"h{h:.6g}"


def _profile_callable(x, values):
    """Cubic interpolant of stored samples, constant beyond the ends."""
    spline = CubicSpline(x, values)

    def profile(y):
        y = np.asarray(y, dtype=float)
        return np.where(y < x[0], values[0], np.where(y > x[-1], values[-1], spline(y)))

    return profile


def _simulate(cfg: RunConfig, g, kernel, x, values, h):
    return simulate_profile(_profile_callable(x, values), kernel, g, h, float(cfg.c),
                            T=cfg.sim.T, dt=cfg.sim.dt, J=cfg.sim.J)


def _solve_one(cfg: RunConfig, config: Configuration | None, h: float, with_probe: bool,
               with_sim: bool):
    """One sweep entry; exceptions are wrapped with the failing ``h``."""
    try:
        g, kernel = cfg.validate()
        if config is None:
            config = prepare(g, float(cfg.c), cfg.settings())
        sol = solve_front(config, kernel, h, cfg.settings())
        out = Path(cfg.output)
        summary = sol.summary()
        report = None
        if with_probe:
            report = spectral_probe(config, kernel, h, cfg.probe.half_length, cfg.grid.m,
                                    cfg.seed, cfg.probe.n_random)
            summary.update(lambda_h=report.lambda_h, lambda_h_adjoint=report.lambda_h_adjoint,
                           range_margin=report.numerical_range_margin)
        speed = float("nan")
        if with_sim:
            sim, _ = _simulate(cfg, g, kernel, sol.phi_h.grid.x, sol.phi_h.values, h)
            speed = sim.speed
            summary.update(measured_speed=sim.speed, shape_error=sim.shape_error)
        summary["config"] = cfg.to_dict()
        sol.write(out / f"front_{_tag(h)}.csv")
        write_json(out / f"front_{_tag(h)}.json", summary)
        return sol, report, speed
    except KPPFrontError as exc:
        raise SolveFailure(h, exc) from exc


def _run_entries(cfg: RunConfig, jobs: int, with_probe: bool, with_sim: bool):
    hs = [float(h) for h in cfg.h_list]
    if jobs <= 1 or len(hs) == 1:
        g, _ = cfg.validate()
        try:
            config = prepare(g, float(cfg.c), cfg.settings())
        except SolverError as exc:
            raise SolveFailure(hs[0], exc) from exc
        return [_solve_one(cfg, config, h, with_probe, with_sim) for h in hs]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(_solve_one, cfg, None, h, with_probe, with_sim) for h in hs]
        return [f.result() for f in futures]


def cmd_solve(cfg: RunConfig, jobs: int = 1) -> int:
    results = _run_entries(cfg, jobs, with_probe=False, with_sim=False)
    for sol, _, _ in results:
        log.info("h=%g: %d Picard steps, profile residual %.3e", sol.h, sol.picard_iterations,
                 sol.profile_residual_norm)
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, jobs: int = 1) -> int:
    results = _run_entries(cfg, jobs, with_probe=True, with_sim=cfg.sim.in_sweep)
    rows = []
    for sol, rep, speed in results:
        rows.append((sol.h, sol.kappa_h, sol.extras["kappa_h_minus_kappa0_over_h2"], sol.R_norm_L2,
                     sol.R_norm_Linf, rep.lambda_h, rep.lambda_h_adjoint, sol.contraction_ratio,
                     sol.profile_residual_norm, speed))
    out = Path(cfg.output)
    write_csv(out / "sweep.csv", SWEEP_HEADER, rows=rows)
    write_json(out / "sweep_config.json", cfg.to_dict())
    return EXIT_OK


def cmd_probe(cfg: RunConfig, jobs: int = 1) -> int:
    g, kernel = cfg.validate()
    try:
        config = prepare(g, float(cfg.c), cfg.settings())
        reports = [spectral_probe(config, kernel, float(h), cfg.probe.half_length, cfg.grid.m,
                                  cfg.seed, cfg.probe.n_random) for h in cfg.h_list]
    except SolverError as exc:
        raise SolveFailure(float("nan"), exc) from exc
    write_csv(Path(cfg.output) / "spectral.csv", SpectralReport.HEADER,
              rows=[r.row() for r in reports])
    return EXIT_OK


def cmd_simulate(cfg: RunConfig, front_file) -> int:
    g, kernel = cfg.validate()
    try:
        data = read_csv(front_file)
        x = data["x"]
        values = data["phi_h"] if "phi_h" in data else data["value"]
    except (OSError, ValueError, KeyError) as exc:
        raise ValidationError(f"cannot read front file {front_file}: {exc}") from exc
    if x.size < 4 or np.any(np.diff(x) <= 0) or not np.all(np.isfinite(values)):
        raise ValidationError(f"{front_file}: x must be increasing and values finite")
    h = float(cfg.h_list[0])
    try:
        report, traj = _simulate(cfg, g, kernel, x, values, h)
    except SolverError as exc:
        raise SolveFailure(h, exc) from exc
    out = Path(cfg.output)
    report.write(out / f"simulate_{_tag(h)}.json")
    traj.write_snapshots(out / f"snapshots_{_tag(h)}.csv", stride=max(1, int(round(0.5 / h))))
    log.info("measured speed %.8g (c = %g), shape error %.3e", report.speed, cfg.c,
             report.shape_error)
    return EXIT_OK


def cmd_identities(seed: int = 0) -> int:
    results = run_suite(seed=seed)
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kppfront", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("solve", "sweep", "simulate", "probe", "identities"):
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="JSON run configuration")
        p.add_argument("--out", type=Path, help="output directory (overrides the config)")
        p.add_argument("--seed", type=int, help="seed for randomized probes")
        p.add_argument("--jobs", type=int, default=1, help="worker processes for h sweeps")
        p.add_argument("-v", "--verbose", action="store_true")
        if name == "simulate":
            p.add_argument("--front", type=Path, required=True, help="front CSV (x, phi_h)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = RunConfig.load(args.config) if args.config else RunConfig()
        if args.out is not None:
            cfg.output = str(args.out)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.command == "identities":
            return cmd_identities(cfg.seed)
        if args.command == "simulate":
            return cmd_simulate(cfg, args.front)
        command = {"solve": cmd_solve, "sweep": cmd_sweep, "probe": cmd_probe}[args.command]
        return command(cfg, jobs=max(1, args.jobs))
    except SolveFailure as exc:
        if isinstance(exc.cause, ValidationError):
            print(f"error: {type(exc.cause).__name__}: {exc.cause}", file=sys.stderr)
            return EXIT_INVALID
        print(f"solver failure at {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ValidationError, OSError, TypeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
