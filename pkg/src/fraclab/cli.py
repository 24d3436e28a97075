"""Command-line front end: seeded ensemble orchestration and artifact output.

Subcommands
-----------
fbm      generate fractional Brownian motion paths and a theory comparison
solve    solve one residual problem per ensemble member, emit reports + MSD
analyze  recompute MSD, slope fits, and volatility from a directory of paths
tune     step-size optimization table for the Monte Carlo solver

Data goes to files; progress goes to standard error.  Every command is a
deterministic function of its flags, config, and master seed: reruns are
byte-identical, for any worker count.

Exit codes: 0 success, 1 I/O failure, 2 usage/config error, 3 validation.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import subprocess
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__, analysis, runio
from .fbm import Hurst, fgn_from_fbm, generate_fbm, theory_msd_fbm
from .fraccalc import SampledPath
from .mcsolve import ResidualProblem, SolverConfig, solve, tune_step_size
from .models import (
    LangevinParams,
    MarketParams,
    make_langevin_problem,
    make_market_problem,
    make_memoryless_problem,
)

EXIT_OK = 0
EXIT_IO = 1
EXIT_USAGE = 2
EXIT_VALIDATION = 3

_MODEL_NAMES = ("langevin", "market", "memoryless", "noise-only")

_DEFAULT_CONFIG = {
    "params": {},
    "grid": {"n_steps": 1000, "t_end": 10.0},
    "solver": {
        "tolerance": 0.05,
        "max_steps": 2_000_000_000,
        "step_fraction": 0.001,
        "group_size": 4,
    },
    "windows": [],
}

_DEFAULT_PARAMS = {
    "langevin": {"mass": 1.0, "gamma": 1.0, "kbt": 1.0, "hurst": 0.75, "init_velocity": 0.0},
    "market": {"lam": 500.0, "beta": 1.0, "a": 1.0, "kbt": 1.0, "alpha": 0.5, "noise_scaling": "unit"},
    "memoryless": {"lam": 500.0, "beta": 1.0, "a": 1.0, "kbt": 1.0, "alpha": 0.5},
    "noise-only": {"hurst": 0.75},
}


class ConfigError(ValueError):
    pass


def _default_workers() -> int:
    env = os.environ.get("FRACLAB_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def _git_describe() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True,
            text=True,
            timeout=10,
            cwd=os.path.dirname(os.path.abspath(__file__)),
        )
        if out.returncode == 0:
            return out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    return f"fraclab-{__version__}"


def _load_config(spec: str, model: str, overrides: list[str]) -> dict:
    cfg = json.loads(json.dumps(_DEFAULT_CONFIG))  # deep copy
    cfg["params"] = dict(_DEFAULT_PARAMS[model])
    if spec != "defaults":
        try:
            with open(spec) as fh:
                user = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed config JSON: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError("config root must be a JSON object")
        for key in user:
            if key not in ("params", "grid", "solver", "windows", "model", "seeds"):
                raise ConfigError(f"unknown config key: {key!r}")
        for section in ("params", "grid", "solver"):
            sub = user.get(section, {})
            if not isinstance(sub, dict):
                raise ConfigError(f"config section {section!r} must be an object")
            cfg[section].update(sub)
        if "windows" in user:
            cfg["windows"] = user["windows"]
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--param expects key=value, got {item!r}")
        key, _, value = item.partition("=")
        try:
            cfg["params"][key] = json.loads(value)
        except json.JSONDecodeError:
            cfg["params"][key] = value
    _validate_config(cfg)
    return cfg


def _validate_config(cfg: dict) -> None:
    grid = cfg["grid"]
    if not (isinstance(grid.get("n_steps"), int) and grid["n_steps"] >= 2):
        raise ConfigError("grid.n_steps must be an integer >= 2")
    if not (isinstance(grid.get("t_end"), (int, float)) and grid["t_end"] > 0):
        raise ConfigError("grid.t_end must be positive")
    sol = cfg["solver"]
    for key in ("tolerance", "step_fraction"):
        if not (isinstance(sol.get(key), (int, float)) and sol[key] > 0):
            raise ConfigError(f"solver.{key} must be positive")
    for key in ("max_steps", "group_size"):
        if not (isinstance(sol.get(key), int) and sol[key] >= 1):
            raise ConfigError(f"solver.{key} must be a positive integer")
    if not isinstance(cfg["windows"], list):
        raise ConfigError("windows must be a list of [t_lo, t_hi] pairs")
    for w in cfg["windows"]:
        if not (isinstance(w, list) and len(w) == 2 and w[0] < w[1]):
            raise ConfigError(f"bad window {w!r}")


def _build_problem(model: str, cfg: dict, master_seed: int, index: int) -> ResidualProblem:
    p = cfg["params"]
    n_steps = cfg["grid"]["n_steps"]
    t_end = float(cfg["grid"]["t_end"])
    base = master_seed + index
    if model == "langevin":
        params = LangevinParams(
            mass=float(p["mass"]),
            gamma=float(p["gamma"]),
            kbt=float(p["kbt"]),
            hurst=Hurst(float(p["hurst"])),
            init_velocity=float(p.get("init_velocity", 0.0)),
        )
        return make_langevin_problem(params, n_steps, t_end, seed=base)
    if model == "market":
        params = MarketParams(
            lam=float(p["lam"]),
            beta=float(p["beta"]),
            a=float(p["a"]),
            kbt=float(p["kbt"]),
            alpha=float(p["alpha"]),
        )
        init_v = p.get("init_velocity")
        return make_market_problem(
            params,
            n_steps,
            t_end,
            seeds=(2 * base, 2 * base + 1),
            init_velocity=None if init_v is None else float(init_v),
            noise_scaling=p.get("noise_scaling", "unit"),
        )
    if model == "memoryless":
        params = MarketParams(
            lam=float(p["lam"]),
            beta=float(p["beta"]),
            a=float(p["a"]),
            kbt=float(p["kbt"]),
            alpha=float(p["alpha"]),
        )
        init_v = p.get("init_velocity")
        return make_memoryless_problem(
            params,
            n_steps,
            t_end,
            seed=base,
            init_velocity=None if init_v is None else float(init_v),
        )
    if model == "noise-only":
        fbm_path = generate_fbm(Hurst(float(p["hurst"])), n_steps, t_end, seed=base)
        xi = fgn_from_fbm(fbm_path)
        forcing = np.zeros(n_steps + 1)
        forcing[:n_steps] = xi.values
        return ResidualProblem(
            dt=t_end / n_steps,
            n_points=n_steps + 1,
            mass=1.0,
            friction=0.0,
            forcing=forcing,
        )
    raise ConfigError(f"unknown model {model!r}")


def _solver_config(cfg: dict, master_seed: int, index: int) -> SolverConfig:
    sol = cfg["solver"]
    return SolverConfig(
        tolerance=float(sol["tolerance"]),
        max_steps=int(sol["max_steps"]),
        step_fraction=float(sol["step_fraction"]),
        group_size=int(sol["group_size"]),
        seed=master_seed + 7919 * index + 1,
    )


def _solve_job(job):
    model, cfg, master_seed, index = job
    problem = _build_problem(model, cfg, master_seed, index)
    report = solve(problem, _solver_config(cfg, master_seed, index))
    return index, report


def _run_ensemble(model: str, cfg: dict, master_seed: int, n_paths: int, workers: int):
    jobs = [(model, cfg, master_seed, i) for i in range(n_paths)]
    reports = [None] * n_paths
    if workers <= 1:
        for job in jobs:
            i, rep = _solve_job(job)
            reports[i] = rep
            print(f"solved path {i + 1}/{n_paths}", file=sys.stderr)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for i, rep in pool.map(_solve_job, jobs):
                reports[i] = rep
                print(f"solved path {i + 1}/{n_paths}", file=sys.stderr)
    return reports


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_fbm(args) -> int:
    if args.paths < 1 or args.steps < 2 or args.t_end <= 0:
        print("fbm: need --paths >= 1, --steps >= 2, --t-end > 0", file=sys.stderr)
        return EXIT_USAGE
    if not (0.0 < args.hurst < 1.0):
        print("fbm: --hurst must lie in (0, 1)", file=sys.stderr)
        return EXIT_USAGE
    try:
        os.makedirs(args.out, exist_ok=True)
        h = Hurst(args.hurst)
        endpoints = np.empty(args.paths)
        for i in range(args.paths):
            path = generate_fbm(h, args.steps, args.t_end, seed=args.seed + i)
            runio.write_path_csv(path.path, os.path.join(args.out, f"path_{i:04d}.csv"))
            endpoints[i] = path.path.values[-1]
            if (i + 1) % 100 == 0 or i + 1 == args.paths:
                print(f"generated {i + 1}/{args.paths}", file=sys.stderr)
        emp = float(np.mean(endpoints**2))
        stderr = float(np.std(endpoints**2, ddof=1) / math.sqrt(args.paths)) if args.paths > 1 else 0.0
        theo = theory_msd_fbm(h, args.t_end)
        summary = {
            "hurst": args.hurst,
            "steps": args.steps,
            "t_end": args.t_end,
            "paths": args.paths,
            "seed": args.seed,
            "empirical_mean_sq_end": emp,
            "theory_mean_sq_end": theo,
            "stderr": stderr,
            "ratio": emp / theo if theo else float("nan"),
        }
        runio.write_json(summary, os.path.join(args.out, "summary.json"))
    except OSError as exc:
        print(f"fbm: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def cmd_solve(args) -> int:
    if args.model not in _MODEL_NAMES:
        print(f"solve: unknown model {args.model!r}", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = _load_config(args.config, args.model, args.param or [])
    except ConfigError as exc:
        print(f"solve: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.paths < 1:
        print("solve: --paths must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    workers = args.workers if args.workers else _default_workers()
    try:
        # validate path 0 eagerly so parameter errors arrive before the pool
        _build_problem(args.model, cfg, args.seed, 0)
    except (ValueError, KeyError) as exc:
        print(f"solve: validation failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        reports = _run_ensemble(args.model, cfg, args.seed, args.paths, workers)
        os.makedirs(args.out, exist_ok=True)
        for i, rep in enumerate(reports):
            runio.write_json(rep.to_json_dict(), os.path.join(args.out, f"report_{i:04d}.json"))
        curve = analysis.msd([rep.solution for rep in reports])
        runio.write_msd_csv(curve, os.path.join(args.out, "msd.csv"))
        slopes = [
            runio.slope_fit_dict(analysis.loglog_slope(curve, w[0], w[1]))
            for w in cfg["windows"]
        ]
        run_report = {
            "config": {"model": args.model, "paths": args.paths, "seed": args.seed, **cfg},
            "git_describe": _git_describe(),
            "per_path": [
                {
                    "index": i,
                    "converged": bool(rep.converged),
                    "mc_steps_used": int(rep.mc_steps_used),
                }
                for i, rep in enumerate(reports)
            ],
            "msd": {
                "t_end": float(curve.t[-1]),
                "msd_end": float(curve.msd[-1]),
                "n_paths": curve.n_paths,
            },
            "slopes": slopes,
        }
        runio.write_json(run_report, os.path.join(args.out, "run_report.json"))
    except OSError as exc:
        print(f"solve: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def cmd_analyze(args) -> int:
    try:
        windows = json.loads(args.windows) if args.windows else []
        if not isinstance(windows, list) or any(
            not (isinstance(w, list) and len(w) == 2 and w[0] < w[1]) for w in windows
        ):
            raise ValueError("windows must be a JSON list of [t_lo, t_hi] pairs")
    except ValueError as exc:
        print(f"analyze: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not os.path.isdir(args.indir):
        print(f"analyze: not a directory: {args.indir}", file=sys.stderr)
        return EXIT_USAGE
    files = runio.list_csv_files(args.indir)
    if not files:
        print(f"analyze: no CSV paths found in {args.indir}", file=sys.stderr)
        return EXIT_USAGE
    try:
        paths = [runio.read_path_csv(f) for f in files]
        curve = analysis.msd(paths)
    except ValueError as exc:
        print(f"analyze: malformed input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        os.makedirs(args.out, exist_ok=True)
        runio.write_msd_csv(curve, os.path.join(args.out, "msd.csv"))
        slopes = [
            runio.slope_fit_dict(analysis.loglog_slope(curve, w[0], w[1]))
            for w in windows
        ]
        runio.write_json(slopes, os.path.join(args.out, "slopes.json"))
        vol_steps = args.vol_steps
        if vol_steps >= len(curve.msd):
            print("analyze: --vol-steps exceeds the grid; skipping volatility", file=sys.stderr)
            vol = None
        else:
            vol = analysis.realized_volatility(curve, vol_steps)
        with open(os.path.join(args.out, "volatility.csv"), "w", newline="\n") as fh:
            fh.write("window_steps,t_window,volatility,stderr_volatility\n")
            if vol is not None:
                sv = curve.stderr[vol_steps] / (2.0 * vol) if vol > 0 else 0.0
                fh.write(
                    f"{vol_steps},{runio.fmt17(curve.t[vol_steps])},"
                    f"{runio.fmt17(vol)},{runio.fmt17(sv)}\n"
                )
    except OSError as exc:
        print(f"analyze: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def cmd_tune(args) -> int:
    if args.model != "langevin":
        print(f"tune: unknown model {args.model!r} (only 'langevin')", file=sys.stderr)
        return EXIT_USAGE
    try:
        fractions = [float(tok) for tok in args.step_fractions.split(",") if tok]
    except ValueError as exc:
        print(f"tune: bad --step-fractions: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not fractions or args.repeats < 1:
        print("tune: need step fractions and --repeats >= 1", file=sys.stderr)
        return EXIT_USAGE
    if args.repeats == 1:
        print("tune: warning: repeats=1 gives no spread estimate", file=sys.stderr)
    try:
        cfg = _load_config(args.config, "langevin", args.param or [])
    except ConfigError as exc:
        print(f"tune: {exc}", file=sys.stderr)
        return EXIT_USAGE
    problem = _build_problem("langevin", cfg, args.seed, 0)
    base = _solver_config(cfg, args.seed, 0)
    results = tune_step_size(problem, fractions, args.repeats, base)
    try:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "tune.csv"), "w", newline="\n") as fh:
            fh.write("step_fraction,mean_steps,std_steps,n_censored\n")
            for r in results:
                std = "" if math.isnan(r.std_steps) else runio.fmt17(r.std_steps)
                fh.write(
                    f"{runio.fmt17(r.step_fraction)},{runio.fmt17(r.mean_steps)},"
                    f"{std},{r.n_censored}\n"
                )
    except OSError as exc:
        print(f"tune: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fraclab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fbm", help="generate fractional Brownian motion paths")
    p.add_argument("--hurst", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--t-end", dest="t_end", type=float, required=True)
    p.add_argument("--paths", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fbm)

    p = sub.add_parser("solve", help="solve an ensemble of residual problems")
    p.add_argument("--model", required=True)
    p.add_argument("--config", default="defaults", help="JSON config path or 'defaults'")
    p.add_argument("--param", action="append", help="override a model parameter, key=value")
    p.add_argument("--paths", type=int, default=1)
    p.add_argument("--workers", type=int, default=0, help="0 = FRACLAB_WORKERS or 1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("analyze", help="MSD/slope/volatility from path CSVs")
    p.add_argument("--in", dest="indir", required=True)
    p.add_argument("--windows", default="", help="JSON list of [t_lo, t_hi] windows")
    p.add_argument("--vol-steps", dest="vol_steps", type=int, default=100)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("tune", help="step-size optimization table")
    p.add_argument("--model", default="langevin")
    p.add_argument("--step-fractions", dest="step_fractions", required=True)
    p.add_argument("--repeats", type=int, required=True)
    p.add_argument("--config", default="defaults")
    p.add_argument("--param", action="append")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_tune)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
