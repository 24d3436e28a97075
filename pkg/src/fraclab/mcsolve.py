"""Metropolis-style residual minimization for second-order (fractional) SDEs.

A candidate path is scored by the per-point magnitude of the discretized
equation defect; points are nudged by small random moves, accepted only when
no tracked residual grows.  Convergence marches through time: a point enters
the active group only once every earlier point is inside tolerance, because
the memory term makes later residuals meaningless until their history is
settled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numba import njit

from .fraccalc import SampledPath, gl_weights

__all__ = [
    "ResidualProblem",
    "SolveReport",
    "SolverConfig",
    "TuneResult",
    "residuals",
    "solve",
    "tune_step_size",
]


@dataclass(frozen=True)
class ResidualProblem:
    """Discretized equation mass*x'' + friction*x' + frac_coeff*D^a x = forcing.

    The grid is uniform with n_points samples spaced dt apart starting at 0.
    forcing[k] applies at time index k; the sample at index 0 never enters a
    residual (there is no equation at t = 0, both endpoints being pinned by
    the initial conditions).
    """

    dt: float
    n_points: int
    mass: float
    friction: float
    forcing: np.ndarray
    frac_coeff: float = 0.0
    frac_order: float = 1.0
    init_position: float = 0.0
    init_velocity: float = 0.0

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ValueError("dt must be positive")
        if self.n_points < 2:
            raise ValueError("need at least 2 grid points")
        force = np.ascontiguousarray(self.forcing, dtype=np.float64)
        if force.size < self.n_points - 1:
            raise ValueError("forcing must cover time indices 0..n_points-2")
        if not np.all(np.isfinite(force)):
            raise ValueError("forcing must be finite")
        force.setflags(write=False)
        object.__setattr__(self, "forcing", force)
        for name in ("mass", "friction", "frac_coeff"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.frac_coeff != 0.0 and not (0.0 < self.frac_order <= 1.0):
            raise ValueError("fractional order must lie in (0, 1]")

    @property
    def t(self) -> np.ndarray:
        return self.dt * np.arange(self.n_points)

    @property
    def t_end(self) -> float:
        return self.dt * (self.n_points - 1)

    def scaled_gl_weights(self) -> np.ndarray:
        """dt**(-order)-scaled backward weights, one per possible lag."""
        if self.frac_coeff == 0.0:
            return np.zeros(1)
        return gl_weights(self.frac_order, self.n_points - 1) * self.dt ** (
            -self.frac_order
        )


@dataclass(frozen=True)
class SolverConfig:
    """Knobs of the Monte Carlo search."""

    tolerance: float
    max_steps: int
    step_fraction: float = 0.001
    group_size: int = 4
    seed: int = 0

    def __post_init__(self):
        if not self.tolerance > 0.0:
            raise ValueError("tolerance must be positive")
        if self.max_steps < 0:
            raise ValueError("max_steps must be non-negative")
        if not (0.0 < self.step_fraction < 1.0):
            raise ValueError("step_fraction must lie in (0, 1)")
        if self.group_size < 1:
            raise ValueError("group_size must be >= 1")


@dataclass(frozen=True)
class SolveReport:
    """Outcome of one solve; converged means every residual <= tolerance."""

    solution: SampledPath
    mc_steps_used: int
    residual_history: np.ndarray
    converged: bool

    def to_json_dict(self) -> dict:
        return {
            "converged": bool(self.converged),
            "mc_steps_used": int(self.mc_steps_used),
            "solution": {
                "t": self.solution.t.tolist(),
                "x": self.solution.values.tolist(),
            },
            "residual_history": [
                [int(s), float(r)] for s, r in self.residual_history
            ],
        }


@dataclass(frozen=True)
class TuneResult:
    step_fraction: float
    mean_steps: float
    std_steps: float
    n_censored: int


@njit(cache=True)
def _residuals_all(x, f, ws, h, mass, fric, cfrac, has_frac, out):
    # Residual of point j is the defect of the equation at time j-1, whose
    # stencil {x[j-2], x[j-1], x[j]} determines x[j] given settled history.
    n = x.shape[0]
    inv_h = 1.0 / h
    inv_h2 = 1.0 / (h * h)
    out[0] = 0.0
    if n > 1:
        out[1] = 0.0
    for j in range(2, n):
        tau = j - 1
        gl = 0.0
        if has_frac:
            for i in range(0, tau + 1):
                gl += ws[tau - i] * x[i]
        out[j] = abs(
            mass * ((x[j] - 2.0 * x[j - 1] + x[j - 2]) * inv_h2)
            + fric * ((x[j] - x[j - 1]) * inv_h)
            + cfrac * gl
            - f[tau]
        )


@njit(cache=True, inline="always")
def _rand01(state):
    # splitmix64, returning a double in [0, 1)
    state[0] = state[0] + np.uint64(0x9E3779B97F4A7C15)
    z = state[0]
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True, inline="always")
def _defect_at(j, x, f, ws, pref, frozen, inv_h, inv_h2, mass, fric, cfrac, has_frac):
    tau = j - 1
    gl = 0.0
    if has_frac:
        gl = pref[tau]
        for i in range(frozen + 1, tau + 1):
            gl += ws[tau - i] * x[i]
    return (
        mass * ((x[j] - 2.0 * x[j - 1] + x[j - 2]) * inv_h2)
        + fric * ((x[j] - x[j - 1]) * inv_h)
        + cfrac * gl
        - f[tau]
    )


@njit(cache=True)
def _mc_kernel(
    x,
    f,
    ws,
    h,
    mass,
    fric,
    cfrac,
    has_frac,
    tol,
    max_steps,
    step_size,
    group_size,
    seed,
    rec_interval,
    rec_steps,
    rec_vals,
    rec_epochs,
):
    """Monte Carlo sweep loop; x is updated in place.

    Returns (steps_used, converged, n_records).  One step is one sweep: one
    proposal for each member of the active group (the first group_size
    out-of-tolerance points).  A proposal is accepted only if no active
    point's residual increases; converged points earlier than the frontier
    are immutable by construction, so they cannot be pushed back out.

    The defect is linear in any single sample, so proposals are scored
    through cached signed defects plus precomputed move coefficients; caches
    are refreshed from the exact formula at every membership rebuild, and
    the frontier (hence the convergence verdict) only ever uses exact
    evaluations.
    """
    n = x.shape[0]
    inv_h = 1.0 / h
    inv_h2 = 1.0 / (h * h)
    # effect of moving x[p] on the defect owned by point p + m
    reach = n if has_frac else 3
    coef = np.zeros(reach if reach > 3 else 3)
    coef[0] = mass * inv_h2 + fric * inv_h
    coef[1] = -2.0 * mass * inv_h2 - fric * inv_h
    coef[2] = mass * inv_h2
    if has_frac:
        coef[1] += cfrac * ws[0]
        coef[2] += cfrac * ws[1]
        for m in range(3, n):
            coef[m] = cfrac * ws[m - 1]
    # prefix memory sums over permanently frozen points, per time index
    pref = np.zeros(n)
    frozen = -1
    state = np.empty(1, np.uint64)
    state[0] = np.uint64(seed) * np.uint64(0x9E3779B97F4A7C15) + np.uint64(
        0x243F6A8885A308D3
    )
    # points 0 and 1 are pinned by the initial conditions: freeze immediately
    for p in range(0, min(2, n)):
        if has_frac and x[p] != 0.0:
            for tau in range(p, n - 1):
                pref[tau] += ws[tau - p] * x[p]
        frozen = p
    front = 2
    steps = 0
    nrec = 0
    actives = np.empty(group_size, np.int64)
    dvals = np.empty(group_size)  # signed cached defects of the members
    nd = np.empty(group_size)
    converged = False
    rebuild = True
    cnt = 0
    epoch = 0
    while True:
        if rebuild:
            epoch += 1
            # advance the frontier past freshly converged points (exact)
            while front <= n - 1:
                d = _defect_at(
                    front, x, f, ws, pref, frozen, inv_h, inv_h2, mass, fric, cfrac, has_frac
                )
                if abs(d) <= tol:
                    if has_frac and x[front] != 0.0:
                        for tau in range(front, n - 1):
                            pref[tau] += ws[tau - front] * x[front]
                    frozen = front
                    front += 1
                else:
                    break
            if front > n - 1:
                converged = True
                break
            # active group: first group_size out-of-tolerance points (exact)
            cnt = 0
            j = front
            while j <= n - 1 and cnt < group_size:
                d = _defect_at(
                    j, x, f, ws, pref, frozen, inv_h, inv_h2, mass, fric, cfrac, has_frac
                )
                if abs(d) > tol:
                    actives[cnt] = j
                    dvals[cnt] = d
                    cnt += 1
                j += 1
            rebuild = False
        if steps >= max_steps:
            break
        if nrec < rec_steps.shape[0] and steps % rec_interval == 0:
            mx = 0.0
            for k in range(cnt):
                if abs(dvals[k]) > mx:
                    mx = abs(dvals[k])
            rec_steps[nrec] = steps
            rec_vals[nrec] = mx
            rec_epochs[nrec] = epoch
            nrec += 1
        # one proposal per active point, in time order
        for idx in range(cnt):
            jj = actives[idx]
            delta = (2.0 * _rand01(state) - 1.0) * step_size
            ok = True
            # moving x[jj] can only touch residuals at indices >= jj
            for k in range(idx, cnt):
                m = actives[k] - jj
                if m >= reach:
                    nd[k] = dvals[k]
                    continue
                v = dvals[k] + delta * coef[m]
                if abs(v) > abs(dvals[k]):
                    ok = False
                    break
                nd[k] = v
            if ok:
                x[jj] += delta
                for k in range(idx, cnt):
                    dvals[k] = nd[k]
                if abs(dvals[idx]) <= tol:
                    rebuild = True
        steps += 1
        if steps & 0xFF == 0:
            # periodic exact refresh: catches unprotected interleaved points
            # and clears the tiny float drift of the incremental updates
            rebuild = True
    return steps, converged, nrec


def _initial_guess(problem: ResidualProblem) -> np.ndarray:
    x = np.zeros(problem.n_points)
    x[0] = problem.init_position
    if problem.n_points > 1:
        x[1] = problem.init_position + problem.init_velocity * problem.dt
    return x


def residuals(problem: ResidualProblem, candidate: SampledPath) -> np.ndarray:
    """Per-point defect magnitudes of a candidate path on the problem grid."""
    if len(candidate) != problem.n_points:
        raise ValueError("candidate length does not match the problem grid")
    if abs(candidate.dt - problem.dt) > 1e-12 * problem.dt:
        raise ValueError("candidate step does not match the problem grid")
    out = np.empty(problem.n_points)
    has_frac = problem.frac_coeff != 0.0
    _residuals_all(
        candidate.values,
        problem.forcing,
        problem.scaled_gl_weights(),
        problem.dt,
        problem.mass,
        problem.friction,
        problem.frac_coeff,
        has_frac,
        out,
    )
    return out


def solve(problem: ResidualProblem, config: SolverConfig) -> SolveReport:
    """Search for a path whose residuals all sit inside the tolerance.

    The initial guess is the all-zeros path (with the two pinned
    initial-condition samples).  Non-convergence within max_steps is reported
    through converged=False, never as an exception.
    """
    x = _initial_guess(problem)
    has_frac = problem.frac_coeff != 0.0
    rec_cap = 2048
    rec_interval = max(1, config.max_steps // rec_cap)
    rec_steps = np.empty(rec_cap, np.int64)
    rec_vals = np.empty(rec_cap)
    rec_epochs = np.empty(rec_cap, np.int64)
    steps, converged, nrec = _mc_kernel(
        x,
        problem.forcing,
        problem.scaled_gl_weights(),
        problem.dt,
        problem.mass,
        problem.friction,
        problem.frac_coeff,
        has_frac,
        config.tolerance,
        config.max_steps,
        config.step_fraction * problem.dt,
        config.group_size,
        config.seed & 0xFFFFFFFFFFFFFFFF,
        rec_interval,
        rec_steps,
        rec_vals,
        rec_epochs,
    )
    solution = SampledPath(t0=0.0, dt=problem.dt, values=x)
    final_max = float(np.max(residuals(problem, solution)))
    history = np.empty((nrec + 1, 2))
    history[:nrec, 0] = rec_steps[:nrec]
    history[:nrec, 1] = rec_vals[:nrec]
    history[nrec] = (steps, final_max)
    return SolveReport(
        solution=solution,
        mc_steps_used=int(steps),
        residual_history=history,
        converged=bool(converged),
    )


def tune_step_size(
    problem: ResidualProblem,
    candidates: Sequence[float],
    repeats: int,
    config: SolverConfig,
) -> list[TuneResult]:
    """Mean and spread of the step count over repeated solves per step size.

    Each repeat uses a distinct seed derived from config.seed.  Runs that hit
    max_steps without converging are censored at max_steps and counted in
    n_censored.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    results = []
    for frac in candidates:
        counts = np.empty(repeats)
        censored = 0
        for r in range(repeats):
            cfg = SolverConfig(
                tolerance=config.tolerance,
                max_steps=config.max_steps,
                step_fraction=float(frac),
                group_size=config.group_size,
                seed=config.seed + 1_000_003 * r,
            )
            report = solve(problem, cfg)
            counts[r] = report.mc_steps_used
            if not report.converged:
                censored += 1
        std = float(np.std(counts, ddof=1)) if repeats > 1 else float("nan")
        results.append(
            TuneResult(
                step_fraction=float(frac),
                mean_steps=float(np.mean(counts)),
                std_steps=std,
                n_censored=censored,
            )
        )
    return results
